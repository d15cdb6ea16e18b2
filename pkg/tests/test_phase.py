"""
Tests for the phase-space layer: bracket, spectral ideals, conditions (𝒞).
"""

import pytest

from src.diffalg import h, ham, mu, t
from src.phase import (
    Mu1Mode,
    PhasePoly,
    SpectralIdealSpec,
    SpectralVariant,
    bracket_route,
    conditions_C,
    conditions_via_bracket,
    mu_free,
    phase_to_text,
    poisson_bracket,
    reduce_mod_I,
    spectral_ideal,
    variation_coefficients,
    vary_hamiltonian,
)

P = PhasePoly.p
PBAR = PhasePoly.pbar


def random_phase(poly_factory, rng, pbar: bool = True) -> PhasePoly:
    terms = {}
    for _ in range(rng.randint(1, 3)):
        deg = (rng.randint(0, 2), rng.randint(0, 1) if pbar else 0)
        terms[deg] = poly_factory(terms=2)
    return PhasePoly(terms)


class TestPoissonBracket:
    """Tests for the Poisson bracket"""

    def test_n2_example(self):
        """Test the bracket of the rank-two generators"""
        f = -P(2) + h(1) * t(2)
        g = -PBAR() + mu(2) * P()
        expected = (
            PhasePoly({(2, 0): -2 * mu(2).d()})
            + (-h(1) * mu(2) * t(2).d() + h(1) * t(2).dbar())
        )
        assert poisson_bracket(f, g) == expected

    def test_self_bracket_vanishes(self, poly_factory, rng):
        """Test that the bracket of a function with itself vanishes"""
        f = random_phase(poly_factory, rng)
        assert poisson_bracket(f, f).is_zero()

    def test_fiber_variables_commute(self):
        """Test that p and p̄ commute"""
        assert poisson_bracket(P(), PBAR()).is_zero()

    def test_sign_flips_orientation(self):
        """Test that the sign option negates the bracket"""
        f, g = -P(2) + t(2), mu(2) * P()
        assert poisson_bracket(f, g, sign=-1) == -poisson_bracket(f, g)

    def test_jacobi_identity(self, poly_factory, rng):
        """Test the Jacobi identity on random polynomials"""
        for _ in range(200):
            f = random_phase(poly_factory, rng)
            g = random_phase(poly_factory, rng)
            k = random_phase(poly_factory, rng)
            total = (
                poisson_bracket(f, poisson_bracket(g, k))
                + poisson_bracket(g, poisson_bracket(k, f))
                + poisson_bracket(k, poisson_bracket(f, g))
            )
            assert total.is_zero()

    def test_antisymmetry(self, poly_factory, rng):
        """Test antisymmetry on random polynomials"""
        for _ in range(200):
            f = random_phase(poly_factory, rng)
            g = random_phase(poly_factory, rng)
            assert poisson_bracket(f, g) == -poisson_bracket(g, f)


class TestReduction:
    """Tests for reduction modulo the spectral ideal"""

    def test_n2_proof_variant(self):
        """Test the signed reduction for rank two"""
        spec = SpectralIdealSpec(n=2, variant=SpectralVariant.SIGNED)
        f = PhasePoly({(2, 0): -2 * mu(2).d()}) + (
            -h(1) * mu(2) * t(2).d() + h(1) * t(2).dbar()
        )
        expected = h(1) * (t(2).dbar() - mu(2) * t(2).d() - 2 * mu(2).d() * t(2))
        assert reduce_mod_I(f, spec) == PhasePoly.const(expected)

    def test_pbar_becomes_Q(self):
        """Test that p̄ is replaced by Q"""
        spec = SpectralIdealSpec(n=3, mu1_mode=Mu1Mode.SYMBOL)
        expected = PhasePoly.from_p_coefficients({0: mu(1), 1: mu(2), 2: mu(3)})
        assert reduce_mod_I(PBAR(), spec) == expected

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_normal_form_contract(self, n):
        """Test the shape of normal forms"""
        spec = SpectralIdealSpec(n=n)
        out = reduce_mod_I(P(n) * PBAR(), spec)
        assert out.p_degree < n
        assert out.pbar_degree <= 0

    def test_idempotent_and_confluent(self, poly_factory, rng):
        """Test that reduction is idempotent and confluent"""
        for n in (2, 3):
            for variant in SpectralVariant:
                ideal = spectral_ideal(SpectralIdealSpec(n=n, variant=variant))
                for _ in range(100):
                    f = random_phase(poly_factory, rng) * P(rng.randint(0, n))
                    once = ideal.reduce(f)
                    assert ideal.reduce(once) == once
                    assert ideal.reduce(f, order="p_first") == once

    def test_generators_reduce_to_zero(self):
        """Test that the ideal generators reduce to zero"""
        ideal = spectral_ideal(SpectralIdealSpec(n=3))
        f, g = ideal.generators
        assert ideal.reduce(f).is_zero()
        assert ideal.reduce(g * P(2) + f * PBAR()).is_zero()


class TestConditions:
    """Tests for the compatibility conditions"""

    def test_n2(self):
        """Test the rank-two condition"""
        (c2,) = conditions_C(2)
        assert c2 == -t(2).dbar() + mu(2) * t(2).d() + 2 * mu(2).d() * t(2)

    def test_n3_entries(self):
        """Test the rank-three conditions"""
        c2, c3 = conditions_C(3)
        assert c3 == -t(3).dbar() + mu(2) * t(3).d() + 3 * mu(2).d() * t(3)
        assert c2 == (
            -t(2).dbar()
            + mu(2) * t(2).d()
            + 2 * mu(2).d() * t(2)
            + 3 * mu(3).d() * t(3)
            + 2 * mu(3) * t(3).d()
        )

    def test_rank_bound(self):
        """Test that an invalid rank is rejected"""
        with pytest.raises(ValueError):
            conditions_C(1)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_bracket_route_agrees(self, n):
        """Test that the bracket route gives the closed formula"""
        assert conditions_via_bracket(n) == conditions_C(n)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_mu_free_limit(self, n):
        """Test that each condition reduces to −∂̄t_k when μ vanishes"""
        for k, cond in zip(range(2, n + 1), conditions_C(n)):
            assert mu_free(cond) == -t(k).dbar()

    def test_n2_unit_is_h(self):
        """Test that the rank-two unit is h with nothing dropped"""
        route = bracket_route(2)
        assert route.units == [h(1)]
        assert route.dropped_top.is_zero()

    def test_n3_dropped_top_coefficient(self):
        """Test the dropped top coefficient for rank three"""
        route = bracket_route(3)
        assert route.dropped_top == 2 * h(1) * (mu(3) * t(2)).d()

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_plain_variant(self, n):
        """Test that the plain spectral variant gives the closed formula"""
        route = bracket_route(n, variant=SpectralVariant.PLAIN)
        assert route.conditions == conditions_C(n)
        assert all(u == -1 for u in route.units)
        assert route.dropped_top.is_zero()


class TestHamiltonianVariation:
    """Tests for the phase-space Hamiltonian variation"""

    def test_rational_constant_is_central(self):
        """Test that a rational constant has zero variation"""
        spec = SpectralIdealSpec(n=3)
        dP, dQ = vary_hamiltonian(PhasePoly.const(7), spec)
        assert dP.is_zero() and dQ.is_zero()

    def test_underived_constant_gives_derivative_terms(self):
        """Test the variation of a constant Hamiltonian"""
        spec = SpectralIdealSpec(n=2)
        dP, dQ = vary_hamiltonian(PhasePoly.const(ham(1)), spec)
        assert dP == PhasePoly({(1, 0): 2 * ham(1).d()})
        assert dQ == PhasePoly.const(ham(1).dbar() - mu(2) * ham(1).d())

    def test_n2_quadratic_differential(self):
        """Test that t₂ varies as a quadratic differential"""
        spec = SpectralIdealSpec(n=2)
        dP, dQ = vary_hamiltonian(ham(2) * P(), spec)
        (dt2,), dmu = variation_coefficients(dP, dQ, spec)
        assert dt2 == ham(2) * t(2).d() + 2 * t(2) * ham(2).d()
        assert dmu[1] == ham(2).dbar() + ham(2) * mu(2).d() - mu(2) * ham(2).d()
        assert dmu[0].is_zero()

    def test_pbar_rejected(self):
        """Test that a p̄-bearing Hamiltonian is rejected"""
        with pytest.raises(ValueError, match="pbar"):
            vary_hamiltonian(PBAR(), SpectralIdealSpec(n=2))

    def test_antisymmetry_before_reduction(self):
        """Test antisymmetry of the variation before reduction"""
        spec = SpectralIdealSpec(n=3)
        H = ham(2) * P() + ham(3) * P(2)
        f, _ = spectral_ideal(spec).generators
        assert poisson_bracket(H, f) == -poisson_bracket(f, H)


class TestRendering:
    """Tests for rendering phase polynomials"""

    def test_text(self):
        """Test the text form of phase polynomials"""
        assert phase_to_text(PhasePoly()) == "0"
        assert phase_to_text(mu(2) * P() + PBAR()) == "pbar + (mu2)*p"

