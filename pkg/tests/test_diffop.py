"""
Tests for the operator algebra, the left ideal of (D₁, D₂) and the
semiclassical comparison.
"""

from fractions import Fraction

import pytest

from src.diffalg import h, ham, mu, t
from src.diffop import (
    Convention,
    OpPoly,
    SystemSpec,
    at_h_one,
    commutator,
    default_tables,
    flatness_constraints,
    hamiltonian_variation,
    op_mul,
    principal_symbol,
    reduce_left_ideal,
    semiclassical_compare,
    system_from_tables,
)
from src.errors import ContractViolation
from src.phase import PhasePoly, hamiltonian, poisson_bracket

D = OpPoly.D
DBAR = OpPoly.Dbar
HALF = Fraction(1, 2)


def random_op(
    poly_factory, rng, max_deg: int = 2, h_free: bool = False, dbar_free: bool = False
) -> OpPoly:
    terms = {}
    for _ in range(rng.randint(1, 2)):
        c = poly_factory(terms=2)
        if h_free:
            c = c.h_part(0)
        terms[(rng.randint(0, max_deg), 0 if dbar_free else rng.randint(0, 1))] = c
    return OpPoly(terms)


def n2_system():
    """t̂ = t₂, μ̂ = μ₂ and the trace-free μ̂₁ of the flat-section system."""
    return system_from_tables(2, {2: t(2)}, {1: HALF * h(1) * mu(2).d(), 2: mu(2)})


class TestAlgebra:
    """Tests for the operator algebra"""

    def test_defining_rewrite(self):
        """Test the rewrite of D past a coefficient"""
        c = mu(2)
        assert op_mul(D(), OpPoly.const(c)) == c * D() + OpPoly.const(h(1) * c.d())

    def test_flat_base(self):
        """Test that D and D̄ commute"""
        assert commutator(D(), DBAR()).is_zero()

    def test_one_step_commutator(self):
        """Test the commutator of D with a coefficient times D"""
        assert commutator(D(), mu(2) * D()) == (h(1) * mu(2).d()) * D()

    def test_associativity(self, poly_factory, rng):
        """Test associativity on random operators"""
        for _ in range(200):
            x, y, z = (random_op(poly_factory, rng) for _ in range(3))
            assert op_mul(op_mul(x, y), z) == op_mul(x, op_mul(y, z))

    def test_semiclassical_symbol(self, poly_factory, rng):
        """Test that the h¹ symbol of a commutator is the Poisson bracket"""
        for _ in range(200):
            x = random_op(poly_factory, rng, h_free=True)
            y = random_op(poly_factory, rng, h_free=True)
            lowest = principal_symbol(commutator(x, y)).map_coefficients(lambda c: c.h_part(1))
            assert lowest == poisson_bracket(principal_symbol(x), principal_symbol(y))
            assert principal_symbol(commutator(x, y)).map_coefficients(
                lambda c: c.h_part(0)
            ).is_zero()


class TestLeftIdeal:
    """Tests for reduction modulo the left ideal of D₁ and D₂"""

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_generators_reduce_to_zero(self, n):
        """Test that D₁ and D₂ reduce to zero"""
        sys = SystemSpec.generic(n)
        assert reduce_left_ideal(sys.D1, sys).is_zero()
        assert reduce_left_ideal(sys.D2, sys).is_zero()

    def test_top_power_gives_tail(self):
        """Test that Dⁿ reduces to the tail of D₁"""
        sys = SystemSpec.generic(4)
        expected = OpPoly.from_d_coefficients({2: t(2), 1: -t(3), 0: t(4)})
        assert reduce_left_ideal(D(4), sys) == expected

    def test_cyclic_vector_tail(self):
        """Test the tail in the cyclic-vector convention"""
        sys = SystemSpec.generic(3, Convention.CYCLIC_VECTOR)
        assert reduce_left_ideal(D(3), sys) == OpPoly.from_d_coefficients({1: t(2), 0: t(3)})

    def test_left_multiples_vanish(self, poly_factory, rng):
        """Test that x·D₁ + y·D₂ reduces to zero for ∂̄-free x and arbitrary y"""
        for n in (2, 3):
            sys = SystemSpec.generic(n)
            for _ in range(100):
                x = random_op(poly_factory, rng, dbar_free=True)
                y = random_op(poly_factory, rng)
                combo = op_mul(x, sys.D1) + op_mul(y, sys.D2)
                assert reduce_left_ideal(combo, sys).is_zero()

    def test_d2_multiples_vanish(self, poly_factory, rng):
        """Test that every left multiple of D₂ reduces to zero"""
        sys = SystemSpec.generic(3)
        for _ in range(100):
            y = random_op(poly_factory, rng)
            assert reduce_left_ideal(op_mul(y, sys.D2), sys).is_zero()

    def test_dbar_multiple_of_d1_leaves_flatness(self):
        """Test that ∂̄·D₁ of a generic system reduces to the flatness obstruction"""
        sys = SystemSpec.generic(2)
        rest = reduce_left_ideal(op_mul(DBAR(), sys.D1), sys)
        assert not rest.is_zero()
        assert rest.dbar_degree <= 0
        assert rest.d_degree < 2

    def test_normal_form_shape(self, poly_factory, rng):
        """Test the shape and idempotence of normal forms"""
        sys = SystemSpec.generic(3)
        for _ in range(50):
            out = reduce_left_ideal(random_op(poly_factory, rng, max_deg=4), sys)
            assert out.dbar_degree <= 0
            assert out.d_degree < 3
            assert reduce_left_ideal(out, sys) == out


class TestFlatness:
    """Tests for flatness constraints"""

    def test_n2_with_h_set_to_one(self):
        """Test the rank-two constraint at h = 1"""
        (constraint,) = flatness_constraints(n2_system())
        expected = (
            -t(2).dbar()
            + mu(2) * t(2).d()
            + 2 * mu(2).d() * t(2)
            - HALF * mu(2).d().d().d()
        )
        assert at_h_one(constraint) == expected

    def test_n2_h_weights(self):
        """Test the h weights of the rank-two constraint"""
        (constraint,) = flatness_constraints(n2_system())
        cond = -t(2).dbar() + mu(2) * t(2).d() + 2 * mu(2).d() * t(2)
        assert constraint == h(1) * cond - HALF * h(3) * mu(2).d().d().d()

    def test_wrong_mu1_detected(self):
        """Test that an unsolved μ̂₁ is detected"""
        sys = system_from_tables(2, {2: t(2)}, {2: mu(2)})
        with pytest.raises(ContractViolation, match="mu1"):
            flatness_constraints(sys)


class TestSymbol:
    """Tests for principal symbols"""

    def test_symbol_of_D1(self):
        """Test the principal symbol of D₁"""
        sys = SystemSpec.generic(3)
        expected = PhasePoly.p(3) - t(2) * PhasePoly.p() + t(3)
        assert principal_symbol(sys.D1) == expected

    def test_symbol_of_zero(self):
        """Test that the zero operator has zero symbol"""
        assert principal_symbol(OpPoly()).is_zero()


class TestHamiltonianVariation:
    """Tests for the operator Hamiltonian variation"""

    def test_constant_is_central(self):
        """Test that a constant Hamiltonian has zero variation"""
        sys = SystemSpec.generic(3)
        dP, dQ = hamiltonian_variation(OpPoly.const(5), sys)
        assert dP.is_zero() and dQ.is_zero()

    def test_dbar_rejected(self):
        """Test that a D̄-bearing Hamiltonian is rejected"""
        with pytest.raises(ValueError, match="Dbar"):
            hamiltonian_variation(DBAR(), SystemSpec.generic(2))

    def test_variations_are_normal_forms(self):
        """Test that variations come back in normal form"""
        sys = SystemSpec.generic(3)
        dP, dQ = hamiltonian_variation(ham(3) * D(2), sys)
        assert dP.d_degree < 3 and dQ.d_degree < 3
        assert dP.dbar_degree <= 0 and dQ.dbar_degree <= 0


class TestSemiclassical:
    """Tests for the semiclassical comparison"""

    @pytest.mark.parametrize("n", [2, 3])
    def test_generic_hamiltonian(self, n):
        """Test the comparison for the generic Hamiltonian"""
        report = semiclassical_compare(hamiltonian(n), SystemSpec.generic(n))
        assert report.passed, report.residuals

    @pytest.mark.parametrize("n", [2, 3])
    def test_each_monomial_degree(self, n):
        """Test the comparison for each monomial degree"""
        for k in range(1, n + 1):
            H = ham(k) * PhasePoly.p(k - 1)
            assert semiclassical_compare(H, SystemSpec.generic(n)).passed

    def test_cyclic_vector_convention(self):
        """Test the comparison in the cyclic-vector convention"""
        sys = SystemSpec.generic(3, Convention.CYCLIC_VECTOR)
        assert semiclassical_compare(ham(3) * PhasePoly.p(2), sys).passed

    def test_zero_hamiltonian(self):
        """Test that the zero Hamiltonian passes with no residuals"""
        report = semiclassical_compare(PhasePoly(), SystemSpec.generic(2))
        assert report.passed
        assert report.residuals == []

    def test_report_serializes(self):
        """Test that the comparison report serializes to JSON"""
        report = semiclassical_compare(ham(2) * PhasePoly.p(), SystemSpec.generic(2))
        data = report.model_dump(mode="json")
        assert data["passed"] is True
        assert data["schema_version"] == 1
        assert isinstance(data["op_delta_t"][0], list)


class TestTables:
    """Tests for default t̂ and μ̂ tables"""

    def test_shifted_tables(self):
        """Test the shifted default tables"""
        tables = default_tables(2, 2)
        assert tables["t"][2] == h(1) * t(2) + h(2) * t(2, 1)
        assert tables["mu"][2] == mu(2) + h(1) * mu(2, 1) + h(2) * mu(2, 2)

    def test_unshifted_tables(self):
        """Test the unshifted default tables"""
        tables = default_tables(3, 1, shifted=False)
        assert tables["t"][3] == t(3) + h(1) * t(3, 1)
