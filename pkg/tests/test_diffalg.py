"""
Tests for the differential polynomial ring

Constructors, ring operations, derivations, substitution, gradings, rewrite
rules and the wire formats.
"""

from fractions import Fraction

import pytest

from src.diffalg import (
    DerivativeRules,
    DerivedGen,
    DiffPoly,
    GenKind,
    RootAdjunction,
    derived,
    from_json,
    gen_id,
    get_registry,
    h,
    h_parts,
    jet,
    lam,
    make_gen,
    mu,
    poly_sum,
    t,
    to_json,
    to_latex,
    to_text,
    truncate_h,
    truncate_t_degree,
)
from src.errors import LocalizationError, RegistryConflictError

HALF = Fraction(1, 2)


class TestConstruction:
    """Tests for building generators"""

    def test_make_gen_registers_weight(self):
        """Test that making a generator registers its weight"""
        t2 = make_gen(GenKind.T, (2, 0), (2, 0))
        assert to_text(t2) == "t2"
        assert get_registry().weight(gen_id(t2)) == (2, 0)

    def test_mu_order_label(self):
        """Test the label of an h-order μ coefficient"""
        assert to_text(make_gen(GenKind.MU, (3, 1), (-2, 1))) == "mu3_1"

    def test_conflicting_weight_rejected(self):
        """Test that re-registering a generator with another weight fails"""
        make_gen(GenKind.T, (2, 0), (2, 0))
        with pytest.raises(RegistryConflictError):
            make_gen(GenKind.T, (2, 0), (5, 0))

    def test_invalid_indices(self):
        """Test that out-of-range indices are rejected"""
        with pytest.raises(ValueError):
            make_gen(GenKind.T, (1, 0))
        with pytest.raises(ValueError):
            make_gen(GenKind.JET, (0,))

    def test_equal_generators_compare_equal(self):
        """Test that equal generators compare equal"""
        assert t(2) == t(2)
        assert t(2) != t(2, 1)


class TestRingOperations:
    """Tests for ring arithmetic and localization"""

    def test_additive_inverse(self):
        """Test additive inverses"""
        assert t(2) + (-t(2)) == 0
        assert (t(2) - t(2)).is_zero()

    def test_lambda_localization(self):
        """Test that λ times its inverse is one"""
        assert lam() * lam() ** -1 == 1

    def test_h_exponents_add(self):
        """Test that h exponents add under multiplication"""
        x = h(Fraction(1, 3)) * t(2)
        y = h(Fraction(2, 3)) * t(3)
        assert x * y == h(1) * t(2) * t(3)

    def test_non_invertible_power_rejected(self):
        """Test that a negative power of a non-invertible generator fails"""
        with pytest.raises(LocalizationError):
            _ = mu(2) ** -1

    def test_tn_localization_is_lazy(self):
        """Test that t_n localization is recorded only when used"""
        registry = get_registry()
        registry.declare_rank(2)
        assert not registry.tn_localization_used
        assert t(2) * t(2) ** -1 == 1
        assert registry.tn_localization_used

    def test_tn_localization_can_be_disabled(self):
        """Test that t_n localization can be switched off"""
        registry = get_registry()
        registry.declare_rank(2)
        registry.localize_tn = False
        with pytest.raises(LocalizationError, match="localization is off"):
            _ = t(2) ** -1

    def test_ring_axioms(self, poly_factory):
        """Test the ring axioms on random polynomials"""
        for _ in range(200):
            x, y, z = poly_factory(), poly_factory(), poly_factory()
            assert (x * y) * z == x * (y * z)
            assert x * (y + z) == x * y + x * z
            assert x * y == y * x
            assert (x + y) - y == x

    def test_normalization_is_confluent(self, poly_factory):
        """Test that normalization does not depend on the order of operations"""
        for _ in range(200):
            parts = [poly_factory(terms=1) for _ in range(4)]
            assert poly_sum(parts) == poly_sum(reversed(parts))
            assert sum(parts[1:], parts[0]) == poly_sum(parts[::-1])


class TestDerivations:
    """Tests for the derivations ∂ and ∂̄"""

    def test_leibniz_example(self):
        """Test the Leibniz rule on a product of generators"""
        expected = t(2).d() * mu(3) + t(2) * mu(3).d()
        assert (t(2) * mu(3)).d() == expected

    def test_partials_commute(self):
        """Test that ∂ and ∂̄ commute on a generator"""
        assert mu(2).d().dbar() == mu(2).dbar().d()
        assert mu(2).d().dbar() == DiffPoly.of(DerivedGen(gen_id(mu(2)), 1, 1))

    def test_quotient_rule(self):
        """Test the derivative of an inverse"""
        assert (lam() ** -1).d() == -(lam() ** -2) * lam().d()

    def test_h_is_constant(self):
        """Test that h is a constant"""
        assert h(1).d() == 0
        assert (h(2) * t(2)).dbar() == h(2) * t(2).dbar()

    def test_leibniz_property(self, poly_factory):
        """Test the Leibniz rule on random polynomials"""
        for _ in range(200):
            x, y = poly_factory(with_lambda=True), poly_factory(with_lambda=True)
            assert (x * y).d() == x.d() * y + x * y.d()
            assert (x * y).dbar() == x.dbar() * y + x * y.dbar()
            assert (x + y).d() == x.d() + y.d()

    def test_d_dbar_commute_property(self, poly_factory):
        """Test that ∂ and ∂̄ commute on random polynomials"""
        for _ in range(200):
            x = poly_factory(with_lambda=True)
            assert x.d().dbar() == x.dbar().d()


class TestSubstitute:
    """Tests for substituting generators"""

    def test_mu1_chain_substitution(self):
        """Test substituting μ₁ into an expression with its derivative"""
        mu1 = mu(1)
        expr = mu1 * t(2) + h(1) * mu1.d()
        value = -HALF * h(1) * mu(2).d()
        expected = -HALF * h(1) * mu(2).d() * t(2) - HALF * h(2) * mu(2).d().d()
        assert expr.substitute(gen_id(mu1), value) == expected

    def test_identity_substitution(self):
        """Test that substituting a generator for itself changes nothing"""
        x = lam() ** 2
        assert x.substitute(gen_id(lam()), lam()) == x

    def test_chain_rule_through_inverse(self, invertible_u):
        """Test substitution into derivatives and inverses"""
        x = lam().d() * lam() ** -1
        assert x.substitute(gen_id(lam()), invertible_u) == invertible_u.d() * invertible_u**-1

    def test_invertible_replaced_by_sum_rejected(self):
        """Test that an inverted generator cannot be replaced by a sum"""
        x = lam() ** -1
        with pytest.raises(LocalizationError):
            x.substitute(gen_id(lam()), t(2) + t(3))

    def test_substitute_properties(self, poly_factory):
        """Test that substitution is a ring homomorphism"""
        target = gen_id(mu(2))
        for _ in range(200):
            x, y = poly_factory(), poly_factory()
            value = poly_factory(terms=2)
            assert x.substitute(target, mu(2)) == x
            assert (x + y).substitute(target, value) == x.substitute(target, value) + y.substitute(
                target, value
            )
            assert (x * y).substitute(target, value) == x.substitute(target, value) * y.substitute(
                target, value
            )


class TestGradings:
    """Tests for the h and t gradings"""

    def test_h_parts_example(self):
        """Test splitting a polynomial into h parts"""
        x = h(1) * t(2) + h(2) * t(2, 1)
        assert h_parts(x) == {Fraction(1): t(2), Fraction(2): t(2, 1)}

    def test_h_parts_of_zero(self):
        """Test that zero has no h parts"""
        assert h_parts(DiffPoly.zero()) == {}

    def test_truncate_h(self):
        """Test truncation in powers of h"""
        x = h(1) * t(2) + h(2) * t(2, 1)
        assert truncate_h(x, None) == x
        assert truncate_h(x, 1) == h(1) * t(2)
        with pytest.raises(ValueError):
            truncate_h(x, -1)

    def test_truncate_t_degree(self):
        """Test truncation by degree in the t generators"""
        assert truncate_t_degree(t(2) * (mu(3) * t(2)).d(), 1) == 0
        assert truncate_t_degree(mu(2) * t(3).d(), 1) == mu(2) * t(3).d()
        x = t(2) * t(3) * mu(4)
        assert truncate_t_degree(x, 2) == x

    def test_h_grading_property(self, poly_factory):
        """Test that the h parts sum back to the polynomial"""
        for _ in range(200):
            x, y = poly_factory(), poly_factory()
            parts = h_parts(x * y)
            px, py = h_parts(x), h_parts(y)
            conv = {}
            for a, xa in px.items():
                for b, yb in py.items():
                    conv[a + b] = conv.get(a + b, DiffPoly.zero()) + xa * yb
            assert parts == {q: v for q, v in conv.items() if v}
            assert poly_sum(part.shift_h(q) for q, part in h_parts(x).items()) == x

    def test_coefficient_of(self):
        """Test extracting the coefficient of a derived generator"""
        key = derived(mu(2), 1, 0)
        x = t(2) * mu(2).d() + mu(3)
        coeff, rest = x.coefficient_of(key)
        assert coeff == t(2)
        assert rest == mu(3)
        with pytest.raises(ValueError):
            (mu(2).d() ** 2).coefficient_of(key)

    def test_degree_in(self):
        """Test the degree in a generator"""
        x = t(2) ** 2 * t(2).d() + mu(2)
        assert x.degree_in(gen_id(t(2))) == 3
        assert x.degree_in(derived(t(2))) == 2


class TestRules:
    """Tests for derivative rewrite rules"""

    def _lambda_root(self, n: int) -> RootAdjunction:
        get_registry().declare_rank(n)
        return RootAdjunction(gen_id(lam()), n, (-1) ** n * t(n))

    def test_root_reduction(self):
        """Test reducing powers of a root generator"""
        root = self._lambda_root(2)
        assert root.reduce(lam() ** 3) == t(2) * lam()
        assert root.reduce(lam() ** -1) == lam() * t(2) ** -1

    def test_root_reduction_confluence(self):
        """Test that root reduction is confluent for several ranks"""
        for n in (2, 3, 4):
            root = self._lambda_root(n)
            direct = root.reduce(lam() ** (n + 1))
            stepwise = root.reduce(lam() * root.reduce(lam() ** n))
            assert direct == stepwise == (-1) ** n * t(n) * lam()

    def test_derivative_of_root(self):
        """Test the derivative of a root generator"""
        rules = DerivativeRules([self._lambda_root(2)])
        assert rules.normalize((lam() ** 2).d()) == t(2).d()
        assert rules.normalize((lam() ** 2).dbar()) == t(2).dbar()

    def test_rules_apply_to_derivatives(self):
        """Test that rules rewrite derived generators"""
        rules = DerivativeRules()
        rules.add(derived(t(2), 0, 1), mu(2) * t(2).d())
        out = rules.normalize(t(2).dbar().d())
        assert out == (mu(2) * t(2).d()).d()

    def test_cubic_root_derivatives_commute(self):
        """Test that ∂ and ∂̄ of a cube root commute after reduction"""
        rules = DerivativeRules([self._lambda_root(3)])
        a = rules.normalize(rules.normalize(lam().d()).dbar())
        b = rules.normalize(rules.normalize(lam().dbar()).d())
        assert a == b

    def test_duplicate_rule_rejected(self):
        """Test that a second rule for the same generator fails"""
        rules = DerivativeRules()
        rules.add(derived(t(2), 0, 1), mu(2))
        with pytest.raises(Exception, match="already set"):
            rules.add(derived(t(2), 0, 1), mu(3))


class TestCodec:
    """Tests for the text, LaTeX and JSON codecs"""

    def test_zero_renders(self):
        """Test that zero renders as 0"""
        assert to_text(DiffPoly.zero()) == "0"
        assert to_latex(DiffPoly.zero()) == "0"

    def test_text_form(self):
        """Test the text form of a polynomial"""
        x = -HALF * h(2) * mu(2).d().d().d() + t(2)
        assert to_text(x) == "t2 - 1/2*h^2*d[3,0](mu2)"

    def test_latex_form(self):
        """Test the LaTeX form of a polynomial"""
        x = 2 * mu(2).d() * t(2)
        assert to_latex(x) == "2 t_{2} (\\partial \\mu_{2})"

    def test_json_is_canonical(self, poly_factory):
        """Test that JSON output is canonical"""
        for _ in range(50):
            x = poly_factory(with_lambda=True)
            assert from_json(to_json(x)) == x
            assert to_json(from_json(to_json(x))) == to_json(x)

    def test_json_jet_generator(self):
        """Test JSON encoding of jet generators"""
        x = jet(3) * jet(1) ** -1
        assert from_json(to_json(x)) == x
