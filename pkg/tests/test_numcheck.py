"""
Tests for numeric bindings, patch evaluation and the curvature scaling fit.
"""

import json
from fractions import Fraction

import numpy as np
import pytest

from src.config import NumcheckSettings
from src.diffalg import DiffPoly, h, lam, mu, t
from src.errors import BindingError
from src.numcheck import (
    BoundFunction,
    PatchEvaluator,
    SampleBinding,
    evaluate,
    fit_slope,
    grid_patch,
    residual_scaling,
    system_connection,
)
from src.wkb import generic_system, rational_expand, solve_mu_higher

Z = BoundFunction.polynomial({(1, 0): 1})
ZBAR = BoundFunction.polynomial({(0, 1): 1})


def n2_binding(mu_first: BoundFunction) -> SampleBinding:
    """t = 1, t⁽¹⁾ = z̄, μ = 0; higher μ orders unbound (zero)."""
    return SampleBinding(
        functions={
            "t2": BoundFunction.constant(1),
            "t2_1": ZBAR,
            "mu2": BoundFunction.constant(0),
            "mu2_1": mu_first,
        },
        unbound="zero",
    )


class TestBinding:
    """Tests for sample bindings"""

    def test_polynomial_jets(self):
        """Test the jets of a polynomial binding"""
        fn = BoundFunction.polynomial({(2, 1): 3})
        z = np.array([1 + 1j])
        assert np.allclose(fn.poly_jet(0, 0, z), 3 * z**2 * np.conj(z))
        assert np.allclose(fn.poly_jet(1, 0, z), 6 * z * np.conj(z))
        assert np.allclose(fn.poly_jet(1, 1, z), 6 * z)
        assert np.allclose(fn.poly_jet(3, 0, z), 0)

    def test_number_shorthand(self):
        """Test that a bare number binds a constant function"""
        binding = SampleBinding.model_validate({"functions": {"t2": 2}})
        assert evaluate(t(2), binding, 5 + 1j, 0.1) == pytest.approx(2)

    def test_load_json(self, tmp_path):
        """Test loading a binding from JSON"""
        path = tmp_path / "binding.json"
        path.write_text(
            json.dumps({"functions": {"t2": {"terms": [{"z": 2, "re": 1.0}]}}, "unbound": "zero"})
        )
        binding = SampleBinding.load(path)
        assert binding.unbound == "zero"
        assert evaluate(t(2), binding, 2, 1.0) == pytest.approx(4)

    def test_load_rejects_bad_file(self, tmp_path):
        """Test that an invalid binding file is rejected"""
        path = tmp_path / "binding.json"
        path.write_text(json.dumps({"functions": {"t2": {"kind": "cube"}}}))
        with pytest.raises(BindingError):
            SampleBinding.load(path)

    def test_load_missing_file(self, tmp_path):
        """Test that a missing binding file is rejected"""
        with pytest.raises(BindingError):
            SampleBinding.load(tmp_path / "absent.json")

    def test_default_patch(self):
        """Test the default sample patch"""
        points = grid_patch(NumcheckSettings())
        assert points.shape == (25,)
        assert np.isclose(points.mean(), 1.0)


class TestEvaluate:
    """Tests for numerical evaluation"""

    def test_generator_value(self):
        """Test evaluating a bound generator"""
        binding = SampleBinding(functions={"t2": BoundFunction.polynomial({(2, 0): 1})})
        assert evaluate(t(2), binding, 1 + 0j, 0.5) == pytest.approx(1.0)

    def test_h_power(self):
        """Test evaluating an integer power of h"""
        binding = SampleBinding(functions={"t2": BoundFunction.polynomial({(2, 0): 1})})
        assert evaluate(h(1) * t(2), binding, 1 + 0j, 0.1) == pytest.approx(0.1)

    def test_fractional_h_power(self):
        """Test evaluating a fractional power of h"""
        binding = SampleBinding(functions={})
        assert evaluate(h(Fraction(1, 2)), binding, 0j, 0.25) == pytest.approx(0.5)

    def test_sqrt_branch_log_derivative(self):
        """Test the logarithmic derivative of a square-root binding"""
        binding = SampleBinding(functions={"lam": BoundFunction(kind="sqrt", terms=Z.terms)})
        assert evaluate(lam().d() * lam() ** -1, binding, 1 + 0j, 1.0) == pytest.approx(0.5)

    def test_sqrt_branch_second_derivative(self):
        """Test the second derivative of a square-root binding"""
        binding = SampleBinding(functions={"lam": BoundFunction(kind="sqrt", terms=Z.terms)})
        # (z^{1/2})'' = −z^{−3/2}/4
        assert evaluate(lam().d().d(), binding, 4 + 0j, 1.0) == pytest.approx(-1 / 32)

    def test_inverse_branch(self, invertible_u):
        """Test derivatives of an inverse binding"""
        binding = SampleBinding(functions={"u": BoundFunction(kind="inv", terms=Z.terms)})
        assert evaluate(invertible_u, binding, 2 + 0j, 1.0) == pytest.approx(0.5)
        assert evaluate(invertible_u.d(), binding, 2 + 0j, 1.0) == pytest.approx(-0.25)

    def test_analytic_derivative(self):
        """Test that derivatives of polynomial bindings are exact"""
        binding = SampleBinding(functions={"t2": BoundFunction.polynomial({(2, 0): 1})})
        z = 1 + 1j
        assert evaluate((t(2) ** 2).d(), binding, z, 1.0) == pytest.approx(4 * z**3)

    def test_unbound_generator(self):
        """Test that an unbound generator is rejected"""
        with pytest.raises(BindingError):
            evaluate(mu(2), SampleBinding(functions={}), 1 + 0j, 1.0)

    def test_unbound_as_zero(self):
        """Test that unbound generators can evaluate to zero"""
        binding = SampleBinding(functions={"t2": BoundFunction.constant(3)}, unbound="zero")
        assert evaluate(t(2) + mu(2), binding, 1 + 0j, 1.0) == pytest.approx(3)

    def test_epsilon_guard(self, invertible_u):
        """Test that inverting a near-zero value is rejected"""
        binding = SampleBinding(functions={"u": Z})
        with pytest.raises(BindingError):
            evaluate(invertible_u**-1, binding, 0j, 1.0)

    def test_nonpositive_h(self):
        """Test that a nonpositive h is rejected"""
        with pytest.raises(BindingError):
            evaluate(t(2), SampleBinding(functions={"t2": Z}), 1 + 0j, 0.0)

    def test_ring_homomorphism(self, poly_factory):
        """Test that evaluation respects sums and products"""
        binding = SampleBinding(
            functions={
                "t2": BoundFunction.polynomial({(2, 0): 1, (0, 1): 0.5}),
                "t3": BoundFunction.polynomial({(1, 1): -1, (0, 0): 2}),
                "mu2": BoundFunction.polynomial({(0, 2): 0.25j}),
                "mu3": BoundFunction.polynomial({(3, 0): 1, (1, 0): -1}),
            }
        )
        ev = PatchEvaluator(binding, grid_patch(NumcheckSettings()))
        for _ in range(10):
            x, y = poly_factory(), poly_factory()
            vx, vy = ev(x, 0.3), ev(y, 0.3)
            assert np.allclose(ev(x * y, 0.3), vx * vy, rtol=1e-10, atol=1e-10)
            assert np.allclose(ev(x + y, 0.3), vx + vy, rtol=1e-10, atol=1e-10)

    def test_symbolic_zero_is_numeric_zero(self):
        """Test that a symbolic zero evaluates to zero"""
        binding = SampleBinding(functions={"t2": BoundFunction.polynomial({(2, 1): 1})})
        x = (t(2) * t(2).d()).dbar() - t(2).dbar() * t(2).d() - t(2) * t(2).d().dbar()
        assert x == DiffPoly.zero()
        assert abs(evaluate(x, binding, 1 + 1j, 1.0)) < 1e-10


class TestResidualScaling:
    """Tests for residual scaling in h"""

    def test_fit_slope(self):
        """Test fitting the slope of a power law"""
        hs = [1e-1, 1e-2, 1e-3]
        assert fit_slope(hs, [x**3 for x in hs]) == pytest.approx(3.0)

    def test_fit_needs_three_points(self):
        """Test that the fit needs at least three h values"""
        with pytest.raises(BindingError):
            fit_slope([1e-1, 1e-2], [1.0, 0.1])

    def test_solved_binding(self):
        """Test the predicted slope for a solved binding"""
        sys = generic_system(2, 3)
        state = solve_mu_higher(rational_expand(sys, 1), 3)
        binding = n2_binding(BoundFunction.polynomial({(1, 0): 0.5}))
        report = residual_scaling(system_connection(sys), binding, 3, rules=state.rules)
        assert report.passed
        assert not report.skipped
        assert report.predicted_slope == 4
        assert report.slope == pytest.approx(4.0, abs=0.2)
        assert report.operational_bound == pytest.approx(2.5)
        assert max(report.rule_residuals.values()) < 1e-10

    def test_unsolved_binding_loses_an_order(self):
        """Test that an unsolved binding loses one order"""
        sys = generic_system(2, 3)
        state = solve_mu_higher(rational_expand(sys, 1), 3)
        binding = n2_binding(BoundFunction.constant(0))
        report = residual_scaling(system_connection(sys), binding, 3, rules=state.rules)
        assert report.predicted_slope == 3
        assert report.slope == pytest.approx(3.0, abs=0.2)
        assert report.rule_residuals["d[1,0](mu2_1)"] == pytest.approx(0.5)

    def test_flat_binding_skips_fit(self):
        """Test that a flat binding skips the fit"""
        sys = generic_system(2, 2)
        binding = SampleBinding(functions={"t2": Z}, unbound="zero")
        report = residual_scaling(system_connection(sys), binding, 2)
        assert report.skipped
        assert report.passed
        assert report.slope is None
        assert max(report.norms) < 1e-10

    def test_short_h_grid(self):
        """Test that a short h grid is rejected"""
        sys = generic_system(2, 2)
        binding = SampleBinding(functions={"t2": Z}, unbound="zero", h_grid=[0.1, 0.01])
        with pytest.raises(BindingError):
            residual_scaling(system_connection(sys), binding, 2)
