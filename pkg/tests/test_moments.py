import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfr_af.errors import InvalidMoments, NonFiniteValue
from rfr_af.moments import ActivationSpec, Moments, compute_moments, functional_norms, parse_af

# Reference values from 50-digit adaptive quadrature (tests/oracles.py).
RELU = (0.39894228040143267794, 0.5, 0.5)
TANH = (0.0, 0.60570550960215882558, 0.39429449039784117442)
CLIP1 = (0.0, 0.68268949213708589717, 0.51605855096171330040)
SHIFTED_RELU1 = (0.083315470587686298383, 0.15865525393145705141, 0.075339783343770753032)
SATLIN = (0.5, 0.47164568875581053229, 0.55306439643031737377)  # 0.5 + 2 clip(x, -0.3, 0.3)
TANH_NORMS = (0.60570550960215882558, 0.68147113104537909103)


def _triple(m):
    return np.array([m.mu0, m.mu1, m.mu2])


class TestComputeMoments:
    @pytest.mark.parametrize(
        "af, expected",
        [
            (ActivationSpec.relu(), RELU),
            (ActivationSpec.tanh(), TANH),
            (ActivationSpec.saturated_linear(0.0, 1.0, 1.0), CLIP1),
            (ActivationSpec.shifted_relu(1.0), SHIFTED_RELU1),
            (ActivationSpec.saturated_linear(0.5, 2.0, 0.3), SATLIN),
        ],
    )
    def test_reference_values(self, af, expected):
        np.testing.assert_allclose(_triple(compute_moments(af)), expected, rtol=0, atol=1e-12)

    def test_relu_derived(self):
        m = compute_moments(ActivationSpec.relu())
        assert m.mu_star_sq == pytest.approx(0.25 - 1 / (2 * math.pi), abs=1e-13)
        assert m.zeta_sq == pytest.approx(0.25 / (0.25 - 1 / (2 * math.pi)), rel=1e-12)

    def test_linear_is_exactly_linear(self):
        m = compute_moments(ActivationSpec.linear(2.0, -1.0))
        assert m.mu_star_sq == 0.0
        assert math.isinf(m.zeta_sq)
        np.testing.assert_allclose(_triple(m), (-1.0, 2.0, 5.0), atol=1e-13)

    def test_constant_has_zero_ratio(self):
        m = compute_moments(ActivationSpec.linear(0.0, 3.0))
        assert m.mu_star_sq == 0.0 and m.zeta_sq == 0.0

    def test_quadratic_hand_value(self):
        m = compute_moments(ActivationSpec.quadratic(0.70710678, 1.0, -0.70710678))
        assert m.mu2 == pytest.approx(2.0, abs=1e-7)

    def test_node_doubling_is_stable(self):
        for af in (ActivationSpec.relu(), ActivationSpec.tanh(), ActivationSpec.shifted_relu(-0.7)):
            a, b = compute_moments(af, 201), compute_moments(af, 402)
            np.testing.assert_allclose(_triple(a), _triple(b), atol=1e-12)

    def test_tabulated_matches_builtin(self):
        tab = ActivationSpec.tabulated(np.tanh, lambda x: 1 / np.cosh(x) ** 2)
        np.testing.assert_allclose(_triple(compute_moments(tab)), TANH, atol=1e-12)

    def test_non_finite_values_raise(self):
        bad = ActivationSpec.tabulated(lambda x: np.where(x > 5, np.nan, x), lambda x: np.ones_like(x))
        with pytest.raises(NonFiniteValue):
            compute_moments(bad)

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            compute_moments(ActivationSpec.relu(), nodes=5)

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(-3, 3),
        b=st.floats(-3, 3),
        c=st.floats(-3, 3),
    )
    def test_quadratic_closed_form(self, a, b, c):
        m = compute_moments(ActivationSpec.quadratic(a, b, c))
        expected = (a + c, b, 3 * a * a + b * b + c * c + 2 * a * c)
        np.testing.assert_allclose(_triple(m), expected, atol=1e-11)
        assert m.mu_star_sq == pytest.approx(2 * a * a, abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(k=st.floats(0.1, 5), shift=st.floats(-5, 5))
    def test_affine_map_scales_nonlinearity(self, k, shift):
        base = compute_moments(ActivationSpec.tanh())
        tab = ActivationSpec.tabulated(lambda x: k * np.tanh(x) + shift, lambda x: k / np.cosh(x) ** 2)
        m = compute_moments(tab)
        assert m.mu0 == pytest.approx(shift, abs=1e-11)
        assert m.mu1 == pytest.approx(k * base.mu1, rel=1e-11)
        assert m.mu_star_sq == pytest.approx(k * k * base.mu_star_sq, rel=1e-9)


class TestNorms:
    def test_relu(self):
        np.testing.assert_allclose(functional_norms(ActivationSpec.relu()), (0.5, math.sqrt(0.5)), atol=1e-12)

    def test_tanh(self):
        np.testing.assert_allclose(functional_norms(ActivationSpec.tanh()), TANH_NORMS, atol=1e-12)

    def test_quadratic(self):
        n1, n2 = functional_norms(ActivationSpec.quadratic(1.0, 1.0, 0.0))
        assert n2 == pytest.approx(math.sqrt(5.0), rel=1e-12)


class TestMomentsType:
    def test_from_triple_rejects_cauchy_schwarz_violation(self):
        with pytest.raises(InvalidMoments):
            Moments.from_triple(0.0, 1.0, 0.5)

    def test_from_components_round_trip(self):
        m = Moments.from_components(0.3, -1.2, 0.4)
        n = Moments.from_triple(m.mu0, m.mu1, m.mu2)
        assert n.mu_star_sq == pytest.approx(0.4, rel=1e-14)
        assert n.zeta_sq == pytest.approx(1.44 / 0.4, rel=1e-13)

    def test_negative_mu_star_rejected(self):
        with pytest.raises(InvalidMoments):
            Moments.from_components(0.0, 1.0, -0.1)


class TestParse:
    @pytest.mark.parametrize(
        "text, kind, params",
        [
            ("relu", "relu", ()),
            ("TANH", "tanh", ()),
            ("linear:2,1", "linear", (2.0, 1.0)),
            ("quadratic:1,2,3", "quadratic", (1.0, 2.0, 3.0)),
            ("satlin:0.5,2,0.3", "saturated-linear", (0.5, 2.0, 0.3)),
            ("shifted-relu:1", "shifted-relu", (1.0, 1.0, 0.0)),
            ("shifted-relu:1,2,3", "shifted-relu", (1.0, 2.0, 3.0)),
        ],
    )
    def test_forms(self, text, kind, params):
        af = parse_af(text)
        assert af.kind == kind and af.params == params

    @pytest.mark.parametrize("text", ["bogus", "linear:1", "quadratic:a,b,c", "relu:1", "satlin:1,2"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_af(text)

    def test_describe_round_trip(self):
        for af in (ActivationSpec.quadratic(0.1, -2.0, 1e-3), ActivationSpec.saturated_linear(1.0, 2.0, 0.25)):
            assert parse_af(af.describe()) == af
