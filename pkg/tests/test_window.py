import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from hrtlab import window as W
from hrtlab.errors import InvalidSpec, ZeroWindow


def l2_norm_sq(w, lo, hi, points=()):
    f = lambda t: abs(complex(w(t))) ** 2  # noqa: E731
    if math.isinf(lo) or math.isinf(hi):
        return integrate.quad(f, lo, hi, limit=2000, epsabs=1e-14, epsrel=1e-13)[0]
    pts = sorted(p for p in set(points) | {0.0} if lo < p < hi)
    return integrate.quad(f, lo, hi, points=pts or None, limit=2000, epsabs=1e-14, epsrel=1e-13)[0]


def test_gaussian_is_already_unit_norm():
    w = W.gaussian()
    assert w.norm_factor == 1.0
    assert w(0.0) == pytest.approx(2 ** 0.25, abs=1e-15)
    assert abs(complex(w(0.0)) - 1.189207115002721) < 1e-14


def test_two_sided_exp_unit_norm_by_quadrature():
    w = W.two_sided_exp()
    assert w.norm_factor == 1.0
    # oracle: integral of e^{-2|t|} is 1
    assert abs(integrate.quad(lambda t: math.exp(-2 * abs(t)), -np.inf, np.inf)[0] - 1) < 1e-12


def test_rational_value_at_zero():
    w = W.rational()
    assert abs(complex(w(0.0)) - 2 ** -0.5) < 1e-15
    assert w.is_real


def test_all_zero_sampled_window_rejected():
    with pytest.raises(ZeroWindow):
        W.sampled(0.0, 0.1, [0.0] * 5)


@pytest.mark.parametrize("spec", [
    W.WindowSpec.sampled(0.0, 0.1, [1.0]),
    W.WindowSpec.sampled(0.0, -0.1, [1.0, 2.0]),
    W.WindowSpec.hermite([]),
    W.WindowSpec.hermite([0.0, 0.0]),
    W.WindowSpec(kind="gaussian", scale=-1.0),
    W.WindowSpec(kind="triangle"),
])
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpec):
        W.make_window(spec)


@pytest.mark.parametrize("make", [
    lambda: W.gaussian(),
    lambda: W.gaussian(scale=0.6),
    lambda: W.two_sided_exp(),
    lambda: W.two_sided_exp(scale=2.0),
    lambda: W.hermite([1.0, -0.5, 0.25]),
    lambda: W.hermite([0.0, 1.0], scale=1.7),
    lambda: W.sampled(-1.0, 0.25, [0, 0.3, 1.0, 0.8 + 0.2j, 0.4, 0.1, 0, 0.05, 0]),
])
def test_unit_norm_on_support(make):
    w = make()
    T = w.support_radius
    brk = list(w.breakpoints) if w.kind == W.SAMPLED else []
    assert abs(l2_norm_sq(w, -T, T, brk) - 1) <= max(w.trunc_tol, 1e-10)


def test_rational_norm_on_support():
    w = W.rational(trunc_tol=1e-6)
    T = w.support_radius
    assert T == pytest.approx(1e6 - 1)
    # substitution keeps the long tail tractable: int_0^T (1/2)/(1+t)^2 dt, doubled
    half = integrate.quad(lambda t: 0.5 / (1 + t) ** 2, 0, T, points=[1, 10, 100, 1e3, 1e4, 1e5], limit=500)[0]
    assert abs(2 * half - 1) <= 1e-6 + 1e-12


def test_hermite_degree_zero_is_the_gaussian():
    t = np.linspace(-3, 3, 41)
    assert np.allclose(W.hermite([1.0])(t), W.gaussian()(t), atol=1e-15)


def test_hermite_functions_orthonormal():
    t, w = np.polynomial.legendre.leggauss(200)
    t, w = 6 * t, 6 * w
    H = W.hermite_functions(t, 6)
    gram = (H * w) @ H.T
    assert np.allclose(gram, np.eye(7), atol=1e-12)


def test_sampled_is_zero_outside_grid_and_interpolates_nodes():
    vals = [0.0, 1.0, 2.0, 1.0, 0.0]
    w = W.sampled(0.0, 0.5, vals)
    nodes = np.arange(5) * 0.5
    assert np.allclose(w(nodes) / w.norm_factor, vals, atol=1e-14)
    assert w(-0.01) == 0 and w(2.01) == 0


def test_sampled_complex_is_not_real():
    assert not W.sampled(0.0, 0.5, [0, 1j, 0]).is_real
    assert W.sampled(0.0, 0.5, [0, 1, 0]).is_real


def test_far_values_below_tail_bound():
    for w in (W.gaussian(), W.two_sided_exp(), W.hermite([0.3, 1.0])):
        t = w.support_radius * np.array([1.5, 2, 5])
        assert np.all(np.abs(w(t)) < math.sqrt(w.trunc_tol))
        assert np.all(np.abs(w(-t)) < math.sqrt(w.trunc_tol))


def test_tail_radius_bounds_l1_tail():
    for w in (W.gaussian(), W.two_sided_exp(scale=0.7), W.hermite([1.0, 0.0, 0.5])):
        eps = 1e-9
        T = w.tail_radius(eps)
        tail = 2 * integrate.quad(lambda t: abs(complex(w(t))), T, np.inf, epsabs=1e-15)[0]
        assert tail <= eps * 1.01
    assert W.rational().tail_radius(1e-3) == math.inf


@given(st.floats(-20, 20), st.sampled_from(["gaussian", "exp", "rational"]))
def test_eval_is_pure_and_real_for_analytic(t, kind):
    w = W.make_window(W.WindowSpec(kind=W.canonical_kind(kind)))
    v1, v2 = complex(w(t)), complex(w(t))
    assert v1 == v2
    assert v1.imag == 0.0


def test_make_window_deterministic():
    s = W.WindowSpec.hermite([0.2, 0.7, -0.1], scale=1.3)
    a, b = W.make_window(s), W.make_window(s)
    assert a.norm_factor == b.norm_factor and a.support_radius == b.support_radius


def test_dilation_preserves_norm():
    w = W.two_sided_exp(scale=3.0)
    assert abs(l2_norm_sq(w, -np.inf, np.inf) - 1) < 1e-10
