import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from hrtlab import window as W
from hrtlab.config import unchecked, validate
from hrtlab.errors import NotApplicable, SingularBase, TailBoundTooLarge
from hrtlab.extension import (
    build_extension, det_identity_residual, eval_F, extension_vector, fhat, integral_F, symmetry_residual,
)
from hrtlab.checks import sampled_fourier

from reference import GAUSS_F, gauss_two_point_F

PI = math.pi
TWO = [(0, 0), (0, 1)]
THREE = [(0, 0), (0, 1), (1, 0)]


def g_explicit(t):
    return 2 ** 0.25 * np.exp(-PI * t * t)


def inner(a1, b1, a2, b2):
    """<M_{b1} T_{a1} g, M_{b2} T_{a2} g> for the unit Gaussian by scipy quad."""
    c = 0.5 * (a1 + a2)

    def f(t, part):
        v = g_explicit(t - a1) * g_explicit(t - a2) * np.exp(2j * PI * (b1 - b2) * t)
        return v.real if part == 0 else v.imag

    lo, hi = c - 8, c + 8
    re = integrate.quad(f, lo, hi, args=(0,), epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    im = integrate.quad(f, lo, hi, args=(1,), epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    return re + 1j * im


def F_by_quadrature(base, a, b):
    """F from inner products of shifted windows: u^H G^{-1} u with G_kl = <pi_k, pi_l>."""
    n = len(base)
    G = np.array([[inner(*base[k], *base[l]) for l in range(n)] for k in range(n)])
    u = np.array([inner(*base[k], a, b) for k in range(n)])
    return float(np.real(np.vdot(u, np.linalg.solve(G, u))))


@pytest.fixture(scope="module")
def e2(gauss):
    return build_extension(gauss, validate(TWO))


@pytest.fixture(scope="module")
def e3(gauss):
    return build_extension(gauss, validate(THREE))


def test_cosine_argument_resolved_by_oracle():
    F10 = F_by_quadrature(TWO, 1.0, 0.0)
    assert abs(F10 - GAUSS_F[(1.0, 0.0)]) < 1e-12
    pi_form = float(gauss_two_point_F(1.0, 0.0))
    plain_form = float(gauss_two_point_F(1.0, 0.0, cos_arg_scale=1.0))
    assert abs(pi_form - F10) < 1e-12
    assert abs(plain_form - F10) > 1e-3
    # the candidates coincide only on a = 0, so a nonzero even a also separates them
    assert abs(gauss_two_point_F(0.0, 0.3) - gauss_two_point_F(0.0, 0.3, cos_arg_scale=1.0)) < 1e-16
    f_pi, f_plain = gauss_two_point_F(2.0, 0.3), gauss_two_point_F(2.0, 0.3, cos_arg_scale=1.0)
    assert abs(f_pi - f_plain) > 1e-2 * f_pi


@pytest.mark.parametrize("key", sorted(GAUSS_F))
def test_two_point_values(e2, key):
    assert abs(eval_F(e2, *key).F - GAUSS_F[key]) < 1e-12


def test_value_at_half_frequency(e2):
    expected = math.exp(-PI / 4) * (2 - 2 * math.exp(-PI / 2)) / (1 - math.exp(-PI))
    assert abs(eval_F(e2, 0, 0.5).F - expected) < 1e-14
    assert abs(eval_F(e2, 0, 0.5).F - 0.7549397) < 1e-6
    assert abs(eval_F(e2, 2, 0).F - 3.488e-6) < 1e-9


def test_closed_form_on_grid(e2):
    A, B = np.meshgrid(np.linspace(-2, 2, 21), np.linspace(-1, 2, 21))
    assert np.abs(e2.values(A, B) - gauss_two_point_F(A, B)).max() <= 1e-8


def test_quadrature_F_on_coarse_grid(e2):
    for a in (-1.6, -0.4, 0.8, 2.0):
        for b in (-1.0, 0.25, 1.5):
            assert abs(F_by_quadrature(TWO, a, b) - float(gauss_two_point_F(a, b))) <= 1e-8


def test_build_examples(gauss):
    e = build_extension(gauss, validate(TWO))
    assert abs(e.det_base - (1 - math.exp(-PI))) < 1e-14
    L = np.tril(e.factor[0])
    assert np.abs(L @ L.conj().T - e.gram.entries).max() <= 1e-12
    build_extension(gauss, validate(THREE))
    with pytest.raises(SingularBase):
        build_extension(gauss, unchecked([(0, 0), (0, 1), (0, 0)]))


def test_extension_vector_examples(e2):
    u = extension_vector(e2, 0, 1)
    assert np.allclose(u, [math.exp(-PI / 2), 1], atol=1e-15)
    assert extension_vector(e2, 0, 0)[0] == 1
    for th in np.linspace(0, 2 * PI, 13):
        assert np.abs(extension_vector(e2, 10 * math.cos(th), 10 * math.sin(th))).max() < 1e-10


def test_extension_vector_second_form(e3):
    """u_k as a direct inner product, up to the conjugation fixed by the Gramian convention."""
    for a, b in ((0.3, -0.4), (1.2, 0.9)):
        u = extension_vector(e3, a, b)
        direct = np.array([inner(ak, bk, a, b) for ak, bk in THREE])
        assert np.abs(u - direct).max() < 1e-12


@pytest.mark.parametrize("wname", ["gauss", "expw"])
@pytest.mark.parametrize("base", [TWO, THREE])
def test_base_points_pinned(request, wname, base):
    e = build_extension(request.getfixturevalue(wname), validate(base))
    for a, b in base:
        assert abs(eval_F(e, a, b).F - 1) <= 1e-9


def test_det_identity_examples(e2):
    assert det_identity_residual(e2, 0, 1) <= 1e-9
    assert det_identity_residual(e2, 1, 1) <= 1e-9
    rng = np.random.default_rng(3)
    for a, b in rng.uniform(-2, 2, (50, 2)):
        assert det_identity_residual(e2, a, b) <= 1e-8


def test_integral_examples(gauss, e2, e3):
    assert abs(integral_F(e2, 6, 0.02).value - 2) <= 2e-3
    assert abs(integral_F(e3, 6, 0.02).value - 3) <= 5e-3
    e1 = build_extension(gauss, validate([(0, 0)]))
    assert abs(integral_F(e1, 6, 0.02).value - 1) <= 2e-3


def test_integral_needs_certified_tail(ratw, expw):
    for g in (ratw, expw):
        e = build_extension(g, validate(THREE))
        with pytest.raises(TailBoundTooLarge) as info:
            integral_F(e, 6, 0.05)
        assert info.value.value > 0


def test_integral_tail_too_large_for_small_box(e2):
    with pytest.raises(TailBoundTooLarge):
        integral_F(e2, 1.0, 0.05)


def test_fhat_examples(e2, e3):
    assert abs(fhat(e2, 0.5, -0.5) - sampled_fourier(e2, 0.5, -0.5)) <= 1e-4
    assert abs(fhat(e2, 0, 0) - integral_F(e2, 6, 0.02).value) <= 5e-3
    X, Y = np.meshgrid(np.linspace(-3, 3, 31), np.linspace(-3, 3, 31))
    for e in (e2, e3):
        assert np.abs(fhat(e, X, Y)).max() <= e.inv_abs_sum


def test_fhat_matches_integral_at_origin(e3):
    assert abs(fhat(e3, 0, 0) - 3) < 1e-9


def test_symmetry_examples(e2):
    assert symmetry_residual(e2, 1, 0.3) <= 1e-9
    assert symmetry_residual(e2, 2, 0.5) <= 1e-9
    for a in (-2, -1, 0, 1, 2):
        for b in (-0.7, 0.3, 1.4):
            assert symmetry_residual(e2, a, b) <= 1e-9


def test_symmetry_not_applicable(e3):
    cplx = W.sampled(-1.0, 0.5, [0, 1, 1j, 1, 0])
    with pytest.raises(NotApplicable):
        symmetry_residual(build_extension(cplx, validate(TWO)), 1, 0.3)
    with pytest.raises(NotApplicable):
        symmetry_residual(e3, 1, 0.3)
    e2 = build_extension(W.gaussian(), validate(TWO))
    with pytest.raises(NotApplicable):
        symmetry_residual(e2, 0.5, 0.3)


@given(st.floats(-4, 4), st.floats(-4, 4), st.sampled_from(["gaussian", "two_sided_exp", "rational"]))
def test_range_and_realness(a, b, kind):
    e = build_extension(W.make_window(W.WindowSpec(kind=kind)), validate(THREE))
    v = eval_F(e, a, b)
    assert -1e-9 <= v.F <= 1 + 1e-9
    assert abs(v.imag) <= 1e-11
    assert v.solve_residual <= 1e-11


def test_decay_on_far_circle(e3):
    th = np.linspace(0, 2 * PI, 721)
    assert e3.values(8 * np.cos(th), 8 * np.sin(th)).max() < 1e-10


def test_continuity_probe(e3):
    h = 0.01
    t = np.arange(-3, 3 + h / 2, h)
    A, B = np.meshgrid(t, t)
    F = e3.values(A, B)
    C = max(np.abs(np.diff(F, axis=0)).max(), np.abs(np.diff(F, axis=1)).max()) / h
    # halving the spacing cannot expose a steeper slope than the coarse estimate allows
    fine = e3.values(A + h / 2, B) - F
    assert np.abs(fine).max() <= C * h / 2 * 1.05


@given(st.permutations(range(3)), st.floats(-3, 3), st.floats(-3, 3))
def test_permutation_invariance(order, a, b):
    g = W.gaussian()
    e = build_extension(g, validate(THREE))
    ep = build_extension(g, validate(THREE).permuted(order))
    assert abs(eval_F(e, a, b).F - eval_F(ep, a, b).F) < 1e-12


def test_vectorized_matches_pointwise(e3):
    a = np.array([0.1, -1.2, 2.5])
    b = np.array([0.4, 0.9, -2.0])
    vals = e3.values(a, b)
    for i in range(3):
        assert abs(vals[i] - eval_F(e3, a[i], b[i]).F) < 1e-15
