"""Short-time Fourier transform V_g f(x, y) = int f(t) conj(g(t-x)) e^{-2 pi i y t} dt.

Three evaluation routes:

* closed forms for the autocorrelation V_g g of the analytic windows
  (Gaussian, two-sided exponential, rational decay), any common scale;
* adaptive Gauss-Kronrod panel quadrature for a single point (``stft``
  with ``method="quadrature"``; the independent reference path);
* fixed composite Gauss-Legendre nodes for batches (``stft_batch``), used
  when no closed form applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import exp1

from . import window as W
from .errors import QuadratureFailure
from .quadrature import QuadratureSpec, composite_gauss, initial_edges, integrate

__all__ = [
    "TFPoint",
    "stft",
    "stft_batch",
    "stft_gauss_closed",
    "autocorr",
    "has_closed_form",
    "inner_product",
    "covariance_residual",
    "orthogonality_residual",
    "ft_product_residual",
]

_TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class TFPoint:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("time-frequency point must be finite")

    def __iter__(self):
        yield self.a
        yield self.b


# --- closed forms (unit scale) ---------------------------------------------

def stft_gauss_closed(a, b):
    """V_g g for g(t) = 2^{1/4} e^{-pi t^2}: e^{-pi i ab} e^{-pi a^2/2} e^{-pi b^2/2}."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.exp(-1j * math.pi * a * b) * np.exp(-0.5 * math.pi * (a * a + b * b))
    return out[()] if out.ndim == 0 else out


def _reflect(kernel_pos):
    """Extend a kernel known for x >= 0 using V(-x, y) = e^{2 pi i x y} V(x, y)."""

    def kernel(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        ax = np.abs(x)
        v = kernel_pos(ax, y)
        neg = x < 0
        return np.where(neg, np.exp(1j * _TWO_PI * ax * y) * v, v)

    return kernel


def _two_sided_exp_pos(x, y):
    # pieces (-inf,0], [0,x], [x,inf) of e^{-|t|} e^{-|t-x|} e^{-i w t}
    w = _TWO_PI * y
    left = 1.0 / (2.0 - 1j * w)
    middle = x * np.exp(-1j * math.pi * x * y) * np.sinc(x * y)
    right = np.exp(-1j * w * x) / (2.0 + 1j * w)
    return np.exp(-x) * (left + middle + right)


_GL48 = np.polynomial.legendre.leggauss(48)


def _q(sigma, a):
    """int_a^inf e^{i sigma u} / u du = E1(-i sigma a), sigma != 0."""
    return exp1(-1j * sigma * a)


def _ravg(sigma, x):
    """(1/x) int_1^{1+x} e^{i sigma u} / u du, continuous at x = 0."""
    out = np.empty(np.broadcast(sigma, x).shape, dtype=complex)
    sigma, x = np.broadcast_arrays(sigma, x)
    short = (x <= 1.0) & (np.abs(sigma) * x <= 60.0)
    if short.any():
        xs, ss = x[short], sigma[short]
        nodes, weights = _GL48
        u = 1.0 + 0.5 * xs[:, None] * (1.0 + nodes[None, :])
        out[short] = (np.exp(1j * ss[:, None] * u) / u) @ (0.5 * weights)
    long_ = ~short
    if long_.any():
        xl, sl = x[long_], sigma[long_]
        zero = sl == 0
        val = np.empty(xl.shape, dtype=complex)
        val[zero] = np.log1p(xl[zero]) / xl[zero]
        nz = ~zero
        val[nz] = (_q(sl[nz], 1.0) - _q(sl[nz], 1.0 + xl[nz])) / xl[nz]
        out[long_] = val
    return out


def _rational_pos(x, y):
    # g(t) = 2^{-1/2}/(1+|t|); partial fractions on (-inf,0], [0,x], [x,inf)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    w = _TWO_PI * y
    out = np.empty(x.shape, dtype=complex)
    zero = w == 0
    if zero.any():
        xz = x[zero]
        with np.errstate(invalid="ignore", divide="ignore"):
            side = np.where(xz > 0, np.log1p(xz) / np.where(xz > 0, xz, 1.0), 1.0)
        out[zero] = 0.5 * (2 * side + 2 * np.log1p(xz) / (2 + xz))
    nz = ~zero
    if nz.any():
        xn, wn, yn = x[nz], w[nz], y[nz]
        s = 1j * wn * np.exp(-1j * math.pi * xn * yn) * np.sinc(xn * yn)
        rp = _ravg(wn, xn)
        rm = _ravg(-wn, xn)
        e_m = np.exp(-1j * wn)
        e_p = np.exp(1j * wn)
        e_mx = np.exp(-1j * wn * (1.0 + xn))
        i1 = e_m * _q(wn, 1.0) * s + e_mx * rp
        i3 = -e_p * _q(-wn, 1.0) * s + e_p * rm
        i2 = xn / (2.0 + xn) * (e_p * rm + e_mx * rp)
        out[nz] = 0.5 * (i1 + i2 + i3)
    return out


_two_sided_exp_kernel = _reflect(_two_sided_exp_pos)
_rational_kernel = _reflect(_rational_pos)

_KERNELS: dict[str, Callable] = {
    W.GAUSSIAN: stft_gauss_closed,
    W.TWO_SIDED_EXP: _two_sided_exp_kernel,
    W.RATIONAL: _rational_kernel,
}


def has_closed_form(f: W.Window, g: W.Window) -> bool:
    return f.spec == g.spec and f.kind in _KERNELS


def autocorr(g: W.Window, x, y):
    """V_g g on arrays (broadcast), closed form when available."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if g.kind in _KERNELS:
        s = g.scale
        return np.asarray(_KERNELS[g.kind](x / s, y * s), dtype=complex)
    return stft_batch(g, g, x, y)


# --- quadrature ------------------------------------------------------------

def _adaptive_stft(fcall, f_lo, f_hi, f_breaks, g: W.Window, x: float, y: float, q: QuadratureSpec) -> complex:
    eps = q.abs_tol / 4
    tg = g.tail_radius(eps / getattr(fcall, "sup_norm", 1.0))
    lo, hi = max(f_lo, x - tg), min(f_hi, x + tg)
    if not lo < hi:
        return 0j
    breaks = list(f_breaks) + list(x + g.breakpoints)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        if y != 0:
            raise QuadratureFailure("oscillatory integrand on an unbounded interval")
        max_width = math.inf
    else:
        max_width = 1.0 / (q.oscillation_guard * abs(y)) if y else math.inf
        # at least 8 initial panels so a narrow peak cannot fool both rules
        max_width = min(max_width, (hi - lo) / 8)
        n0 = len(initial_edges(lo, hi, breaks, max_width)) - 1
        if n0 > q.max_panels:
            raise QuadratureFailure(f"{n0} panels needed to resolve the oscillation; budget {q.max_panels}")

    def integrand(t):
        return fcall(t) * np.conj(g(t - x)) * np.exp(-1j * _TWO_PI * y * t)

    sub = QuadratureSpec(abs_tol=q.abs_tol / 2, max_panels=q.max_panels, oscillation_guard=q.oscillation_guard)
    return integrate(integrand, lo, hi, sub, breaks, max_width)


def _stft_quadrature(f: W.Window, g: W.Window, x: float, y: float, q: QuadratureSpec) -> complex:
    eps = q.abs_tol / 4
    tf = f.tail_radius(eps / g.sup_norm)
    return _adaptive_stft(f, -tf, tf, f.breakpoints, g, x, y, q)


def stft(f: W.Window, g: W.Window, x: float, y: float, q: QuadratureSpec | None = None,
         method: str = "auto") -> complex:
    """V_g f(x, y) to within ``q.abs_tol``.

    ``method="auto"`` uses the closed form when f and g are the same analytic
    window; ``"quadrature"`` forces adaptive panel quadrature.
    """
    q = q or QuadratureSpec()
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and has_closed_form(f, g):
        return complex(autocorr(g, x, y))
    return _stft_quadrature(f, g, float(x), float(y), q)


def _base_width(w: W.Window) -> float:
    if w.kind == W.SAMPLED:
        return w.spec.grid_step
    if w.kind == W.HERMITE:
        return 0.25 * w.scale / math.sqrt(w.spec.degree + 1)
    return 0.25 * w.scale


def stft_batch(f: W.Window, g: W.Window, x, y, order: int = 16, tol: float = 1e-13) -> np.ndarray:
    """V_g f on broadcast arrays ``x``, ``y``.

    Closed forms when available; otherwise, per distinct x, a composite
    Gauss-Legendre rule with panels split at the windows' breakpoints and
    at most a third of an oscillation period wide.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if has_closed_form(f, g):
        return autocorr(g, x, y)
    out = np.empty(x.shape, dtype=complex)
    xs = x.ravel()
    ys = y.ravel()
    flat = out.reshape(-1)
    ux, inverse = np.unique(xs, return_inverse=True)
    width0 = min(_base_width(f), _base_width(g))
    eps = tol / 4
    tf = f.tail_radius(eps / g.sup_norm)
    tg = g.tail_radius(eps / f.sup_norm)
    for i, xv in enumerate(ux):
        idx = np.nonzero(inverse == i)[0]
        yv = ys[idx]
        lo, hi = max(-tf, xv - tg), min(tf, xv + tg)
        if not lo < hi:
            flat[idx] = 0
            continue
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise QuadratureFailure("no closed form and unbounded support for this window pair")
        ymax = float(np.abs(yv).max())
        width = width0 if ymax == 0 else min(width0, 1.0 / (3.0 * ymax))
        breaks = list(f.breakpoints) + list(xv + g.breakpoints)
        edges = initial_edges(lo, hi, breaks, width)
        t, wts = composite_gauss(edges, order)
        prod = wts * f(t) * np.conj(g(t - xv))
        flat[idx] = np.exp(-1j * _TWO_PI * np.outer(yv, t)) @ prod
    return out


def inner_product(f: W.Window, g: W.Window, q: QuadratureSpec | None = None) -> complex:
    """<f, g> = int f conj(g) = V_g f(0, 0)."""
    return stft(f, g, 0.0, 0.0, q, method="quadrature")


# --- identities ------------------------------------------------------------

class _Shifted:
    """T_a M_b f as a callable with a bounded sup norm."""

    def __init__(self, f: W.Window, a: float, b: float):
        self.f, self.a, self.b = f, a, b
        self.sup_norm = f.sup_norm

    def __call__(self, t):
        return np.exp(1j * _TWO_PI * self.b * (t - self.a)) * self.f(t - self.a)


def covariance_residual(f: W.Window, g: W.Window, a: float, b: float, x: float, y: float,
                        q: QuadratureSpec | None = None) -> float:
    """|V_g(T_a M_b f)(x,y) - e^{-2 pi i a y} V_g f(x-a, y-b)|, both by quadrature."""
    q = q or QuadratureSpec()
    eps = q.abs_tol / 4
    tf = f.tail_radius(eps / g.sup_norm)
    lhs = _adaptive_stft(_Shifted(f, a, b), a - tf, a + tf, list(a + f.breakpoints), g, x, y, q)
    rhs = np.exp(-1j * _TWO_PI * a * y) * _stft_quadrature(f, g, x - a, y - b, q)
    return float(abs(lhs - rhs))


def _tensor_rule(L: float, width: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    return composite_gauss(initial_edges(-L, L, [0.0], width), order)


def _product_field(f1, f2, g1, g2, L, width, order):
    nodes, weights = _tensor_rule(L, width, order)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    v1 = stft_batch(f1, g1, X, Y)
    v2 = v1 if (f1 is f2 and g1 is g2) else stft_batch(f2, g2, X, Y)
    return X, Y, np.outer(weights, weights) * v1 * np.conj(v2)


def orthogonality_residual(f1, f2, g1, g2, L: float, q: QuadratureSpec | None = None,
                           width: float = 0.5, order: int = 16) -> float:
    """|int int_{[-L,L]^2} V_{g1}f1 conj(V_{g2}f2) - <f1,f2> conj(<g1,g2>)|."""
    q = q or QuadratureSpec()
    _, _, field = _product_field(f1, f2, g1, g2, L, width, order)
    lhs = field.sum()
    rhs = inner_product(f1, f2, q) * np.conj(inner_product(g1, g2, q))
    return float(abs(lhs - rhs))


def ft_product_residual(f1, f2, g1, g2, xi: float, eta: float, L: float,
                        q: QuadratureSpec | None = None, width: float = 0.5, order: int = 16) -> float:
    """|F2(V_{g1}f1 conj(V_{g2}f2))(xi,eta) - (V_{f2}f1 conj(V_{g2}g1))(-eta, xi)|.

    The left side is a truncated 2-D Fourier quadrature over [-L, L]^2.
    """
    q = q or QuadratureSpec()
    X, Y, field = _product_field(f1, f2, g1, g2, L, width, order)
    lhs = (field * np.exp(-1j * _TWO_PI * (X * xi + Y * eta))).sum()
    rhs = stft(f1, f2, -eta, xi, q) * np.conj(stft(g1, g2, -eta, xi, q))
    return float(abs(lhs - rhs))
