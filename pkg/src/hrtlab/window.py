"""Generator functions ("windows") with unit L2 norm and decay metadata.

Every analytic kind is a dilation ``g(t) = s**-0.5 * g1(t / s)`` of a
unit-norm profile ``g1``:

* ``gaussian``       ``2**0.25 * exp(-pi t**2)``
* ``hermite``        ``sum_k c_k h_k(t)`` with ``h_k`` the Hermite functions
                     orthonormal in L2 and ``h_0`` equal to the Gaussian above
* ``two_sided_exp``  ``exp(-|t|)``
* ``rational``       ``2**-0.5 / (1 + |t|)``

``sampled`` windows are cubic splines on a uniform grid, zero outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate as sp_integrate
from scipy.interpolate import CubicSpline
from scipy.special import erfcinv

from .errors import InvalidSpec, ZeroWindow
from .quadrature import composite_gauss

GAUSSIAN = "gaussian"
HERMITE = "hermite"
TWO_SIDED_EXP = "two_sided_exp"
RATIONAL = "rational"
SAMPLED = "sampled"

KINDS = (GAUSSIAN, HERMITE, TWO_SIDED_EXP, RATIONAL, SAMPLED)
ANALYTIC_KINDS = (GAUSSIAN, HERMITE, TWO_SIDED_EXP, RATIONAL)

_ALIASES = {
    "gauss": GAUSSIAN,
    "gaussian": GAUSSIAN,
    "hermite": HERMITE,
    "hermitegaussian": HERMITE,
    "hermite_gaussian": HERMITE,
    "exp": TWO_SIDED_EXP,
    "twosidedexp": TWO_SIDED_EXP,
    "two_sided_exp": TWO_SIDED_EXP,
    "two-sided-exp": TWO_SIDED_EXP,
    "rational": RATIONAL,
    "rationaldecay": RATIONAL,
    "rational_decay": RATIONAL,
    "rational-decay": RATIONAL,
    "sampled": SAMPLED,
}


def canonical_kind(name: str) -> str:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise InvalidSpec(f"unknown window kind {name!r}") from None


@dataclass(frozen=True)
class WindowSpec:
    kind: str
    scale: float = 1.0
    coeffs: tuple = ()
    grid_start: float = 0.0
    grid_step: float = 0.0
    values: tuple = ()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown window kind {self.kind!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidSpec("scale must be a positive finite number")
        if self.kind == HERMITE:
            if not self.coeffs or not any(c != 0 for c in self.coeffs):
                raise InvalidSpec("hermite coefficients must contain a nonzero entry")
            if not all(math.isfinite(c) for c in self.coeffs):
                raise InvalidSpec("hermite coefficients must be finite")
        if self.kind == SAMPLED:
            if len(self.values) < 2:
                raise InvalidSpec("sampled grid needs at least 2 points")
            if not (math.isfinite(self.grid_step) and self.grid_step > 0):
                raise InvalidSpec("sampled grid_step must be positive")
            if not math.isfinite(self.grid_start):
                raise InvalidSpec("sampled grid_start must be finite")
            if not all(np.isfinite(complex(v)) for v in self.values):
                raise InvalidSpec("sampled values must be finite")

    @classmethod
    def gaussian(cls, scale: float = 1.0) -> "WindowSpec":
        return cls(GAUSSIAN, scale)

    @classmethod
    def two_sided_exp(cls, scale: float = 1.0) -> "WindowSpec":
        return cls(TWO_SIDED_EXP, scale)

    @classmethod
    def rational(cls, scale: float = 1.0) -> "WindowSpec":
        return cls(RATIONAL, scale)

    @classmethod
    def hermite(cls, coeffs: Sequence[float], scale: float = 1.0) -> "WindowSpec":
        return cls(HERMITE, scale, coeffs=tuple(float(c) for c in coeffs))

    @classmethod
    def sampled(cls, grid_start: float, grid_step: float, values: Sequence[complex]) -> "WindowSpec":
        return cls(SAMPLED, 1.0, grid_start=float(grid_start), grid_step=float(grid_step),
                   values=tuple(complex(v) for v in values))


def hermite_functions(t, degree: int) -> np.ndarray:
    """Values of h_0..h_degree at ``t`` (shape ``(degree+1,) + t.shape``).

    Uses the normalized three-term recurrence, stable for large degree.
    """
    u = math.sqrt(2 * math.pi) * np.asarray(t, dtype=float)
    out = np.empty((degree + 1,) + u.shape)
    out[0] = 2 ** 0.25 * np.exp(-0.5 * u * u)
    if degree >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for k in range(1, degree):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * u * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


@dataclass(frozen=True, eq=False)
class Window:
    """A unit-norm generator. Immutable; safe to share between threads."""

    spec: WindowSpec
    norm_factor: float
    support_radius: float
    is_real: bool
    trunc_tol: float
    _spline: Optional[tuple] = field(default=None, repr=False)

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def scale(self) -> float:
        return self.spec.scale

    @property
    def label(self) -> str:
        s = self.spec
        if s.kind == HERMITE:
            return f"hermite(scale={s.scale:.12g},coeffs=[{','.join(f'{c:.12g}' for c in s.coeffs)}])"
        if s.kind == SAMPLED:
            return f"sampled(start={s.grid_start:.12g},step={s.grid_step:.12g},n={len(s.values)})"
        return f"{s.kind}(scale={s.scale:.12g})"

    def __call__(self, t):
        return eval_window(self, t)

    @property
    def breakpoints(self) -> np.ndarray:
        """Points where the window is not smooth."""
        if self.kind in (TWO_SIDED_EXP, RATIONAL):
            return np.array([0.0])
        if self.kind == SAMPLED:
            s = self.spec
            return s.grid_start + s.grid_step * np.arange(len(s.values))
        return np.empty(0)

    @property
    def sup_norm(self) -> float:
        """Upper bound on max |g|."""
        s = self.spec
        amp = self.norm_factor
        if s.kind == GAUSSIAN:
            return amp * 2 ** 0.25
        if s.kind == TWO_SIDED_EXP:
            return amp
        if s.kind == RATIONAL:
            return amp * 2 ** -0.5
        if s.kind == HERMITE:
            # |h_k| <= pi**-0.25 * (2 pi)**0.25 = 2**0.25 (Cramer's inequality)
            return amp * 2 ** 0.25 * sum(abs(c) for c in s.coeffs)
        vals = np.abs(np.asarray(s.values))
        t = np.linspace(s.grid_start, s.grid_start + s.grid_step * (len(vals) - 1), 16 * len(vals))
        return 1.05 * max(float(vals.max()), float(np.abs(eval_window(self, t)).max()))

    def tail_radius(self, eps: float) -> float:
        """Radius T with integral of |g| over |t| > T at most ``eps``.

        ``math.inf`` when |g| is not integrable (rational decay).
        """
        s = self.spec
        sc = s.scale
        amp = self.norm_factor
        if s.kind == GAUSSIAN:
            # int_{|t|>T} 2**.25 e^{-pi t^2/s^2} = 2**.25 s erfc(sqrt(pi) T / s)
            c = amp * 2 ** 0.25 * sc
            if eps >= c:
                return 0.0
            return sc * float(erfcinv(eps / c)) / math.sqrt(math.pi)
        if s.kind == TWO_SIDED_EXP:
            c = 2 * amp * sc
            return 0.0 if eps >= c else sc * math.log(c / eps)
        if s.kind == RATIONAL:
            return math.inf
        if s.kind == SAMPLED:
            return _sampled_extent(s)
        return _numeric_tail_radius(lambda t: np.abs(eval_window(self, t)), eps, sc * (math.sqrt(2 * s.degree + 1) + 1) / math.sqrt(2 * math.pi))


def _sampled_extent(s: WindowSpec) -> float:
    end = s.grid_start + s.grid_step * (len(s.values) - 1)
    return max(abs(s.grid_start), abs(end))


def _numeric_tail_radius(absfn, eps: float, start: float) -> float:
    def tail(T):
        up = sp_integrate.quad(absfn, T, np.inf, limit=200, epsabs=eps * 1e-3)[0]
        lo = sp_integrate.quad(absfn, -np.inf, -T, limit=200, epsabs=eps * 1e-3)[0]
        return up + lo

    T = max(start, 0.25)
    while tail(T) > eps:
        T *= 1.25
    return T


def _profile(spec: WindowSpec, t: np.ndarray) -> np.ndarray:
    """Un-normalized spec function g_spec(t)."""
    if spec.kind == SAMPLED:
        raise AssertionError("sampled windows evaluate through their spline")
    u = t / spec.scale
    if spec.kind == GAUSSIAN:
        return 2 ** 0.25 * np.exp(-math.pi * u * u)
    if spec.kind == TWO_SIDED_EXP:
        return np.exp(-np.abs(u))
    if spec.kind == RATIONAL:
        return 2 ** -0.5 / (1.0 + np.abs(u))
    c = np.asarray(spec.coeffs)
    return np.tensordot(c, hermite_functions(u, len(c) - 1), axes=1)


def _profile_norm_sq(spec: WindowSpec) -> float:
    """Exact squared L2 norm of g_spec for analytic kinds."""
    if spec.kind == HERMITE:
        return spec.scale * float(np.dot(spec.coeffs, spec.coeffs))
    return spec.scale


def _support_radius(spec: WindowSpec, tol: float) -> float:
    """T with int_{|t|>T} |g|^2 < tol for the normalized window."""
    sc = spec.scale
    if spec.kind == GAUSSIAN:
        # tail of 2**.5 e^{-2 pi t^2}: erfc(sqrt(2 pi) T)
        return sc * float(erfcinv(tol)) / math.sqrt(2 * math.pi)
    if spec.kind == TWO_SIDED_EXP:
        # tail of e^{-2|t|}: e^{-2T}
        return sc * 0.5 * math.log(1.0 / tol)
    if spec.kind == RATIONAL:
        # tail of (1/2)/(1+|t|)^2 over |t|>T: 1/(1+T)
        return sc * max(1.0 / tol - 1.0, 0.0)
    if spec.kind == SAMPLED:
        return _sampled_extent(spec)
    c = np.asarray(spec.coeffs)
    nsq = float(np.dot(c, c))

    def dens(u):
        return np.tensordot(c, hermite_functions(u, len(c) - 1), axes=1) ** 2 / nsq

    T = math.sqrt(2 * len(c) - 1) / math.sqrt(2 * math.pi) + 0.5
    while sp_integrate.quad(lambda u: dens(u) + dens(-u), T, np.inf, limit=200, epsabs=tol * 1e-3)[0] >= tol:
        T *= 1.2
    return sc * T


def make_window(spec: WindowSpec, trunc_tol: float = 1e-12) -> Window:
    """Normalize ``spec`` to unit L2 norm and attach decay metadata."""
    if not trunc_tol > 0:
        raise InvalidSpec("trunc_tol must be positive")
    spec.validate()
    if spec.kind == SAMPLED:
        vals = np.asarray(spec.values, dtype=complex)
        n = len(vals)
        grid = spec.grid_start + spec.grid_step * np.arange(n)
        bc = "not-a-knot" if n >= 3 else "natural"
        re = CubicSpline(grid, vals.real, bc_type=bc)
        im = CubicSpline(grid, vals.imag, bc_type=bc)
        # |spline|^2 is a degree-6 polynomial per cell; 4-point Gauss is exact.
        nodes, weights = composite_gauss(grid, order=4)
        norm_sq = float(weights @ (re(nodes) ** 2 + im(nodes) ** 2))
        if norm_sq < 1e-28:
            raise ZeroWindow("sampled window has (numerically) zero norm")
        is_real = bool(np.all(np.abs(vals.imag) <= 1e-14))
        return Window(spec, 1.0 / math.sqrt(norm_sq), _sampled_extent(spec), is_real, trunc_tol, (grid, re, im))
    norm_sq = _profile_norm_sq(spec)
    if norm_sq < 1e-28:
        raise ZeroWindow("window has zero norm")
    return Window(spec, 1.0 / math.sqrt(norm_sq), _support_radius(spec, trunc_tol), True, trunc_tol)


def eval_window(w: Window, t):
    """``norm_factor * g_spec(t)``; array in, array out (complex)."""
    t = np.asarray(t, dtype=float)
    if w.kind == SAMPLED:
        grid, re, im = w._spline
        inside = (t >= grid[0]) & (t <= grid[-1])
        out = np.zeros(t.shape, dtype=complex)
        ti = t[inside]
        out[inside] = re(ti) + 1j * im(ti)
        return w.norm_factor * out
    return (w.norm_factor * _profile(w.spec, t)).astype(complex)


def gaussian(scale: float = 1.0, trunc_tol: float = 1e-12) -> Window:
    return make_window(WindowSpec.gaussian(scale), trunc_tol)


def two_sided_exp(scale: float = 1.0, trunc_tol: float = 1e-12) -> Window:
    return make_window(WindowSpec.two_sided_exp(scale), trunc_tol)


def rational(scale: float = 1.0, trunc_tol: float = 1e-12) -> Window:
    return make_window(WindowSpec.rational(scale), trunc_tol)


def hermite(coeffs: Sequence[float], scale: float = 1.0, trunc_tol: float = 1e-12) -> Window:
    return make_window(WindowSpec.hermite(coeffs, scale), trunc_tol)


def sampled(grid_start: float, grid_step: float, values: Sequence[complex], trunc_tol: float = 1e-12) -> Window:
    return make_window(WindowSpec.sampled(grid_start, grid_step, values), trunc_tol)
