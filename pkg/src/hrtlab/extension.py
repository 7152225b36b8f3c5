"""The extension function F(a, b) = <G^{-1} u(a, b), u(a, b)> of a base Gabor system.

F measures how much of the new vector M_b T_a g already lies in the span
of the base system: F < 1 exactly when adding (a, b) keeps the system
independent, and F = 1 at the base points themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import erfc

from .config import Configuration
from .errors import NotApplicable, NumericalGuard, SingularBase, TailBoundTooLarge
from .gram import HermitianGram, gram_matrix, min_eigenvalue
from .quadrature import QuadratureSpec
from .transform import autocorr
from .window import GAUSSIAN, Window

IMAG_GUARD = 1e-11
SOLVE_GUARD = 1e-11
RANGE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class ExtensionEvaluator:
    """A factorized base Gramian, ready to evaluate F anywhere in the plane.

    Immutable once built; evaluation methods are pure and thread-safe.
    """

    window: Window
    base: Configuration
    gram: HermitianGram
    factor: tuple = field(repr=False)
    det_base: float
    min_eig: float
    inverse: np.ndarray = field(repr=False)
    inv_abs_sum: float
    q: QuadratureSpec

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def points(self) -> np.ndarray:
        return self.base.array

    def vectors(self, a, b) -> np.ndarray:
        """Extension vectors for broadcast arrays ``a``, ``b``; shape (N, *shape)."""
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        p = self.points
        ak = p[:, 0].reshape((-1,) + (1,) * a.ndim)
        bk = p[:, 1].reshape((-1,) + (1,) * a.ndim)
        db = b[None] - bk
        return np.exp(-2j * math.pi * ak * db) * autocorr(self.window, a[None] - ak, db)

    def solve(self, u: np.ndarray) -> np.ndarray:
        return cho_solve(self.factor, u.reshape(self.n, -1)).reshape(u.shape)

    def values(self, a, b) -> np.ndarray:
        """F on broadcast arrays, with the Hermitian-form and solve guards applied."""
        u = self.vectors(a, b)
        flat = u.reshape(self.n, -1)
        x = cho_solve(self.factor, flat)
        form = np.einsum("ij,ij->j", flat.conj(), x)
        xnorm = np.linalg.norm(x, axis=0)
        scale = np.maximum(1.0, xnorm)
        resid = np.linalg.norm(self.gram.entries @ x - flat, axis=0)
        if np.any(np.abs(form.imag) > IMAG_GUARD * scale * np.maximum(1.0, np.linalg.norm(flat, axis=0))):
            raise NumericalGuard(f"Hermitian form has imaginary part {np.abs(form.imag).max():.3g}")
        if np.any(resid > SOLVE_GUARD * scale):
            raise NumericalGuard(f"solve residual {resid.max():.3g} exceeds guard")
        return form.real.reshape(u.shape[1:])


@dataclass(frozen=True, eq=False)
class ExtensionValue:
    F: float
    u: np.ndarray
    solve_residual: float
    imag: float


def build_extension(g: Window, base: Configuration, q: Optional[QuadratureSpec] = None,
                    singular_tol: float = 1e-12) -> ExtensionEvaluator:
    """Factor the base Gramian; SingularBase when it is not numerically positive definite."""
    q = q or QuadratureSpec()
    G = gram_matrix(g, base, q)
    lam = min_eigenvalue(G)
    if not lam > singular_tol:
        raise SingularBase(f"base Gramian has smallest eigenvalue {lam:.3g}")
    try:
        factor = cho_factor(G.entries, lower=True)
    except LinAlgError as exc:
        raise SingularBase(str(exc)) from exc
    L = np.tril(factor[0])
    if np.abs(L @ L.conj().T - G.entries).max() > 1e-12:
        raise SingularBase("Cholesky factor does not reproduce the Gramian")
    det = float(np.prod(np.abs(np.diag(L))) ** 2)
    inv = cho_solve(factor, np.eye(G.n, dtype=complex))
    return ExtensionEvaluator(g, base, G, factor, det, lam, inv, float(np.abs(inv).sum()), q)


def extension_vector(e: ExtensionEvaluator, a: float, b: float) -> np.ndarray:
    """u_k = e^{-2 pi i a_k (b - b_k)} V_g g(a - a_k, b - b_k)."""
    return e.vectors(a, b)


def eval_F(e: ExtensionEvaluator, a: float, b: float) -> ExtensionValue:
    u = e.vectors(float(a), float(b))
    x = e.solve(u)
    form = complex(np.vdot(u, x))
    resid = float(np.linalg.norm(e.gram.entries @ x - u))
    scale = max(1.0, float(np.linalg.norm(x)))
    if abs(form.imag) > IMAG_GUARD * scale * max(1.0, float(np.linalg.norm(u))):
        raise NumericalGuard(f"Hermitian form has imaginary part {form.imag:.3g}")
    if resid > SOLVE_GUARD * scale:
        raise NumericalGuard(f"solve residual {resid:.3g} exceeds guard")
    return ExtensionValue(form.real, u, resid, form.imag)


def det_identity_residual(e: ExtensionEvaluator, a: float, b: float) -> float:
    """|det G_{N+1} - (1 - F) det G_N| with G_{N+1} built from scratch."""
    full = gram_matrix(e.window, e.base.with_point(a, b), e.q)
    return abs(full.det() - (1.0 - eval_F(e, a, b).F) * e.det_base)


# --- integral and Fourier transform -----------------------------------------

@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    tail_bound: float
    L: float
    step: float

    def __float__(self):
        return self.value


def _gauss_square_tail(g: Window, points: np.ndarray, L: float) -> float:
    """Sum over base points of the mass of |V_g g(. - p_k)|^2 outside [-L, L]^2."""
    s = g.scale
    r = math.sqrt(math.pi)
    total = 0.0
    for a, b in points:
        ta = 0.5 * (erfc(r * (L - a) / s) + erfc(r * (L + a) / s))
        tb = 0.5 * (erfc(r * (L - b) * s) + erfc(r * (L + b) * s))
        total += ta + tb - ta * tb
    return float(total)


def midpoint_nodes(L: float, step: float) -> np.ndarray:
    n = max(1, int(round(2 * L / step)))
    h = 2 * L / n
    return -L + h * (np.arange(n) + 0.5)


def integral_F(e: ExtensionEvaluator, L: float, step: float, tail_tol: float = 1e-6) -> IntegralEstimate:
    """Midpoint-rule integral of F over [-L, L]^2 plus a certified tail bound.

    The tail uses F <= |u|^2 / lambda_min, available for Gaussian windows.
    Other windows raise TailBoundTooLarge carrying the truncated value.
    """
    t = midpoint_nodes(L, step)
    h = 2 * L / len(t)
    total = 0.0
    for b in t:
        total += float(e.values(t, b).sum())
    value = total * h * h
    if e.window.kind != GAUSSIAN:
        raise TailBoundTooLarge(f"no certified decay bound for {e.window.kind} windows", value=value)
    tail = _gauss_square_tail(e.window, e.points, L) / e.min_eig
    if tail > tail_tol:
        raise TailBoundTooLarge(f"tail bound {tail:.3g} exceeds {tail_tol:.3g}", value=value)
    return IntegralEstimate(value, tail, L, h)


def fhat(e: ExtensionEvaluator, xi, eta) -> np.ndarray:
    """Fourier transform of F at (xi, eta) from the explicit double sum over G^{-1}."""
    xi, eta = np.broadcast_arrays(np.asarray(xi, float), np.asarray(eta, float))
    p = e.points
    B = e.inverse
    g = e.window
    outer = np.conj(autocorr(g, -eta, xi))
    total = np.zeros(xi.shape, dtype=complex)
    for k, (ak, bk) in enumerate(p):
        for l, (al, bl) in enumerate(p):
            phase = np.exp(2j * math.pi * (al * bl - ak * bk - al * bk - al * xi - bk * eta))
            total += B[k, l] * phase * autocorr(g, -eta - al + ak, xi - bl + bk)
    return total * outer


def symmetry_residual(e: ExtensionEvaluator, a: float, b: float) -> float:
    """Reflection b -> 1 - b (or a -> -a on the line b = 1/2) for the base {(0,0), (0,1)}."""
    if not e.window.is_real:
        raise NotApplicable("window is not real-valued")
    if sorted(map(tuple, e.points.tolist())) != [(0.0, 0.0), (0.0, 1.0)]:
        raise NotApplicable("base must be {(0,0), (0,1)}")
    if float(a) != round(a):
        raise NotApplicable("a must be an integer")
    if b == 0.5:
        return abs(eval_F(e, -a, 0.5).F - eval_F(e, a, 0.5).F)
    return abs(eval_F(e, a, b).F - eval_F(e, a, 1.0 - b).F)


__all__ = [
    "ExtensionEvaluator", "ExtensionValue", "IntegralEstimate", "build_extension", "extension_vector",
    "eval_F", "det_identity_residual", "integral_F", "fhat", "symmetry_residual",
]
