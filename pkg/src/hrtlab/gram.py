"""Gramians of finite Gabor systems and numerical independence tests."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import Configuration, unchecked
from .quadrature import QuadratureSpec
from .transform import autocorr, stft
from .window import Window

INDEPENDENT = "Independent"
DEPENDENT = "Dependent"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class HermitianGram:
    entries: np.ndarray
    window: str
    points: tuple
    build_tol: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def det(self) -> float:
        return float(np.linalg.det(self.entries).real)

    def check(self) -> dict:
        """Residuals of the structural properties (Hermitian, unit diagonal, PSD)."""
        g = self.entries
        return {
            "hermitian": float(np.abs(g - g.conj().T).max()),
            "diagonal": float(np.abs(np.diag(g) - 1).max()),
            "max_offdiag_modulus": float(np.abs(g - np.diag(np.diag(g))).max()) if self.n > 1 else 0.0,
            "min_eigenvalue": min_eigenvalue(self),
        }

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
            "window": self.window,
            "points": [list(p) for p in self.points],
        }

    @classmethod
    def from_dict(cls, d: dict, build_tol: float = 0.0) -> "HermitianGram":
        m = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        if m.shape != (d["n"], d["n"]):
            raise ValueError("matrix shape does not match n")
        return cls(m, d["window"], tuple(tuple(p) for p in d["points"]), build_tol)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def gram_matrix(g: Window, cfg: Configuration, q: Optional[QuadratureSpec] = None) -> HermitianGram:
    """G[k, l] = <M_{b_l} T_{a_l} g, M_{b_k} T_{a_k} g>, built on the upper triangle and reflected."""
    q = q or QuadratureSpec()
    p = cfg.array
    n = len(p)
    k, l = np.triu_indices(n)
    da = p[l, 0] - p[k, 0]
    db = p[l, 1] - p[k, 1]
    vals = np.exp(-2j * math.pi * p[k, 0] * db) * autocorr(g, da, db)
    m = np.zeros((n, n), dtype=complex)
    m[k, l] = vals
    m[l, k] = np.conj(vals)
    m[np.diag_indices(n)] = m.diagonal().real
    return HermitianGram(m, g.label, tuple(map(tuple, p.tolist())), q.abs_tol)


def min_eigenvalue(G) -> float:
    m = G.entries if isinstance(G, HermitianGram) else np.asarray(G)
    return float(np.linalg.eigvalsh(m)[0])


@dataclass(frozen=True, eq=False)
class IndependenceVerdict:
    status: str
    min_eig: float
    tol: float
    margin: Optional[float] = None
    null_coeffs: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = {"status": self.status, "min_eig": self.min_eig, "tol": self.tol}
        if self.margin is not None:
            d["margin"] = self.margin
        if self.null_coeffs is not None:
            d["null_coeffs"] = {"re": self.null_coeffs.real.tolist(), "im": self.null_coeffs.imag.tolist()}
        return d


def canonical_null_vector(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unit norm with the first non-negligible coordinate real positive."""
    v = np.asarray(v, dtype=complex) / np.linalg.norm(v)
    lead = v[np.nonzero(np.abs(v) > tol)[0][0]]
    return v * (abs(lead) / lead)


def independence_test(g: Window, cfg: Configuration, tol: float = 1e-8,
                      q: Optional[QuadratureSpec] = None) -> IndependenceVerdict:
    """Classify the Gabor system by the smallest Gramian eigenvalue.

    Independent above ``tol``, Dependent below ``tol/10``, Inconclusive between.
    """
    G = gram_matrix(g, cfg, q)
    w, v = np.linalg.eigh(G.entries)
    lam = float(w[0])
    if lam > tol:
        return IndependenceVerdict(INDEPENDENT, lam, tol, margin=lam - tol)
    if lam < tol / 10:
        return IndependenceVerdict(DEPENDENT, lam, tol, null_coeffs=canonical_null_vector(v[:, 0]))
    return IndependenceVerdict(INCONCLUSIVE, lam, tol)


# --- translates and the autocorrelation --------------------------------------

def bochner_phi(g: Window, x: float, q: Optional[QuadratureSpec] = None) -> complex:
    """Autocorrelation int g(t) conj(g(t - x)) dt, by time-domain quadrature."""
    return stft(g, g, x, 0.0, q, method="quadrature")


@dataclass(frozen=True)
class BochnerCheck:
    residual: float
    sign: int


def _phi_sign(g: Window, q: QuadratureSpec, probes=(0.37, 1.0, 1.9)) -> int:
    """Whether G[k, l] pairs with Phi(a_l - a_k) (+1) or Phi(a_k - a_l) (-1)."""
    dev = {1: 0.0, -1: 0.0}
    for x in probes:
        v = complex(autocorr(g, x, 0.0))
        dev[1] = max(dev[1], abs(v - bochner_phi(g, x, q)))
        dev[-1] = max(dev[-1], abs(v - bochner_phi(g, -x, q)))
    # even autocorrelations fit both; keep +1 unless -1 is clearly better
    return 1 if dev[1] <= dev[-1] + 10 * q.abs_tol else -1


def collinear_gram(g: Window, shifts: Sequence[float], q: Optional[QuadratureSpec] = None) -> HermitianGram:
    """Gramian of the pure translates T_{a_k} g, first shift moved to zero."""
    s = np.asarray(shifts, dtype=float)
    return gram_matrix(g, unchecked([(a, 0.0) for a in s - s[0]]), q)


def collinear_gram_residual(g: Window, shifts: Sequence[float], q: Optional[QuadratureSpec] = None) -> BochnerCheck:
    """Max deviation between the translate Gramian and the Toeplitz matrix of Phi."""
    q = q or QuadratureSpec()
    s = np.asarray(shifts, dtype=float)
    s = s - s[0]
    G = collinear_gram(g, s, q).entries
    sign = _phi_sign(g, q)
    n = len(s)
    phi = {}
    worst = 0.0
    for k in range(n):
        for l in range(n):
            d = sign * (s[l] - s[k])
            if d not in phi:
                phi[d] = bochner_phi(g, d, q)
            worst = max(worst, abs(G[k, l] - phi[d]))
    return BochnerCheck(float(worst), sign)
