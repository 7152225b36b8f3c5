"""Residual suites for the identities F and the STFT must satisfy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import transform as S
from .config import unchecked
from .errors import HRTLabError, NotApplicable, TailBoundTooLarge
from .extension import ExtensionEvaluator, det_identity_residual, eval_F, fhat, integral_F, symmetry_residual
from .gram import INDEPENDENT, collinear_gram_residual, independence_test
from .search import scan
from .window import GAUSSIAN, RATIONAL


@dataclass
class Check:
    suite: str
    name: str
    value: Optional[float]
    tol: Optional[float]
    status: str  # "pass", "fail" or "skip"
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_dict(self) -> dict:
        return asdict(self)


def _check(suite, name, value, tol, detail="", le=True) -> Check:
    ok = value <= tol if le else value >= tol
    return Check(suite, name, float(value), float(tol), "pass" if ok else "fail", detail)


def _skip(suite, name, why) -> Check:
    return Check(suite, name, None, None, "skip", why)


def pinning(e: ExtensionEvaluator) -> list[Check]:
    worst = max(abs(eval_F(e, a, b).F - 1.0) for a, b in e.points)
    return [_check("pinning", "max |F(base) - 1|", worst, 1e-9)]


def value_range(e: ExtensionEvaluator, half: float = 4.0, step: float = 0.05, threads=None) -> list[Check]:
    g = scan(e, (-half, half, -half, half), step, threads)
    return [
        _check("range", "-min F", -float(g.values.min()), 1e-9, f"{g.shape[1]}x{g.shape[0]} grid"),
        _check("range", "max F - 1", float(g.values.max()) - 1.0, 1e-9, f"{g.shape[1]}x{g.shape[0]} grid"),
    ]


def integral(e: ExtensionEvaluator, L: float = 6.0, step: float = 0.02) -> list[Check]:
    tol = 2e-3 if e.n <= 2 else 5e-3
    try:
        est = integral_F(e, L, step)
    except TailBoundTooLarge as exc:
        return [_skip("integral", "integral of F", f"{exc} (raw value {exc.value!r})")]
    return [_check("integral", "|integral F - N|", abs(est.value - e.n), tol,
                   f"value={est.value!r} N={e.n} tail_bound={est.tail_bound:.3g}")]


def determinant(e: ExtensionEvaluator, samples: int = 50, half: float = 2.0, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-half, half, size=(samples, 2))
    worst = max(det_identity_residual(e, a, b) for a, b in pts)
    return [_check("det", "max |det G_{N+1} - (1-F) det G_N|", worst, 1e-8, f"{samples} random points")]


PROBES = ((0.0, 0.0), (0.5, -0.5), (0.3, 0.2), (-0.7, 0.4), (1.0, 1.0))


def sampled_fourier(e: ExtensionEvaluator, xi, eta, L: float = 6.0, step: float = 0.02) -> complex:
    """Midpoint 2-D Fourier quadrature of F over [-L, L]^2."""
    n = int(round(2 * L / step))
    h = 2 * L / n
    t = -L + h * (np.arange(n) + 0.5)
    total = 0j
    ex = np.exp(-2j * math.pi * t * xi)
    for b in t:
        total += np.exp(-2j * math.pi * b * eta) * (e.values(t, b) * ex).sum()
    return total * h * h


def fourier(e: ExtensionEvaluator, probes=PROBES) -> list[Check]:
    if e.window.kind != GAUSSIAN:
        return [_skip("fourier", "explicit sum vs quadrature", "needs a Gaussian window for a certified truncation")]
    out = []
    worst = 0.0
    for xi, eta in probes:
        worst = max(worst, abs(complex(fhat(e, xi, eta)) - sampled_fourier(e, xi, eta)))
    out.append(_check("fourier", "max |fhat - quadrature|", worst, 1e-4, f"{len(probes)} probes"))
    grid = np.linspace(-3, 3, 25)
    X, Y = np.meshgrid(grid, grid)
    over = float(np.abs(fhat(e, X, Y)).max()) - e.inv_abs_sum
    out.append(_check("fourier", "max |fhat| - sum |B|", over, 0.0, f"sum |B| = {e.inv_abs_sum!r}"))
    est = integral_F(e, 6.0, 0.02)
    out.append(_check("fourier", "|fhat(0,0) - integral F|", abs(complex(fhat(e, 0, 0)) - est.value), 5e-3))
    return out


def symmetry(e: ExtensionEvaluator) -> list[Check]:
    try:
        worst = 0.0
        for a in (-2, -1, 0, 1, 2):
            for b in (-0.7, 0.3, 1.4):
                worst = max(worst, symmetry_residual(e, a, b))
        half = max(symmetry_residual(e, a, 0.5) for a in (1, 2, 3))
    except NotApplicable as exc:
        return [_skip("symmetry", "F(a,b) = F(a,1-b)", str(exc))]
    return [
        _check("symmetry", "max |F(a,b) - F(a,1-b)|", worst, 1e-9),
        _check("symmetry", "max |F(-a,1/2) - F(a,1/2)|", half, 1e-9),
    ]


COVARIANCE_POINTS = ((0.0, 0.0, 0.2, -0.1), (1.0, 1.0, 0.3, -0.7), (-0.4, 0.6, 0.1, 0.25))


def stft_identities(e: ExtensionEvaluator) -> list[Check]:
    g = e.window
    q = e.q
    out = []
    if g.kind == RATIONAL:
        out.append(_skip("stft", "covariance", "no integrable tail for quadrature of this window"))
    else:
        try:
            worst = max(S.covariance_residual(g, g, a, b, x, y, q) for a, b, x, y in COVARIANCE_POINTS)
            out.append(_check("stft", "covariance residual", worst, 2 * q.abs_tol))
        except HRTLabError as exc:
            out.append(Check("stft", "covariance residual", None, 2 * q.abs_tol, "fail", str(exc)))
    if S.has_closed_form(g, g) and g.kind != RATIONAL:
        pts = np.linspace(-2, 2, 3)
        worst = max(abs(S.stft(g, g, x, y, q, method="quadrature") - complex(S.autocorr(g, x, y)))
                    for x in pts for y in pts)
        out.append(_check("stft", "closed form vs quadrature", worst, 1e-10, "3x3 grid on [-2,2]^2"))
    if g.kind == RATIONAL:
        out.append(_skip("stft", "orthogonality", "slow decay defeats truncated 2-D quadrature"))
    else:
        out.append(_check("stft", "orthogonality residual", S.orthogonality_residual(g, g, g, g, 8.0 * g.scale, q),
                          1e-5))
    return out


BOCHNER_SHIFTS = (0.0, 0.5, 1.5, 2.0)


def bochner(e: ExtensionEvaluator, shifts=BOCHNER_SHIFTS) -> list[Check]:
    g = e.window
    q = e.q
    res = collinear_gram_residual(g, shifts, q)
    verdict = independence_test(g, unchecked([(s, 0.0) for s in shifts]), q=q)
    return [
        _check("bochner", "collinear Gramian vs Phi", res.residual, 10 * q.abs_tol, f"sign={res.sign}"),
        Check("bochner", "collinear independence", verdict.min_eig, verdict.tol,
              "pass" if verdict.status == INDEPENDENT else "fail", verdict.status),
    ]


SUITES: dict[str, Callable[[ExtensionEvaluator], list[Check]]] = {
    "pinning": pinning,
    "range": value_range,
    "integral": integral,
    "det": determinant,
    "fourier": fourier,
    "symmetry": symmetry,
    "stft": stft_identities,
    "bochner": bochner,
}


def run_suites(e: ExtensionEvaluator, names) -> list[Check]:
    if "all" in names:
        names = list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    out = []
    for n in names:
        out.extend(SUITES[n](e))
    return out
