"""Grid scans of F, maximizer refinement, escape radius and certificates."""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import TailBoundTooLarge
from .extension import ExtensionEvaluator
from .window import GAUSSIAN

CLUSTER_TOL = 1e-4
DEFAULT_DELTA = 0.05
CIRCLE_SAMPLES = 720
REFINE_MIN_STEP = 1e-6
REFINE_MAX_ITER = 200
EXTRA_MAX_TOL = 1e-6
RANGE_SLACK = 1e-9

AT_BASE = "AllMaximaAtBase"
EXTRA = "ExtraMaximaFound"
INCONCLUSIVE = "Inconclusive"


def evaluator_id(e: ExtensionEvaluator) -> str:
    pts = ";".join(f"{a:.12g},{b:.12g}" for a, b in e.points)
    return f"{e.window.label}|{pts}"


def grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Nodes from lo to hi inclusive, spaced at most ``step`` apart (at least two)."""
    if not hi > lo:
        raise ValueError("degenerate rectangle")
    if not step > 0:
        raise ValueError("step must be positive")
    n = max(2, math.ceil((hi - lo) / step - 1e-9) + 1)
    return np.linspace(lo, hi, n)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    rect: tuple
    step: float
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # values[j, i] = F(a[i], b[j])
    evaluator_id: str = ""

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def argmax(self) -> tuple[float, float, float]:
        j, i = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return float(self.a[i]), float(self.b[j]), float(self.values[j, i])

    def to_csv(self, fmt=None) -> str:
        fmt = fmt or (lambda v: repr(float(v)))
        buf = io.StringIO()
        buf.write("a,b,F\n")
        for j, bv in enumerate(self.b):
            for i, av in enumerate(self.a):
                buf.write(f"{fmt(av)},{fmt(bv)},{fmt(self.values[j, i])}\n")
        return buf.getvalue()


def scan(e: ExtensionEvaluator, rect, step: float, threads: Optional[int] = None) -> FieldGrid:
    """Sample F on the grid over ``rect = (a_min, a_max, b_min, b_max)``.

    Rows are evaluated independently, so the result does not depend on
    the number of worker threads.
    """
    a0, a1, b0, b1 = map(float, rect)
    a = grid_axis(a0, a1, step)
    b = grid_axis(b0, b1, step)
    out = np.empty((len(b), len(a)))

    def row(j):
        out[j] = e.values(a, b[j])

    threads = threads or os.cpu_count() or 1
    if threads == 1:
        for j in range(len(b)):
            row(j)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(row, range(len(b))))
    return FieldGrid((a0, a1, b0, b1), float(step), a, b, out, evaluator_id(e))


def grid_local_maxima(grid: FieldGrid, threshold: float) -> list[tuple[int, int]]:
    """Indices (j, i) of nodes strictly above all their grid neighbours and above ``threshold``."""
    v = grid.values
    nb, na = v.shape
    padded = np.full((nb + 2, na + 2), -np.inf)
    padded[1:-1, 1:-1] = v
    strict = np.ones_like(v, dtype=bool)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if dj == 0 and di == 0:
                continue
            strict &= v > padded[1 + dj:1 + dj + nb, 1 + di:1 + di + na]
    strict &= v > threshold
    return [tuple(map(int, ij)) for ij in np.argwhere(strict)]


_STENCIL = np.array([(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)], dtype=float)
_DESIGN = np.column_stack([
    np.ones(9), _STENCIL[:, 0], _STENCIL[:, 1],
    _STENCIL[:, 0] ** 2, _STENCIL[:, 0] * _STENCIL[:, 1], _STENCIL[:, 1] ** 2,
])
_FIT = np.linalg.pinv(_DESIGN)


def _quadratic_peak(vals: np.ndarray) -> Optional[np.ndarray]:
    """Stationary point of the least-squares quadratic through a 3x3 stencil, if concave."""
    c = _FIT @ vals
    H = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
    if not (H[0, 0] < 0 and np.linalg.det(H) > 0):
        return None
    d = np.linalg.solve(H, -c[1:3])
    return d if np.all(np.abs(d) <= 1.0) else None


@dataclass(frozen=True)
class Maximizer:
    a: float
    b: float
    value: float
    refined: bool
    seeds: int = 1
    start_value: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


def refine(e: ExtensionEvaluator, a: float, b: float, h: float) -> Maximizer:
    """Derivative-free ascent: 3x3 stencil with quadratic fit, halving on stalls.

    Stops when the stencil spacing drops below 1e-6 or after 200 iterations.
    The value never decreases.
    """
    p = np.array([a, b], float)
    fp = float(e.values(p[0], p[1]))
    start = fp
    it = 0
    while h >= REFINE_MIN_STEP and it < REFINE_MAX_ITER:
        it += 1
        pts = p + h * _STENCIL
        vals = e.values(pts[:, 0], pts[:, 1])
        best = int(np.argmax(vals))
        cand, fc = None, -math.inf
        d = _quadratic_peak(vals)
        if d is not None:
            cand = p + h * d
            fc = float(e.values(cand[0], cand[1]))
        if fc > fp and fc >= vals[best]:
            p, fp = cand, fc
            h *= 0.5
        elif vals[best] > fp:
            p, fp = pts[best].copy(), float(vals[best])
        else:
            h *= 0.5
    return Maximizer(float(p[0]), float(p[1]), fp, h < REFINE_MIN_STEP, 1, start)


def cluster(points: list[Maximizer], tol: float = CLUSTER_TOL) -> list[Maximizer]:
    """Single-linkage clusters within ``tol``; each represented by its best member."""
    groups: list[list[Maximizer]] = []
    for m in points:
        hit = [g for g in groups if any(math.hypot(m.a - o.a, m.b - o.b) <= tol for o in g)]
        merged = [m]
        for g in hit:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    out = []
    for g in groups:
        top = max(g, key=lambda m: (m.value, -m.a, -m.b))
        out.append(Maximizer(top.a, top.b, top.value, all(m.refined for m in g), sum(m.seeds for m in g),
                             top.start_value))
    # coarse key first so refinement jitter cannot reorder clusters
    out.sort(key=lambda m: (round(m.a, 3), round(m.b, 3), m.a, m.b))
    return out


def find_maximizers(e: ExtensionEvaluator, grid: FieldGrid, delta: float = DEFAULT_DELTA,
                    threads: Optional[int] = None) -> list[Maximizer]:
    """Refined, clustered local maxima of F with value above 1 - delta."""
    seeds = grid_local_maxima(grid, 1.0 - delta)
    h = min(float(np.diff(grid.a).min()), float(np.diff(grid.b).min()))
    starts = [(float(grid.a[i]), float(grid.b[j])) for j, i in seeds]
    threads = threads or os.cpu_count() or 1
    if threads == 1 or len(starts) < 2:
        refined = [refine(e, a, b, h) for a, b in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            refined = list(pool.map(lambda s: refine(e, s[0], s[1], h), starts))
    return cluster(refined)


# --- escape radius -----------------------------------------------------------

def circle_max(e: ExtensionEvaluator, r: float, samples: int = CIRCLE_SAMPLES) -> float:
    th = 2 * math.pi * np.arange(samples) / samples
    return float(e.values(r * np.cos(th), r * np.sin(th)).max())


def gaussian_decay_radius(e: ExtensionEvaluator, level: float) -> float:
    """Radius beyond which F < level, from F <= sum_k |V_g g(p - p_k)|^2 / lambda_min."""
    s = e.window.scale
    c = min(s, 1.0 / s)
    rmax = float(np.hypot(e.points[:, 0], e.points[:, 1]).max())
    # |V(p - p_k)|^2 <= exp(-pi c^2 |p - p_k|^2), |p - p_k| >= |p| - rmax
    d = math.sqrt(max(0.0, math.log(e.n / (level * e.min_eig)) / math.pi)) / c
    return rmax + d


@dataclass(frozen=True)
class EscapeRadius:
    radius: float
    certified: bool
    decay_radius: Optional[float]
    circle_max: float


def escape_search(e: ExtensionEvaluator, delta: float, samples: int = CIRCLE_SAMPLES,
                  annulus_step: float = 0.05) -> EscapeRadius:
    """Doubling then bisection for the smallest circle radius with sampled F < 1 - delta.

    For Gaussian windows the annulus between that radius and the analytic
    decay radius is swept by circles ``annulus_step`` apart; the radius is
    pushed outward past any circle that fails.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    level = 1.0 - delta
    rmax = float(np.hypot(e.points[:, 0], e.points[:, 1]).max())
    lo = rmax
    hi = max(2 * rmax, 1.0)
    while circle_max(e, hi, samples) >= level:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise TailBoundTooLarge("no escape radius below 1e6")
    for _ in range(60):
        if hi - lo <= 1e-9 * hi:
            break
        mid = 0.5 * (lo + hi)
        if circle_max(e, mid, samples) < level:
            hi = mid
        else:
            lo = mid
    R = hi
    if e.window.kind != GAUSSIAN:
        return EscapeRadius(R, False, None, circle_max(e, R, samples))
    rd = gaussian_decay_radius(e, level)
    r = R
    while r < rd:
        r = min(r + annulus_step, rd)
        if circle_max(e, r, samples) >= level:
            R = r + annulus_step
    return EscapeRadius(R, True, rd, circle_max(e, R, samples))


def escape_radius(e: ExtensionEvaluator, delta: float, samples: int = CIRCLE_SAMPLES) -> float:
    """Escape radius R with F < 1 - delta outside it; TailBoundTooLarge without certified decay."""
    res = escape_search(e, delta, samples)
    if not res.certified:
        raise TailBoundTooLarge(f"no decay certificate for {e.window.kind} windows", value=res.radius)
    return res.radius


# --- certificates ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Certificate:
    base: list
    window: str
    rect: tuple
    step: float
    delta: float
    maximizers: list
    escape_radius: float
    escape_radius_certified: bool
    verdict: str
    extra_locations: list
    notes: list
    tolerances: dict
    quadrature: dict
    grid: FieldGrid = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "window": self.window,
            "rect": list(self.rect),
            "step": self.step,
            "delta": self.delta,
            "maximizer_clusters": [m.to_dict() for m in self.maximizers],
            "escape_radius": self.escape_radius,
            "escape_radius_certified": self.escape_radius_certified,
            "verdict": self.verdict,
            "extra_locations": self.extra_locations,
            "notes": self.notes,
            "tolerances": self.tolerances,
            "quadrature": self.quadrature,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _min_separation(points: np.ndarray) -> float:
    n = len(points)
    if n < 2:
        return math.inf
    d = np.hypot(points[:, None, 0] - points[None, :, 0], points[:, None, 1] - points[None, :, 1])
    return float(d[np.triu_indices(n, 1)].min())


def certify(e: ExtensionEvaluator, rect, delta: float = DEFAULT_DELTA, step: float = 0.05,
            threads: Optional[int] = None) -> Certificate:
    """Scan, refine maxima above 1 - delta, estimate the escape radius and issue a verdict.

    AllMaximaAtBase when every cluster sits within the cluster tolerance of a
    base point and every base point is recovered; ExtraMaximaFound when an
    off-base cluster reaches 1 within 1e-6; Inconclusive otherwise, and
    whenever two base points are closer than twice the grid step.
    """
    a0, a1, b0, b1 = map(float, rect)
    pts = e.points
    if np.any((pts[:, 0] < a0) | (pts[:, 0] > a1) | (pts[:, 1] < b0) | (pts[:, 1] > b1)):
        raise ValueError("rectangle must contain every base point")
    grid = scan(e, rect, step, threads)
    maxima = find_maximizers(e, grid, delta, threads)
    notes = []
    try:
        esc = escape_search(e, delta)
    except TailBoundTooLarge as exc:
        esc = EscapeRadius(math.nan, False, None, math.nan)
        notes.append(str(exc))
    if not esc.certified:
        notes.append("escape radius from circle sampling only; no analytic decay bound for this window")

    off, recovered = [], set()
    for m in maxima:
        d = np.hypot(pts[:, 0] - m.a, pts[:, 1] - m.b)
        k = int(np.argmin(d))
        if d[k] <= CLUSTER_TOL:
            recovered.add(k)
        else:
            off.append(m)
    extra = [m for m in off if m.value >= 1.0 - EXTRA_MAX_TOL]
    sep = _min_separation(pts)
    if extra:
        verdict = EXTRA
    elif off:
        verdict = INCONCLUSIVE
        notes.append(f"{len(off)} off-base local maxima above 1 - delta but below 1 - {EXTRA_MAX_TOL:g}")
    elif len(recovered) != len(pts) or len(maxima) != len(pts):
        verdict = INCONCLUSIVE
        notes.append("not every base point was recovered as a separate maximizer")
    else:
        verdict = AT_BASE
    if sep < 2 * step and verdict == AT_BASE:
        verdict = INCONCLUSIVE
    if sep < 2 * step:
        notes.append(f"base points {sep:.3g} apart, below twice the grid step")

    q = e.q
    return Certificate(
        base=[[float(a), float(b)] for a, b in pts],
        window=e.window.label,
        rect=(a0, a1, b0, b1),
        step=float(step),
        delta=float(delta),
        maximizers=maxima,
        escape_radius=float(esc.radius),
        escape_radius_certified=bool(esc.certified),
        verdict=verdict,
        extra_locations=[[m.a, m.b] for m in extra],
        notes=notes,
        tolerances={
            "cluster_tol": CLUSTER_TOL,
            "extra_max_tol": EXTRA_MAX_TOL,
            "refine_min_step": REFINE_MIN_STEP,
            "refine_max_iter": REFINE_MAX_ITER,
            "circle_samples": CIRCLE_SAMPLES,
            "range_slack": RANGE_SLACK,
        },
        quadrature={"abs_tol": q.abs_tol, "max_panels": q.max_panels, "oscillation_guard": q.oscillation_guard},
        grid=grid,
    )
