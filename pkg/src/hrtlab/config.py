"""Finite time-frequency point sets: validation, geometry, symplectic normal forms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DegenerateConfig, DuplicatePoint, NotOneN
from .transform import TFPoint

COLLINEAR = "Collinear"
NM_CONFIG = "NMConfig"
GENERAL = "General"


@dataclass(frozen=True)
class Configuration:
    points: tuple
    geom_tol: float = 1e-9

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def array(self) -> np.ndarray:
        """Points as an ``(N, 2)`` float array."""
        return np.array([[p.a, p.b] for p in self.points], dtype=float).reshape(-1, 2)

    def as_lists(self) -> list:
        return [[p.a, p.b] for p in self.points]

    def sorted(self) -> "Configuration":
        return Configuration(tuple(sorted(self.points, key=lambda p: (p.a, p.b))), self.geom_tol)

    def permuted(self, order: Sequence[int]) -> "Configuration":
        return Configuration(tuple(self.points[i] for i in order), self.geom_tol)

    def with_point(self, a: float, b: float) -> "Configuration":
        """Append a point without the distinctness check (it may repeat one)."""
        return Configuration(self.points + (TFPoint(float(a), float(b)),), self.geom_tol)


def _as_point(p) -> TFPoint:
    if isinstance(p, TFPoint):
        return p
    a, b = p
    return TFPoint(float(a), float(b))


def validate(points: Iterable, geom_tol: float = 1e-9) -> Configuration:
    """Build a Configuration, rejecting points closer than ``geom_tol``."""
    pts = tuple(_as_point(p) for p in points)
    if not pts:
        raise ValueError("configuration must contain at least one point")
    arr = np.array([[p.a, p.b] for p in pts])
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if math.hypot(*(arr[i] - arr[j])) <= geom_tol:
                raise DuplicatePoint(i, j, arr[i])
    return Configuration(pts, geom_tol)


def unchecked(points: Iterable, geom_tol: float = 1e-9) -> Configuration:
    """Configuration without the distinctness check (test harnesses only)."""
    return Configuration(tuple(_as_point(p) for p in points), geom_tol)


@dataclass(frozen=True)
class SymplecticMap:
    """Affine area-preserving map p -> linear @ p + shift."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float).reshape(2, 2)
        sh = np.asarray(self.shift, dtype=float).reshape(2)
        if abs(np.linalg.det(lin) - 1.0) > 1e-12:
            raise ValueError(f"linear part has determinant {np.linalg.det(lin)!r}, not 1")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "shift", sh)

    @classmethod
    def identity(cls) -> "SymplecticMap":
        return cls(np.eye(2), np.zeros(2))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def inverse(self) -> "SymplecticMap":
        (p, q), (r, s) = self.linear
        inv = np.array([[s, -q], [-r, p]])  # adjugate; det = 1
        return SymplecticMap(inv, -inv @ self.shift)

    def compose(self, other: "SymplecticMap") -> "SymplecticMap":
        """self after other."""
        return SymplecticMap(self.linear @ other.linear, self.linear @ other.shift + self.shift)

    def __call__(self, p) -> np.ndarray:
        return self.linear @ np.asarray(p, dtype=float) + self.shift

    def to_dict(self) -> dict:
        return {"linear": self.linear.tolist(), "shift": self.shift.tolist()}


def apply_map(m: SymplecticMap, c: Configuration) -> Configuration:
    img = c.array @ m.linear.T + m.shift
    return Configuration(tuple(TFPoint(float(a), float(b)) for a, b in img), c.geom_tol)


@dataclass(frozen=True)
class Classification:
    kind: str
    n: Optional[int] = None
    m: Optional[int] = None
    line1: tuple = ()
    line2: tuple = ()
    witness: dict = field(default_factory=dict)

    def __str__(self):
        if self.kind == NM_CONFIG:
            return f"NMConfig({self.n},{self.m})"
        return self.kind

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "label": str(self)}
        if self.kind == NM_CONFIG:
            d.update(n=self.n, m=self.m, line1=list(self.line1), line2=list(self.line2))
        d["witness"] = self.witness
        return d


def _offset_clusters(offsets: np.ndarray, tol: float) -> list:
    """Group indices whose offsets chain together within ``tol``."""
    order = np.argsort(offsets, kind="stable")
    groups = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if offsets[cur] - offsets[prev] > tol:
            groups.append([])
        groups[-1].append(int(cur))
    return groups


def _angle(d: np.ndarray) -> float:
    ang = math.atan2(d[1], d[0]) % math.pi
    return 0.0 if math.isclose(ang, math.pi, abs_tol=1e-15) else ang


def classify(c: Configuration) -> Classification:
    """Collinear, (n, m) configuration (n <= m), or General.

    Candidate directions are those of every point pair. Among valid
    two-line covers the one with the largest m wins, then the smallest
    direction angle in [0, pi).
    """
    pts = c.array
    n_pts = len(pts)
    tol = c.geom_tol
    if n_pts <= 2:
        return Classification(COLLINEAR, witness={"reason": "at most two points"})

    best = None
    for i in range(n_pts):
        for j in range(i + 1, n_pts):
            d = pts[j] - pts[i]
            d = d / math.hypot(*d)
            normal = np.array([-d[1], d[0]])
            offsets = pts @ normal
            groups = _offset_clusters(offsets, tol)
            ang = _angle(d)
            if len(groups) == 1:
                return Classification(COLLINEAR, witness={"angle": ang, "offset": float(np.mean(offsets))})
            if len(groups) != 2:
                continue
            g1, g2 = sorted(groups, key=lambda g: (len(g), float(np.mean(offsets[g]))))
            key = (-len(g2), ang)
            if best is None or key < best[0]:
                best = (key, g1, g2, ang, float(np.mean(offsets[g1])), float(np.mean(offsets[g2])))
    if best is None:
        return Classification(GENERAL)
    _, g1, g2, ang, o1, o2 = best
    return Classification(
        NM_CONFIG, n=len(g1), m=len(g2), line1=tuple(sorted(g1)), line2=tuple(sorted(g2)),
        witness={"angle": ang, "offset1": o1, "offset2": o2},
    )


def normalize_three(c: Configuration) -> tuple[SymplecticMap, Configuration]:
    """Map (p1, p2, p3) to {(0,0), (0,1), (a,b)} by a shift and an SL(2,R) matrix."""
    if len(c) != 3:
        raise ValueError("normalize_three needs exactly three points")
    p = c.array
    v = p[1] - p[0]
    nsq = float(v @ v)
    if nsq == 0.0:
        raise DegenerateConfig("first two points coincide")
    lin = np.array([[v[1], -v[0]], [v[0] / nsq, v[1] / nsq]])
    m = SymplecticMap(lin, -lin @ p[0])
    img = apply_map(m, c)
    # the first two images are exact by construction; pin away round-off
    pts = (TFPoint(0.0, 0.0), TFPoint(0.0, 1.0), img.points[2])
    return m, Configuration(pts, c.geom_tol)


def normalize_1n(c: Configuration) -> tuple[SymplecticMap, Configuration]:
    """Map a (1, n) configuration to {(0,1)} and points (a_k, 0) on the horizontal axis.

    The first-listed point on the n-point line goes to the origin; the
    off-line point goes to (0, 1). Point order is preserved.
    """
    cls = classify(c)
    if cls.kind != NM_CONFIG or cls.n != 1:
        raise NotOneN(f"configuration is {cls}, not a (1,n) configuration")
    p = c.array
    line = list(cls.line2)
    anchor, second = p[line[0]], p[line[1]]
    u = (second - anchor) / math.hypot(*(second - anchor))
    off = p[cls.line1[0]]
    w = off - anchor
    D = u[0] * w[1] - u[1] * w[0]
    basis = np.column_stack([u, w])
    lin = np.diag([D, 1.0]) @ np.linalg.inv(basis)
    m = SymplecticMap(lin, -lin @ anchor)
    # images written exactly rather than through the matrix product
    pts = []
    for k in range(len(p)):
        if k == cls.line1[0]:
            pts.append(TFPoint(0.0, 1.0))
        elif k == line[0]:
            pts.append(TFPoint(0.0, 0.0))
        else:
            pts.append(TFPoint(float(D * ((p[k] - anchor) @ u)), 0.0))
    return m, Configuration(tuple(pts), c.geom_tol)
