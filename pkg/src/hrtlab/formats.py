"""Text formats: window spec files, point lists, number formatting, run manifests."""

from __future__ import annotations

import ast
import hashlib
import json
import math
import operator
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import InvalidSpec
from .quadrature import QuadratureSpec
from .window import HERMITE, SAMPLED, WindowSpec, canonical_kind

QUAD_TOL_ENV = "HRTLAB_QUAD_TOL"

# --- numbers -----------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_FUNCS = {"sqrt": math.sqrt}
_NAMES = {"pi": math.pi}


def parse_number(text: str) -> float:
    """Evaluate a real expression: decimals, ``pi``, ``sqrt(x)``, + - * / and parentheses."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
                and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        v = ev(tree)
    except ZeroDivisionError as exc:
        raise ValueError(f"division by zero in {text!r}") from exc
    if not math.isfinite(v):
        raise ValueError(f"{text!r} is not finite")
    return v


def parse_complex(text: str) -> complex:
    """A complex literal (``1-2j`` or ``1-2i``) or a real expression."""
    t = text.strip().replace(" ", "")
    for cand in (t, t[:-1] + "j" if t.endswith("i") else None):
        if cand:
            try:
                return complex(cand)
            except ValueError:
                pass
    return complex(parse_number(t))


def fmt(v: float) -> str:
    """12 significant digits, locale independent, always with a decimal point or exponent."""
    v = float(v)
    if v == 0.0:
        return "0.0"
    s = f"{v:.12g}"
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


# --- points ------------------------------------------------------------------

def _split_pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'a,b', got {text!r}")
    return parse_number(parts[0]), parse_number(parts[1])


def parse_pair(text: str) -> tuple[float, float]:
    return _split_pair(text)


def parse_points_text(text: str) -> list[tuple[float, float]]:
    """One ``a,b`` pair per line or separated by ``;``. ``#`` starts a comment."""
    pts = []
    for line in text.replace(";", "\n").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            pts.append(_split_pair(line))
    if not pts:
        raise ValueError("no points given")
    return pts


def load_points(arg: str) -> list[tuple[float, float]]:
    """Points from a file path or an inline list like ``0,0;0,1``."""
    p = Path(arg)
    if p.is_file():
        return parse_points_text(p.read_text())
    return parse_points_text(arg)


# --- windows -----------------------------------------------------------------

def parse_window_text(text: str) -> WindowSpec:
    """Parse ``key = value`` lines into a WindowSpec (see README for keys)."""
    kv = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"expected 'key = value', got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in kv:
            raise InvalidSpec(f"duplicate key {k!r}")
        kv[k] = v
    unknown = set(kv) - {"kind", "scale", "degree", "coeffs", "grid_start", "grid_step", "values"}
    if unknown:
        raise InvalidSpec(f"unknown keys {sorted(unknown)}")
    if "kind" not in kv:
        raise InvalidSpec("missing 'kind'")
    try:
        kind = canonical_kind(kv["kind"])
        scale = parse_number(kv["scale"]) if "scale" in kv else 1.0
        if kind == HERMITE:
            coeffs = [parse_number(c) for c in kv.get("coeffs", "").split(",") if c.strip()]
            if "degree" in kv:
                deg = int(kv["degree"])
                if deg < 0 or deg + 1 < len(coeffs):
                    raise InvalidSpec("degree is smaller than the coefficient list")
                coeffs += [0.0] * (deg + 1 - len(coeffs))
            spec = WindowSpec.hermite(coeffs, scale)
        elif kind == SAMPLED:
            values = [parse_complex(c) for c in kv.get("values", "").split(",") if c.strip()]
            spec = WindowSpec.sampled(parse_number(kv["grid_start"]), parse_number(kv["grid_step"]), values)
        else:
            spec = WindowSpec(kind=kind, scale=scale)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(str(exc)) from exc
    spec.validate()
    return spec


def load_window_spec(arg: str, scale: Optional[float] = None) -> WindowSpec:
    """A window spec from a file, or a bare kind name such as ``gaussian``."""
    p = Path(arg)
    if p.is_file():
        spec = parse_window_text(p.read_text())
    else:
        kind = canonical_kind(arg)
        if kind in (HERMITE, SAMPLED):
            raise InvalidSpec(f"{kind} windows need a spec file")
        spec = WindowSpec(kind=kind)
    if scale is not None:
        if spec.kind == SAMPLED:
            raise InvalidSpec("sampled windows have no scale")
        spec = WindowSpec(kind=spec.kind, scale=float(scale), coeffs=spec.coeffs)
        spec.validate()
    return spec


def default_quadrature() -> QuadratureSpec:
    """Default settings, with abs_tol overridable via HRTLAB_QUAD_TOL."""
    raw = os.environ.get(QUAD_TOL_ENV)
    if raw is None or raw.strip() == "":
        return QuadratureSpec()
    try:
        return QuadratureSpec(abs_tol=float(raw))
    except ValueError as exc:
        raise ValueError(f"{QUAD_TOL_ENV}={raw!r} is not a positive number") from exc


# --- manifests ---------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    inputs: dict
    tool_version: str
    started: str = field(default_factory=_now)
    finished: str = ""
    outputs: list = field(default_factory=list)

    def add_output(self, path) -> None:
        p = Path(path)
        self.outputs.append({"path": p.name, "sha256": sha256_file(p)})

    def write(self, path) -> None:
        self.finished = _now()
        Path(path).write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")


def write_text(path, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    return p


def dump_json(obj) -> str:
    """Stable JSON with every float in the 12-significant-digit format."""
    return json.dumps(_round_floats(obj), indent=2, sort_keys=True) + "\n"


def _round_floats(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(fmt(obj))
    if isinstance(obj, int):
        return obj
    if isinstance(obj, dict):
        return {str(k): _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if hasattr(obj, "item"):
        return _round_floats(obj.item())
    return obj


__all__ = [
    "parse_number", "parse_complex", "parse_pair", "parse_points_text", "load_points", "fmt",
    "parse_window_text", "load_window_spec", "default_quadrature", "RunManifest", "dump_json",
    "write_text", "sha256_file",
]
