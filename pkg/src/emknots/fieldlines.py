"""Integral curves of the knot fields at fixed time.

Field lines are traced as unit-tangent curves dx/ds = F(x)/|F(x)| with an
adaptive 4th/5th-order Runge-Kutta stepper, so the step control is purely
geometric even though the field magnitude varies by orders of magnitude
along a knotted line.  Closure is detected by returning near the seed with
an aligned tangent; both conditions together avoid false positives at the
self-near passes of knotted curves.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import minimize_scalar

from .geometry import MinkowskiEvent
from .knotfield import ModeCoefficients, minkowski_fields

__all__ = [
    "ZeroFieldError",
    "TraceRequest",
    "Polyline",
    "trace",
    "seed_grid",
    "polyline_to_json",
    "polyline_to_csv",
]


class ZeroFieldError(ValueError):
    """Seed placed where the selected field effectively vanishes."""


@dataclass(frozen=True)
class TraceRequest:
    """Inputs of one field-line trace."""

    modes: ModeCoefficients
    field: str = "B"
    t: float = 0.0
    seed: Sequence[float] = (1.0, 0.0, 0.0)
    max_arc_length: float | None = None
    step_tolerance: float = 1e-10
    closure_tolerance: float = 1e-3
    nominal_step: float | None = None

    def __post_init__(self):
        if self.field not in ("E", "B"):
            raise ValueError("field must be 'E' or 'B'")
        if self.step_tolerance <= 0 or self.closure_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        seed = np.asarray(self.seed, float)
        if seed.shape != (3,) or not np.all(np.isfinite(seed)):
            raise ValueError("seed must be a finite 3-vector")
        object.__setattr__(self, "seed", seed)

    @property
    def arc_limit(self) -> float:
        return self.max_arc_length if self.max_arc_length is not None else 50.0 * self.modes.ell

    @property
    def step(self) -> float:
        return self.nominal_step if self.nominal_step is not None else 0.02 * self.modes.ell


@dataclass(frozen=True)
class Polyline:
    """Traced curve: arc-length samples, points, and how the trace ended."""

    points: np.ndarray
    arc: np.ndarray
    closed: bool
    field: str
    seed: np.ndarray
    termination: str
    nominal_step: float

    @property
    def arc_length(self) -> float:
        return float(self.arc[-1])


def _field_at(modes: ModeCoefficients, which: str, t: float, xyz: np.ndarray) -> np.ndarray:
    ev = MinkowskiEvent(t, xyz[0], xyz[1], xyz[2])
    fld = minkowski_fields(modes, ev)
    return fld.electric if which == "E" else fld.magnetic


def _field_scale(modes: ModeCoefficients) -> float:
    """Characteristic field amplitude used by the zero-field guard."""
    return float(modes.omega) ** 2 * math.sqrt(modes.norm_sq()) / modes.ell**2


def trace(request: TraceRequest) -> Polyline:
    """Integrate one field line until closure, the arc limit, or a null.

    Closure requires passing within the closure tolerance of the seed with a
    tangent whose cosine against the seed tangent exceeds 0.999, and at
    least ten nominal steps of arc; near-passes are refined on the stepper's
    dense output before deciding.
    """
    modes = request.modes
    scale = _field_scale(modes)
    seed = np.asarray(request.seed, float)
    f0 = _field_at(modes, request.field, request.t, seed)
    if np.linalg.norm(f0) <= 1e-12 * scale:
        raise ZeroFieldError(f"{request.field}-field vanishes at seed {seed.tolist()}")
    tangent0 = f0 / np.linalg.norm(f0)

    def rhs(_s, x):
        f = np.atleast_2d(_field_at(modes, request.field, request.t, x))[0]
        norm = np.linalg.norm(f)
        if norm <= 1e-13 * scale:
            raise _NullInterior(x)
        return f / norm

    solver = RK45(
        rhs, 0.0, seed, t_bound=request.arc_limit,
        max_step=request.step, rtol=request.step_tolerance, atol=request.step_tolerance,
    )
    pts = [seed.copy()]
    arcs = [0.0]
    closed = False
    termination = "max_arc_length"
    capture = max(3.0 * request.step, 2.0 * request.closure_tolerance)
    min_arc = 10.0 * request.step
    while solver.status == "running":
        try:
            solver.step()
        except _NullInterior as stuck:
            pts.append(np.asarray(stuck.point, float))
            arcs.append(float(solver.t))
            termination = "step_underflow"
            break
        if solver.status == "failed":
            termination = "step_underflow"
            break
        pts.append(solver.y.copy())
        arcs.append(float(solver.t))
        if solver.t > min_arc and np.linalg.norm(solver.y - seed) < capture:
            dense = solver.dense_output()
            res = minimize_scalar(
                lambda s: float(np.linalg.norm(dense(s) - seed)),
                bounds=(dense.t_min, dense.t_max), method="bounded",
                options={"xatol": 1e-12},
            )
            best = dense(res.x)
            if np.linalg.norm(best - seed) < request.closure_tolerance:
                tangent = rhs(res.x, best)
                if float(np.dot(tangent, tangent0)) > 0.999:
                    pts.append(np.asarray(best, float))
                    arcs.append(float(res.x))
                    closed = True
                    termination = "closed"
                    break
        if solver.status == "finished":
            termination = "max_arc_length"
    return Polyline(
        points=np.asarray(pts),
        arc=np.asarray(arcs),
        closed=closed,
        field=request.field,
        seed=seed,
        termination=termination,
        nominal_step=request.step,
    )


class _NullInterior(Exception):
    def __init__(self, point):
        super().__init__("field null encountered in the interior")
        self.point = point


def seed_grid(spec) -> np.ndarray:
    """Deterministic seed layouts.

    Accepts ``{"shell": {"radius": r, "count": n}}`` (Fibonacci sphere),
    ``{"box": {"bounds": (x0, x1, y0, y1, z0, z1), "counts": (nx, ny, nz)}}``,
    or the CLI string forms ``shell:R:N`` and ``box:x0,x1,y0,y1,z0,z1:nx,ny,nz``.
    """
    if isinstance(spec, str):
        spec = _parse_seed_string(spec)
    if "shell" in spec:
        radius = float(spec["shell"]["radius"])
        count = int(spec["shell"]["count"])
        if count < 1 or radius <= 0:
            raise ValueError("shell spec needs a positive radius and count")
        k = np.arange(count)
        golden = math.pi * (3.0 - math.sqrt(5.0))
        zline = 1.0 - 2.0 * (k + 0.5) / count
        rad = np.sqrt(1.0 - zline**2)
        ang = golden * k
        return radius * np.stack([rad * np.cos(ang), rad * np.sin(ang), zline], axis=1)
    if "box" in spec:
        x0, x1, y0, y1, z0, z1 = (float(v) for v in spec["box"]["bounds"])
        nx, ny, nz = (int(v) for v in spec["box"]["counts"])
        if min(nx, ny, nz) < 1:
            raise ValueError("box counts must be positive")
        xs = np.linspace(x0, x1, nx)
        ys = np.linspace(y0, y1, ny)
        zs = np.linspace(z0, z1, nz)
        gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    raise ValueError("seed spec must contain 'shell' or 'box'")


def _parse_seed_string(text: str) -> dict:
    parts = text.split(":")
    if parts[0] == "shell" and len(parts) == 3:
        return {"shell": {"radius": float(parts[1]), "count": int(parts[2])}}
    if parts[0] == "box" and len(parts) == 3:
        bounds = [float(v) for v in parts[1].split(",")]
        counts = [int(v) for v in parts[2].split(",")]
        if len(bounds) != 6 or len(counts) != 3:
            raise ValueError("box spec is box:x0,x1,y0,y1,z0,z1:nx,ny,nz")
        return {"box": {"bounds": bounds, "counts": counts}}
    raise ValueError(f"cannot parse seed spec {text!r}")


def polyline_to_json(line: Polyline, t: float | None = None) -> str:
    doc = {
        "field": line.field,
        "seed": [float(v) for v in line.seed],
        "closed": bool(line.closed),
        "termination": line.termination,
        "arc_length": line.arc_length,
        "points": [[float(v) for v in p] for p in line.points],
    }
    if t is not None:
        doc["t"] = t
    return json.dumps(doc, indent=2) + "\n"


def polyline_to_csv(line: Polyline) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["s", "x", "y", "z"])
    for s, p in zip(line.arc, line.points):
        writer.writerow([repr(float(s))] + [repr(float(v)) for v in p])
    return buf.getvalue()
