"""Packing problems: group shapes tightly at the sheet center without overlap.

Fitness combines the bounding-box perimeter of all shapes, the distance of
the bounding-box center from the sheet center, and heavy penalties for
pairwise overlap and for shapes protruding past the sheet.  Circle-circle
overlap is the analytic lens area; any pair involving a polygon falls back
to the penetration depth of sampled boundary points (exact intersection
areas are out of proportion to what a benchmark objective needs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EDGE_SAMPLES = 64
CIRCLE_SAMPLES = 128


@dataclass(frozen=True)
class Circle:
    radius: float

    nvars = 2


@dataclass(frozen=True)
class RegularPolygon:
    sides: int  # 3 or 4
    size: float  # circumradius

    nvars = 3

    def __post_init__(self):
        if self.sides not in (3, 4):
            raise ValueError("only triangles and squares are supported")


@dataclass(frozen=True)
class PPInstance:
    sheet: tuple[float, float]
    shapes: tuple[Circle | RegularPolygon, ...]
    lambda_center: float = 1.0
    lambda_overlap: float | None = None  # default 100 * sheet diagonal

    @property
    def dimension(self) -> int:
        return sum(s.nvars for s in self.shapes)

    @property
    def overlap_coeff(self) -> float:
        if self.lambda_overlap is not None:
            return self.lambda_overlap
        return 100.0 * math.hypot(*self.sheet)

    def split_vars(self, x: np.ndarray) -> list[np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected {self.dimension} variables, got {x.shape}")
        out, i = [], 0
        for shape in self.shapes:
            out.append(x[i : i + shape.nvars])
            i += shape.nvars
        return out


def _polygon_vertices(shape: RegularPolygon, vars_: np.ndarray) -> np.ndarray:
    cx, cy, theta = vars_
    k = np.arange(shape.sides)
    ang = theta + 2.0 * np.pi * k / shape.sides
    return np.column_stack([cx + shape.size * np.cos(ang), cy + shape.size * np.sin(ang)])


def _shape_bbox(shape, vars_: np.ndarray) -> tuple[float, float, float, float]:
    if isinstance(shape, Circle):
        cx, cy = vars_
        r = shape.radius
        return cx - r, cy - r, cx + r, cy + r
    v = _polygon_vertices(shape, vars_)
    return float(v[:, 0].min()), float(v[:, 1].min()), float(v[:, 0].max()), float(v[:, 1].max())


def _boundary_samples(shape, vars_: np.ndarray) -> np.ndarray:
    if isinstance(shape, Circle):
        cx, cy = vars_
        ang = 2.0 * np.pi * np.arange(CIRCLE_SAMPLES) / CIRCLE_SAMPLES
        return np.column_stack(
            [cx + shape.radius * np.cos(ang), cy + shape.radius * np.sin(ang)]
        )
    v = _polygon_vertices(shape, vars_)
    t = np.arange(EDGE_SAMPLES) / EDGE_SAMPLES
    segs = []
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        segs.append(a[None, :] + t[:, None] * (b - a)[None, :])
    return np.concatenate(segs, axis=0)


def _lens_area(c1, r1, c2, r2) -> float:
    d = math.hypot(c1[0] - c2[0], c1[1] - c2[1])
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        r = min(r1, r2)
        return math.pi * r * r
    a1 = r1 * r1 * math.acos((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
    a2 = r2 * r2 * math.acos((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
    k = 0.5 * math.sqrt(
        max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    )
    return a1 + a2 - k


class _ShapeState:
    """Per-evaluation geometry cache for one placed shape."""

    __slots__ = ("shape", "vars", "center", "circumradius", "verts", "bbox", "_samples", "_edges")

    def __init__(self, shape, vars_):
        self.shape = shape
        self.vars = vars_
        self.center = (float(vars_[0]), float(vars_[1]))
        self._samples = None
        self._edges = None
        if isinstance(shape, Circle):
            self.circumradius = shape.radius
            self.verts = None
            cx, cy = self.center
            r = shape.radius
            self.bbox = (cx - r, cy - r, cx + r, cy + r)
        else:
            self.circumradius = shape.size
            self.verts = _polygon_vertices(shape, vars_)
            self.bbox = (
                float(self.verts[:, 0].min()),
                float(self.verts[:, 1].min()),
                float(self.verts[:, 0].max()),
                float(self.verts[:, 1].max()),
            )

    @property
    def samples(self):
        if self._samples is None:
            if isinstance(self.shape, Circle):
                self._samples = _boundary_samples(self.shape, self.vars)
            else:
                v = self.verts
                t = np.arange(EDGE_SAMPLES) / EDGE_SAMPLES
                nxt = np.roll(v, -1, axis=0)
                pts = v[:, None, :] + t[None, :, None] * (nxt - v)[:, None, :]
                self._samples = pts.reshape(-1, 2)
        return self._samples

    @property
    def edges(self):
        """Inward unit normals (E, 2) and their anchor offsets (E,)."""
        if self._edges is None:
            v = self.verts
            center = v.mean(axis=0)
            nxt = np.roll(v, -1, axis=0)
            normals = np.column_stack([v[:, 1] - nxt[:, 1], nxt[:, 0] - v[:, 0]])
            normals /= np.hypot(normals[:, 0], normals[:, 1])[:, None]
            flip = np.einsum("ek,ek->e", normals, center[None, :] - v) < 0
            normals[flip] *= -1.0
            offsets = np.einsum("ek,ek->e", normals, v)
            self._edges = (normals, offsets)
        return self._edges


def _depth_into(points: np.ndarray, target: _ShapeState) -> float:
    if isinstance(target.shape, Circle):
        cx, cy = target.center
        d = target.shape.radius - np.hypot(points[:, 0] - cx, points[:, 1] - cy)
        return float(max(0.0, d.max()))
    normals, offsets = target.edges
    depth = (points @ normals.T - offsets[None, :]).min(axis=1)
    return float(max(0.0, depth.max()))


def pp_fitness(x: np.ndarray, instance: PPInstance) -> float:
    per_shape = instance.split_vars(x)
    states = [_ShapeState(s, v) for s, v in zip(instance.shapes, per_shape)]
    bboxes = [st.bbox for st in states]

    x0 = min(b[0] for b in bboxes)
    y0 = min(b[1] for b in bboxes)
    x1 = max(b[2] for b in bboxes)
    y1 = max(b[3] for b in bboxes)
    perimeter = 2.0 * ((x1 - x0) + (y1 - y0))

    w, h = instance.sheet
    center_dist = math.hypot((x0 + x1) / 2.0 - w / 2.0, (y0 + y1) / 2.0 - h / 2.0)

    overlap = 0.0
    n = len(states)
    for i in range(n):
        a = states[i]
        for j in range(i + 1, n):
            b = states[j]
            gap = math.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1])
            if gap >= a.circumradius + b.circumradius:
                continue
            if isinstance(a.shape, Circle) and isinstance(b.shape, Circle):
                overlap += _lens_area(a.center, a.shape.radius, b.center, b.shape.radius)
            else:
                overlap += max(_depth_into(a.samples, b), _depth_into(b.samples, a))

    # Protrusion of a convex shape past an axis-aligned sheet edge equals
    # its bbox excess, so no sampling is needed here.
    protrusion = 0.0
    for bx0, by0, bx1, by1 in bboxes:
        protrusion += max(0.0, -bx0) + max(0.0, -by0)
        protrusion += max(0.0, bx1 - w) + max(0.0, by1 - h)

    return (
        perimeter
        + instance.lambda_center * center_dist
        + instance.overlap_coeff * (overlap + protrusion)
    )


@dataclass(frozen=True)
class PPFitness:
    instance: PPInstance

    def __call__(self, x: np.ndarray) -> float:
        return pp_fitness(x, self.instance)


def pp_bounds(instance: PPInstance) -> tuple[np.ndarray, np.ndarray]:
    lb, ub = [], []
    w, h = instance.sheet
    for shape in instance.shapes:
        lb += [0.0, 0.0]
        ub += [w, h]
        if isinstance(shape, RegularPolygon):
            lb.append(-math.pi)
            ub.append(math.pi)
    return np.array(lb), np.array(ub)


def make_pp_instance(name: str) -> PPInstance:
    if name == "3c3t3s":
        shapes = (
            (Circle(1.0),) * 3
            + (RegularPolygon(3, 1.2),) * 3
            + (RegularPolygon(4, 1.0),) * 3
        )
        return PPInstance(sheet=(10.0, 10.0), shapes=shapes)
    raise ValueError(f"unknown PP layout {name!r}")
