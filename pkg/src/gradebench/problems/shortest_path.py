"""Shortest-path problems: a fixed-endpoint polyline dodging circular obstacles.

The path is a chain of equal-length segments described by relative heading
angles.  A unit-segment polyline is grown from the origin with initial
heading zero, then the unique similarity transform (rotation, uniform scale,
translation) maps its endpoints onto the requested start and end.  Fitness
is path length plus a penalty proportional to the chord length of every
segment portion that cuts through an obstacle, so zero penalty means
collision-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEGENERATE_CHORD_FRACTION = 1e-6
DEGENERATE_FITNESS_FACTOR = 1e3


class DegeneratePathError(ValueError):
    """The unit polyline's endpoints (nearly) coincide; no similarity exists."""


@dataclass(frozen=True)
class SPInstance:
    start: tuple[float, float]
    end: tuple[float, float]
    obstacles: tuple[tuple[tuple[float, float], float], ...]
    segments: int
    penalty_coeff: float

    def __post_init__(self):
        if self.segments < 2:
            raise ValueError("need at least 2 segments")
        if tuple(self.start) == tuple(self.end):
            raise ValueError("start and end must differ")
        for _, radius in self.obstacles:
            if radius <= 0:
                raise ValueError("obstacle radius must be positive")

    @property
    def span(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


def sp_path(angles: np.ndarray, instance: SPInstance) -> np.ndarray:
    """Polyline vertices ((segments+1) x 2) through start and end."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (instance.segments,):
        raise ValueError(f"expected {instance.segments} angles, got {angles.shape}")
    headings = np.cumsum(angles)
    steps = np.exp(1j * headings)
    unit = np.concatenate(([0.0 + 0.0j], np.cumsum(steps)))
    chord = unit[-1]
    if abs(chord) < DEGENERATE_CHORD_FRACTION * instance.segments:
        raise DegeneratePathError(f"unit chord {abs(chord):.3e} too short")
    target = complex(instance.end[0] - instance.start[0], instance.end[1] - instance.start[1])
    w = target / chord
    mapped = complex(instance.start[0], instance.start[1]) + unit * w
    return np.column_stack([mapped.real, mapped.imag])


def _chords_inside_circles(pts: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> float:
    """Total length of all segment portions inside any of the circles."""
    d = pts[1:] - pts[:-1]  # (S, 2)
    a = np.einsum("sk,sk->s", d, d)  # (S,)
    f = pts[None, :-1, :] - centers[:, None, :]  # (O, S, 2)
    b = 2.0 * np.einsum("osk,sk->os", f, d)
    c = np.einsum("osk,osk->os", f, f) - (radii**2)[:, None]
    disc = b * b - 4.0 * a[None, :] * c
    hit = disc > 0.0
    if not np.any(hit):
        return 0.0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    denom = 2.0 * np.where(a > 0.0, a, 1.0)[None, :]
    t0 = np.maximum((-b - sq) / denom, 0.0)
    t1 = np.minimum((-b + sq) / denom, 1.0)
    span = np.where(hit, np.maximum(t1 - t0, 0.0), 0.0)
    return float(np.sum(span * np.sqrt(a)[None, :]))


def sp_fitness(angles: np.ndarray, instance: SPInstance) -> float:
    """Path length plus obstacle-penetration penalty; finite for any input."""
    try:
        pts = sp_path(angles, instance)
    except DegeneratePathError:
        return DEGENERATE_FITNESS_FACTOR * instance.span
    seg_vecs = np.diff(pts, axis=0)
    length = float(np.sum(np.hypot(seg_vecs[:, 0], seg_vecs[:, 1])))
    penalty = 0.0
    if instance.obstacles:
        centers = np.array([c for c, _ in instance.obstacles], dtype=float)
        radii = np.array([r for _, r in instance.obstacles], dtype=float)
        penalty = _chords_inside_circles(pts, centers, radii)
    return length + instance.penalty_coeff * penalty


@dataclass(frozen=True)
class SPFitness:
    """Picklable evaluator wrapper for one instance."""

    instance: SPInstance

    def __call__(self, x: np.ndarray) -> float:
        return sp_fitness(x, self.instance)


def make_sp_instance(name: str) -> SPInstance:
    """Named layouts: 'free5' (no obstacles), 'gate5' (one blocking circle),
    'zigzag20' (staggered wall of circles)."""
    if name == "free5":
        return SPInstance(
            start=(0.0, 0.0), end=(5.0, 0.0), obstacles=(), segments=5, penalty_coeff=50.0
        )
    if name == "gate5":
        return SPInstance(
            start=(0.0, 0.0),
            end=(5.0, 0.0),
            obstacles=(((2.5, 0.0), 0.8),),
            segments=5,
            penalty_coeff=50.0,
        )
    if name == "zigzag20":
        # Alternating half-walls force the path into an S-shaped corridor.
        obstacles = []
        for i, x in enumerate((2.0, 4.0, 6.0, 8.0)):
            ys = (1.2, 2.8) if i % 2 == 0 else (-0.4, -2.0)
            for y in ys:
                obstacles.append(((x, y), 0.75))
        return SPInstance(
            start=(0.0, 0.0),
            end=(10.0, 0.0),
            obstacles=tuple(obstacles),
            segments=20,
            penalty_coeff=100.0,
        )
    raise ValueError(f"unknown SP layout {name!r}")
