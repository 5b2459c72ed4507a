"""Ergodic-coverage problems on the unit square.

A trajectory grown from a start point (same relative-angle parameterization
as the shortest-path family, but with a fixed per-segment length and a free
endpoint) should spend time in proportion to a prescribed goal density.
Coverage error is measured either directly, as the L1 distance between the
goal density and the normalized cell-visit histogram of points sampled
uniformly along the path, or spectrally, as a Sobolev-weighted squared
mismatch of cosine-basis coefficients.  Portions of the path leaving the
unit square accumulate a boundary penalty on top of the metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DIRECT = "direct"
SPECTRAL = "spectral"


@dataclass(frozen=True, eq=False)
class ECInstance:
    start: tuple[float, float]
    segment_length: float
    goal_density: np.ndarray  # (rows, cols), nonnegative, sums to 1
    metric_kind: str = DIRECT
    spectral_order: int = 8
    samples_per_segment: int = 10
    boundary_penalty: float = 10.0

    def __post_init__(self):
        density = np.asarray(self.goal_density, dtype=float)
        if density.ndim != 2:
            raise ValueError("goal density must be a 2-D grid")
        if np.any(density < 0):
            raise ValueError("goal density must be nonnegative")
        if abs(float(density.sum()) - 1.0) > 1e-9:
            raise ValueError("goal density must sum to 1")
        if self.metric_kind not in (DIRECT, SPECTRAL):
            raise ValueError(f"unknown metric kind {self.metric_kind!r}")
        object.__setattr__(self, "goal_density", density)
        if self.metric_kind == SPECTRAL:
            object.__setattr__(self, "_spectral_cache", _spectral_targets(self))

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.goal_density.shape


def ec_path(angles: np.ndarray, instance: ECInstance) -> np.ndarray:
    """Vertices of the coverage path ((len(angles)+1) x 2)."""
    angles = np.asarray(angles, dtype=float)
    headings = np.cumsum(angles)
    steps = instance.segment_length * np.exp(1j * headings)
    z = complex(*instance.start) + np.concatenate(([0.0 + 0.0j], np.cumsum(steps)))
    return np.column_stack([z.real, z.imag])


def _path_samples(angles: np.ndarray, instance: ECInstance) -> np.ndarray:
    """Points spaced uniformly along the path (midpoint rule per segment)."""
    pts = ec_path(angles, instance)
    spp = instance.samples_per_segment
    t = (np.arange(spp) + 0.5) / spp
    p0 = pts[:-1, None, :]
    p1 = pts[1:, None, :]
    samples = p0 + t[None, :, None] * (p1 - p0)
    return samples.reshape(-1, 2)


def _boundary_violation(samples: np.ndarray) -> float:
    clamped = np.clip(samples, 0.0, 1.0)
    return float(np.mean(np.hypot(*(samples - clamped).T)))


def _visit_histogram(samples: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    rows, cols = shape
    clamped = np.clip(samples, 0.0, 1.0)
    ix = np.minimum((clamped[:, 0] * cols).astype(int), cols - 1)
    iy = np.minimum((clamped[:, 1] * rows).astype(int), rows - 1)
    hist = np.zeros(shape)
    np.add.at(hist, (iy, ix), 1.0)
    return hist / len(samples)


@lru_cache(maxsize=None)
def _mode_weights(order: int) -> np.ndarray:
    k1, k2 = np.meshgrid(np.arange(order), np.arange(order), indexing="ij")
    return (1.0 + k1.astype(float) ** 2 + k2.astype(float) ** 2) ** -1.5


def _cosine_coefficients(points: np.ndarray, weights_per_point, order: int) -> np.ndarray:
    k = np.arange(order)[:, None]
    cx = np.cos(np.pi * k * points[None, :, 0])  # (order, N)
    cy = np.cos(np.pi * k * points[None, :, 1])
    return np.einsum("in,jn,n->ij", cx, cy, weights_per_point)


def _spectral_targets(instance: ECInstance) -> np.ndarray:
    rows, cols = instance.goal_density.shape
    centers_x = (np.arange(cols) + 0.5) / cols
    centers_y = (np.arange(rows) + 0.5) / rows
    gx, gy = np.meshgrid(centers_x, centers_y)
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    return _cosine_coefficients(
        cells, instance.goal_density.ravel(), instance.spectral_order
    )


def ec_fitness(angles: np.ndarray, instance: ECInstance) -> float:
    angles = np.asarray(angles, dtype=float)
    samples = _path_samples(angles, instance)
    penalty = instance.boundary_penalty * _boundary_violation(samples)
    if instance.metric_kind == DIRECT:
        hist = _visit_histogram(samples, instance.grid_shape)
        metric = float(np.abs(hist - instance.goal_density).sum())
    else:
        clamped = np.clip(samples, 0.0, 1.0)
        uniform = np.full(len(clamped), 1.0 / len(clamped))
        coeffs = _cosine_coefficients(clamped, uniform, instance.spectral_order)
        lam = _mode_weights(instance.spectral_order)
        metric = float(np.sum(lam * (coeffs - instance._spectral_cache) ** 2))
    return metric + penalty


@dataclass(frozen=True, eq=False)
class ECFitness:
    instance: ECInstance

    def __call__(self, x: np.ndarray) -> float:
        return ec_fitness(x, self.instance)


def blob_density(shape: tuple[int, int] = (24, 24)) -> np.ndarray:
    """Two off-center Gaussian blobs, normalized to a discrete distribution."""
    rows, cols = shape
    x = (np.arange(cols) + 0.5) / cols
    y = (np.arange(rows) + 0.5) / rows
    gx, gy = np.meshgrid(x, y)
    blobs = np.exp(-((gx - 0.3) ** 2 + (gy - 0.7) ** 2) / (2 * 0.12**2)) + 0.7 * np.exp(
        -((gx - 0.75) ** 2 + (gy - 0.25) ** 2) / (2 * 0.1**2)
    )
    return blobs / blobs.sum()


def make_ec_instance(metric_kind: str, segments: int = 20) -> ECInstance:
    """The direct/spectral pair shares start, step and density."""
    return ECInstance(
        start=(0.15, 0.15),
        segment_length=1.8 / segments,
        goal_density=blob_density(),
        metric_kind=metric_kind,
    )
