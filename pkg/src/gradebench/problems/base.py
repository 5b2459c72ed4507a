"""Bounded continuous test problems behind one evaluation interface.

Each problem is a pure, deterministic objective over a box-bounded domain.
Evaluation is counted; everything else is immutable, so problem objects can
be shipped to worker processes (counters are per-copy and summed by the
caller when needed).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np


@dataclass
class ProblemSpec:
    """A bounded D-dimensional minimization problem.

    ``evaluator`` must be a deterministic picklable callable mapping a point
    (1-D float array of length ``dimension``) to a float fitness.
    ``known_best`` feeds the best-known registry when the optimum is known
    analytically.
    """

    id: str
    dimension: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    evaluator: Callable[[np.ndarray], float]
    tags: frozenset[str] = frozenset()
    known_best: float | None = None
    eval_counter: int = field(default=0, compare=False)

    def __post_init__(self):
        self.lower_bounds = np.asarray(self.lower_bounds, dtype=float)
        self.upper_bounds = np.asarray(self.upper_bounds, dtype=float)
        if self.lower_bounds.shape != (self.dimension,) or self.upper_bounds.shape != (
            self.dimension,
        ):
            raise ValueError(f"{self.id}: bounds must have length {self.dimension}")
        if not np.all(self.lower_bounds < self.upper_bounds):
            raise ValueError(f"{self.id}: lower bounds must be strictly below upper")

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"{self.id}: expected point of dimension {self.dimension}, got shape {x.shape}"
            )
        if np.any(x < self.lower_bounds) or np.any(x > self.upper_bounds):
            raise ValueError(f"{self.id}: point outside bounds")
        self.eval_counter += 1
        return float(self.evaluator(x))

    def fresh(self) -> "ProblemSpec":
        """Copy with a zeroed evaluation counter (for per-run accounting)."""
        return replace(self, eval_counter=0)

    def describe(self) -> dict:
        """JSON-ready catalog entry (id, dimension, bounds, family tags)."""
        return {
            "id": self.id,
            "dimension": self.dimension,
            "lower_bounds": self.lower_bounds.tolist(),
            "upper_bounds": self.upper_bounds.tolist(),
            "tags": sorted(self.tags),
            "known_best": self.known_best,
        }


@dataclass(frozen=True)
class Sphere:
    """Sum of squared coordinates around an optional offset."""

    offset: tuple[float, ...] | None = None

    def __call__(self, x: np.ndarray) -> float:
        z = x if self.offset is None else x - np.asarray(self.offset)
        return float(np.dot(z, z))


@dataclass(frozen=True)
class Ripple:
    """Cosine egg-carton with a narrow low trench hidden off-center.

    The carton's local minima all sit near zero, so descent from a random
    start stalls there.  A smooth trench, windowed on a few axes, holds every
    value strictly below the carton floor; it occupies so little volume that
    only broad sampling finds it reliably.  The global minimum is -depth,
    attained where the trench window peaks on a carton lattice point, well
    away from the domain center.
    """

    offset: tuple[float, ...]
    trench_centers: tuple[float, ...] = (1.0, -2.0, 2.0)
    trench_width: float = 0.6
    amplitude: float = 3.0
    depth: float = 30.0

    def __call__(self, x: np.ndarray) -> float:
        z = x - np.asarray(self.offset)
        carton = self.amplitude * float(np.sum(1.0 - np.cos(2.0 * np.pi * z)))
        t = (z[: len(self.trench_centers)] - np.asarray(self.trench_centers)) / self.trench_width
        hat = float(np.exp(-np.sum(t**4)))
        return carton * (1.0 - 0.97 * hat) - self.depth * hat


@dataclass(frozen=True, eq=False)
class RotatedQuadratic:
    """Ill-conditioned quadratic form through a fixed rotation.

    Serves as the timing-reference objective: a dense matrix-vector product
    per evaluation gives it a stable, hardware-comparable cost.
    """

    matrix: np.ndarray
    offset: np.ndarray

    @classmethod
    def build(cls, dimension: int, seed: int, condition: float = 100.0):
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.normal(size=(dimension, dimension)))
        scales = condition ** (np.arange(dimension) / max(1, dimension - 1))
        a = q @ np.diag(scales) @ q.T
        offset = rng.uniform(-3.0, 3.0, size=dimension)
        return cls(matrix=a, offset=offset)

    def __call__(self, x: np.ndarray) -> float:
        z = x - self.offset
        return float(z @ self.matrix @ z)


RIPPLE_OFFSET_10D = (0.53, -0.37, 0.71, -0.64, 0.18, 0.42, -0.49, -0.11, 0.33, 0.58)


def synth_catalog() -> list[ProblemSpec]:
    specs = []
    for d in (3, 10, 30):
        specs.append(
            ProblemSpec(
                id=f"sphere-{d}d",
                dimension=d,
                lower_bounds=np.full(d, -5.0),
                upper_bounds=np.full(d, 5.0),
                evaluator=Sphere(),
                tags=frozenset({"synth", "unimodal"}),
                known_best=0.0,
            )
        )
    ripple = Ripple(offset=RIPPLE_OFFSET_10D)
    specs.append(
        ProblemSpec(
            id="ripple-10d",
            dimension=10,
            lower_bounds=np.full(10, -5.0),
            upper_bounds=np.full(10, 5.0),
            evaluator=ripple,
            tags=frozenset({"synth", "multimodal"}),
            known_best=-ripple.depth,
        )
    )
    specs.append(
        ProblemSpec(
            id="ref-10d",
            dimension=10,
            lower_bounds=np.full(10, -5.0),
            upper_bounds=np.full(10, 5.0),
            evaluator=RotatedQuadratic.build(10, seed=20250515),
            tags=frozenset({"synth", "unimodal", "timing-reference"}),
            known_best=0.0,
        )
    )
    return specs
