"""Problem catalog: synthetic plumbing plus the SP/EC/PP families."""

from __future__ import annotations

import json
import math

import numpy as np

from gradebench.problems.base import ProblemSpec, Ripple, RotatedQuadratic, Sphere, synth_catalog
from gradebench.problems.ergodic import (
    DIRECT,
    SPECTRAL,
    ECFitness,
    ECInstance,
    ec_fitness,
    ec_path,
    make_ec_instance,
)
from gradebench.problems.packing import (
    Circle,
    PPFitness,
    PPInstance,
    RegularPolygon,
    make_pp_instance,
    pp_bounds,
    pp_fitness,
)
from gradebench.problems.shortest_path import (
    DegeneratePathError,
    SPFitness,
    SPInstance,
    make_sp_instance,
    sp_fitness,
    sp_path,
)

__all__ = [
    "ProblemSpec",
    "Sphere",
    "Ripple",
    "RotatedQuadratic",
    "SPInstance",
    "SPFitness",
    "sp_path",
    "sp_fitness",
    "DegeneratePathError",
    "ECInstance",
    "ECFitness",
    "ec_path",
    "ec_fitness",
    "DIRECT",
    "SPECTRAL",
    "PPInstance",
    "PPFitness",
    "Circle",
    "RegularPolygon",
    "pp_fitness",
    "pp_bounds",
    "make_family",
    "catalog",
    "get_problem",
    "export_catalog_json",
]


def _sp_catalog() -> list[ProblemSpec]:
    specs = []
    for name in ("free5", "gate5", "zigzag20"):
        inst = make_sp_instance(name)
        d = inst.segments
        known = inst.span if not inst.obstacles else None
        specs.append(
            ProblemSpec(
                id=f"sp-{name}-{d}d",
                dimension=d,
                lower_bounds=np.full(d, -math.pi),
                upper_bounds=np.full(d, math.pi),
                evaluator=SPFitness(inst),
                tags=frozenset({"sp", "engineering"}),
                known_best=known,
            )
        )
    return specs


def _ec_catalog() -> list[ProblemSpec]:
    specs = []
    for kind in (DIRECT, SPECTRAL):
        inst = make_ec_instance(kind)
        d = 20
        specs.append(
            ProblemSpec(
                id=f"ec-blobs-{kind}-{d}d",
                dimension=d,
                lower_bounds=np.full(d, -math.pi),
                upper_bounds=np.full(d, math.pi),
                evaluator=ECFitness(inst),
                tags=frozenset({"ec", "engineering"}),
            )
        )
    return specs


def _pp_catalog() -> list[ProblemSpec]:
    inst = make_pp_instance("3c3t3s")
    lb, ub = pp_bounds(inst)
    return [
        ProblemSpec(
            id=f"pp-3c3t3s-{inst.dimension}d",
            dimension=inst.dimension,
            lower_bounds=lb,
            upper_bounds=ub,
            evaluator=PPFitness(inst),
            tags=frozenset({"pp", "engineering"}),
        )
    ]


_FAMILIES = {
    "synth": synth_catalog,
    "sp": _sp_catalog,
    "ec": _ec_catalog,
    "pp": _pp_catalog,
}


def make_family(family: str) -> list[ProblemSpec]:
    """Deterministic catalog of named instances for one family."""
    try:
        builder = _FAMILIES[family.lower()]
    except KeyError:
        raise ValueError(f"unknown problem family {family!r}") from None
    return builder()


def catalog() -> dict[str, ProblemSpec]:
    """All built-in instances, keyed by id.  Fresh objects on every call."""
    out: dict[str, ProblemSpec] = {}
    for family in _FAMILIES:
        for spec in make_family(family):
            out[spec.id] = spec
    return out


def get_problem(problem_id: str) -> ProblemSpec:
    specs = catalog()
    try:
        return specs[problem_id]
    except KeyError:
        raise ValueError(
            f"unknown problem id {problem_id!r}; known: {', '.join(sorted(specs))}"
        ) from None


def export_catalog_json() -> str:
    entries = [spec.describe() for spec in catalog().values()]
    entries.sort(key=lambda e: e["id"])
    return json.dumps(entries, indent=2)
