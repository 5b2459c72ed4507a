"""Benchmark harness for bounded continuous minimization.

Scores optimization methods with a nonlinear grade anchored at the
best-known solution, the median random-search result, and the median of
uniform sampling; runs the statistical convergence protocol; and produces
the post-analysis tables (staged/relative/repeat-weighted grades,
multimodality, attributes, overlap, best method sets, method properties).
"""

from gradebench.grading import (
    GMap,
    ReferencePoints,
    DegenerateReferencesError,
    alpha_for,
    g_value,
    linear_grade,
    rebase,
)

__all__ = [
    "GMap",
    "ReferencePoints",
    "DegenerateReferencesError",
    "alpha_for",
    "g_value",
    "linear_grade",
    "rebase",
]

__version__ = "0.1.0"
