"""Nonlinear grading of objective values against random-sampling references.

The grade maps raw objective values onto a unitless scale pinned at three
statistically defined anchors:

    +1  at the best-known objective value           (f_minus)
     0  at the median of random-search run bests    (f_circ)
    -1  at the median of uniform-sample values      (f_plus)

Between the anchors the map is logarithmic with a shape parameter ``alpha``
chosen so the middle anchor lands exactly at zero.  ``alpha`` degenerates to
a linear map when the middle anchor sits halfway between the outer two.

Values outside ``[f_minus, f_plus]`` are legal: the same formula extends the
grade below -1 until the logarithm's argument dies, after which the map is
continued linearly (and the caller is told, see ``grade_detail``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

#: Half-width of the linear bridge around rho_circ = 0.5 where the
#: closed-form alpha is singular.
EPSILON_SINGULAR = 1e-3

#: rho_circ is clamped into [CLAMP, 1 - CLAMP] before solving for alpha;
#: guards the blow-up when f_circ collapses onto one of the outer anchors.
RHO_CIRC_CLAMP = 1e-3

#: Below this the log argument is considered exhausted and the map is
#: continued by linear extrapolation.
LOG_ARG_FLOOR = 1e-12


class DegenerateReferencesError(ValueError):
    """Reference points do not satisfy f_minus < f_circ < f_plus."""


@dataclass(frozen=True)
class ReferencePoints:
    """The three anchor values, in objective-function units.

    Raises DegenerateReferencesError unless all values are finite and
    strictly ordered f_minus < f_circ < f_plus.
    """

    f_minus: float
    f_circ: float
    f_plus: float

    def __post_init__(self):
        for name in ("f_minus", "f_circ", "f_plus"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise DegenerateReferencesError(f"{name} must be finite, got {value!r}")
        if not (self.f_minus < self.f_circ < self.f_plus):
            raise DegenerateReferencesError(
                "reference points must be strictly ordered f_minus < f_circ < f_plus, "
                f"got ({self.f_minus}, {self.f_circ}, {self.f_plus})"
            )


def linear_grade(f: float, refs: ReferencePoints) -> float:
    """Linear rescaling of ``f``: 0 at f_minus, 1 at f_plus.

    Not clamped; values outside [0, 1] are legal and expected (at least half
    of a typical search domain grades above 1).
    """
    if not math.isfinite(f):
        raise ValueError(f"objective value must be finite, got {f!r}")
    return (f - refs.f_minus) / (refs.f_plus - refs.f_minus)


def alpha_for(rho_circ: float) -> float | None:
    """Shape parameter alpha for a middle anchor at linear grade ``rho_circ``.

    Returns None (the linear-map sentinel) inside the singular window
    |rho_circ - 0.5| < EPSILON_SINGULAR.  The raw value must lie in (0, 1);
    it is clamped into [RHO_CIRC_CLAMP, 1 - RHO_CIRC_CLAMP] before use.
    """
    if not (0.0 < rho_circ < 1.0):
        raise DegenerateReferencesError(
            f"linear grade of f_circ must lie in (0, 1), got {rho_circ!r}"
        )
    rho = min(max(rho_circ, RHO_CIRC_CLAMP), 1.0 - RHO_CIRC_CLAMP)
    if abs(rho - 0.5) < EPSILON_SINGULAR:
        return None
    disc = math.sqrt(max(0.0, 1.0 + 4.0 * rho * (rho - 1.0)))
    if rho < 0.5:
        beta = (1.0 + disc) / (2.0 * rho)
    else:
        beta = (1.0 - disc) / (2.0 * rho)
    return beta * beta


@dataclass(frozen=True)
class GMap:
    """A fully determined grade map: references plus derived shape state.

    ``alpha`` is None for the linear fallback; otherwise alpha > 0, != 1,
    with alpha > 1 exactly when rho_circ < 0.5.
    """

    refs: ReferencePoints
    rho_circ: float
    alpha: float | None
    epsilon_sing: float = EPSILON_SINGULAR

    @classmethod
    def from_refs(cls, refs: ReferencePoints) -> "GMap":
        # Clamp before solving: strict ordering guarantees raw in (0, 1)
        # mathematically, but float rounding can land exactly on 0 or 1.
        raw = linear_grade(refs.f_circ, refs)
        rho = min(max(raw, RHO_CIRC_CLAMP), 1.0 - RHO_CIRC_CLAMP)
        return cls(refs=refs, rho_circ=rho, alpha=alpha_for(rho))

    @property
    def is_linear(self) -> bool:
        return self.alpha is None


def grade_detail(f: float, gmap: GMap) -> tuple[float, bool]:
    """Grade ``f`` under ``gmap``; returns (grade, extrapolated).

    ``extrapolated`` is True when f fell past the point where the log
    argument goes nonpositive and the map was continued linearly with the
    slope at the last valid point.
    """
    rho = linear_grade(f, gmap.refs)
    if gmap.alpha is None:
        return 1.0 - 2.0 * rho, False
    a = gmap.alpha
    arg = rho * (a - 1.0) + 1.0
    if arg > LOG_ARG_FLOOR:
        return 1.0 - 2.0 * math.log(arg) / math.log(a), False
    # Continue past the log domain: tangent line at the floor argument.
    log_a = math.log(a)
    rho_lim = (LOG_ARG_FLOOR - 1.0) / (a - 1.0)
    g_lim = 1.0 - 2.0 * math.log(LOG_ARG_FLOOR) / log_a
    slope = -2.0 * (a - 1.0) / (log_a * LOG_ARG_FLOOR)
    return g_lim + slope * (rho - rho_lim), True


def g_value(f: float, gmap: GMap) -> float:
    """Grade of objective value ``f`` under ``gmap``.

    Monotone nonincreasing in f; hits exactly +1, 0, -1 at the three
    reference points.
    """
    return grade_detail(f, gmap)[0]


def rebase(gmap: GMap, new_f_minus: float) -> GMap:
    """Replace the best-known anchor and rederive the map.

    ``new_f_minus`` may only move downward.  Stored raw fitness values stay
    valid because grades are always recomputed from raw objective values.
    """
    refs = gmap.refs
    if not math.isfinite(new_f_minus):
        raise ValueError(f"new f_minus must be finite, got {new_f_minus!r}")
    if new_f_minus >= refs.f_circ:
        raise DegenerateReferencesError(
            f"new f_minus {new_f_minus} must stay below f_circ {refs.f_circ}"
        )
    if new_f_minus > refs.f_minus:
        raise ValueError(
            f"rebase may only lower f_minus ({new_f_minus} > {refs.f_minus})"
        )
    return GMap.from_refs(ReferencePoints(new_f_minus, refs.f_circ, refs.f_plus))
