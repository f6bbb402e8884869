"""Optimal DoF regions of the two-user MISO BC under evolving CSIT.

Every region here is the intersection of {d1 >= 0, d2 >= 0} with a small
set of half-planes a*d1 + b*d2 <= c.  Regions are stored both ways: the
half-planes are the source of truth, while the vertex list is the
closed-form corner list (deduplicated, counterclockwise, starting at the
origin).  ``enumerate_vertices`` recomputes extreme points generically
from the half-planes by pairwise intersection and feasibility filtering,
which is the oracle the corner formulas are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .quality import QualityProfile, TOL

#: geometric tolerance for vertex dedup / membership tests
GEOM_TOL = 1e-9

OPTIMAL = "optimal"
INNER_BOUND = "inner-bound"


class DofPoint(NamedTuple):
    d1: float
    d2: float


Halfplane = tuple[float, float, float]  # (a, b, c): a*d1 + b*d2 <= c


class InfeasibleError(ValueError):
    """Requested target cannot be met under the given constraint."""


@dataclass(frozen=True)
class DofRegion:
    halfplanes: tuple[Halfplane, ...]
    vertices: tuple[DofPoint, ...]
    status: str  # OPTIMAL or INNER_BOUND

    def contains(self, p: DofPoint | tuple[float, float], tol: float = GEOM_TOL) -> bool:
        return contains(self, p, tol)


# ---------------------------------------------------------------------------
# generic polygon machinery


def _dedupe(points: Iterable[tuple[float, float]], tol: float) -> list[tuple[float, float]]:
    kept: list[tuple[float, float]] = []
    for p in points:
        if not any(abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol for q in kept):
            kept.append(p)
    return kept


def _sort_ccw(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    if len(points) <= 2:
        return sorted(points)
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)
    pts = sorted(points, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    # rotate so the vertex nearest the origin (always (0,0) here) comes first
    k = min(range(len(pts)), key=lambda i: pts[i][0] ** 2 + pts[i][1] ** 2)
    return pts[k:] + pts[:k]


def enumerate_vertices(
    halfplanes: Iterable[Halfplane], tol: float = GEOM_TOL
) -> tuple[DofPoint, ...]:
    """Extreme points of {d1>=0, d2>=0} intersected with the half-planes.

    Intersects every pair of constraint boundaries and keeps the feasible
    intersection points.  Quadratic in the constraint count, which is at
    most a handful here.
    """
    cons: list[Halfplane] = [(-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)]
    cons += [tuple(map(float, h)) for h in halfplanes]
    pts: list[tuple[float, float]] = []
    for i in range(len(cons)):
        a1, b1, c1 = cons[i]
        for j in range(i + 1, len(cons)):
            a2, b2, c2 = cons[j]
            det = a1 * b2 - a2 * b1
            if abs(det) < 1e-12:
                continue
            x = (c1 * b2 - c2 * b1) / det
            y = (a1 * c2 - a2 * c1) / det
            if all(a * x + b * y <= c + tol for a, b, c in cons):
                pts.append((x, y))
    verts = _sort_ccw(_dedupe(pts, tol))
    return tuple(DofPoint(*p) for p in verts)


def contains(r: DofRegion, p: DofPoint | tuple[float, float], tol: float = GEOM_TOL) -> bool:
    """True iff p is in the region (component-wise nonnegative, all half-planes)."""
    x, y = p
    if x < -tol or y < -tol:
        return False
    return all(a * x + b * y <= c + tol for a, b, c in r.halfplanes)


def same_vertex_set(
    r: DofRegion, vertices: Iterable[tuple[float, float]], tol: float = GEOM_TOL
) -> bool:
    """Set equality of vertex lists at the geometric tolerance."""
    a = _dedupe([tuple(v) for v in r.vertices], tol)
    b = _dedupe([tuple(v) for v in vertices], tol)
    if len(a) != len(b):
        return False
    return all(
        any(abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol for q in b) for p in a
    )


def _region(halfplanes, corners, status) -> DofRegion:
    verts = _sort_ccw(_dedupe([tuple(map(float, v)) for v in corners], GEOM_TOL))
    return DofRegion(
        halfplanes=tuple(tuple(map(float, h)) for h in halfplanes),
        vertices=tuple(DofPoint(*v) for v in verts),
        status=status,
    )


def _check_unit(name: str, *vals: float) -> None:
    for v in vals:
        if not (-TOL <= v <= 1 + TOL):
            raise ValueError(f"{name} must lie in [0, 1], got {v}")


# ---------------------------------------------------------------------------
# region constructors


def region_perfect_delayed(abar: float) -> DofRegion:
    """Optimal region for symmetric current CSIT of average ``abar`` and
    perfect delayed CSIT.

    Half-planes d_i <= 1 and 2d_i + d_j <= 2 + abar; the polygon has
    corners (0,0), (0,1), (abar,1), ((2+abar)/3, (2+abar)/3), (1,abar),
    (1,0) with degenerate duplicates merged.
    """
    _check_unit("abar", abar)
    a = float(abar)
    hp = [(1, 0, 1), (0, 1, 1), (2, 1, 2 + a), (1, 2, 2 + a)]
    corners = [(0, 0), (0, 1), (a, 1), ((2 + a) / 3, (2 + a) / 3), (1, a), (1, 0)]
    return _region(hp, corners, OPTIMAL)


def beta_threshold(abar: float) -> float:
    """Delayed quality above which imperfect delayed CSIT costs nothing."""
    return (1 + 2 * abar) / 3


def region_imperfect_delayed(abar: float, beta: float) -> DofRegion:
    """Region for symmetric current CSIT with imperfect delayed CSIT.

    For beta >= (1+2*abar)/3 this equals ``region_perfect_delayed(abar)``
    and is optimal.  Below the threshold the extra sum constraint
    d1 + d2 <= 1 + beta cuts the symmetric corner and the region is only
    known to be achievable (status ``inner-bound``).
    """
    _check_unit("abar", abar)
    _check_unit("beta", beta)
    if abar > beta + TOL:
        raise ValueError(f"need abar <= beta, got abar={abar}, beta={beta}")
    a, b = float(abar), float(beta)
    if b >= beta_threshold(a) - TOL:
        return region_perfect_delayed(a)
    hp = [(1, 0, 1), (0, 1, 1), (2, 1, 2 + a), (1, 2, 2 + a), (1, 1, 1 + b)]
    corners = [
        (0, 0), (0, 1), (a, 1),
        (2 * b - a, 1 + a - b),
        (1 + a - b, 2 * b - a),
        (1, a), (1, 0),
    ]
    return _region(hp, corners, INNER_BOUND)


def region_asymmetric(abar1: float, abar2: float) -> DofRegion:
    """Optimal region for asymmetric current CSIT (abar2 <= abar1) with
    perfect delayed CSIT.

    Half-planes d_i <= 1, 2d1 + d2 <= 2 + abar1, 2d2 + d1 <= 2 + abar2.
    When 2*abar1 - abar2 < 1 the two diagonal constraints meet inside the
    unit square at C = ((2 + 2*abar1 - abar2)/3, (2 + 2*abar2 - abar1)/3);
    otherwise the d1 <= 1 face is active up to (1, (1 + abar2)/2).
    """
    _check_unit("abar1", abar1)
    _check_unit("abar2", abar2)
    if abar2 > abar1 + TOL:
        raise ValueError(f"need abar2 <= abar1, got abar1={abar1}, abar2={abar2}")
    a1, a2 = float(abar1), float(abar2)
    hp = [(1, 0, 1), (0, 1, 1), (2, 1, 2 + a1), (1, 2, 2 + a2)]
    if 2 * a1 - a2 < 1 - TOL:
        corners = [
            (0, 0), (1, 0), (1, a1),
            ((2 + 2 * a1 - a2) / 3, (2 + 2 * a2 - a1) / 3),
            (a2, 1), (0, 1),
        ]
    else:
        corners = [(0, 0), (1, 0), (1, (1 + a2) / 2), (a2, 1), (0, 1)]
    return _region(hp, corners, OPTIMAL)


def outer_bound(abar1: float, abar2: float) -> DofRegion:
    """Converse region for the asymmetric setting, vertices found generically.

    Same half-plane set as ``region_asymmetric`` but with the vertex list
    produced by ``enumerate_vertices`` rather than the corner formulas, so
    the two constructions can be cross-checked against each other.
    """
    _check_unit("abar1", abar1)
    _check_unit("abar2", abar2)
    a1, a2 = float(abar1), float(abar2)
    hp = ((1.0, 0.0, 1.0), (0.0, 1.0, 1.0), (2.0, 1.0, 2 + a1), (1.0, 2.0, 2 + a2))
    return DofRegion(halfplanes=hp, vertices=enumerate_vertices(hp), status=OPTIMAL)


# ---------------------------------------------------------------------------
# closed-form solvers (feedback/DoF trade-offs)


@dataclass(frozen=True)
class MinQuality:
    """Smallest sufficient average current quality and delayed quality for a
    symmetric DoF target."""

    abar: float
    beta: float
    note: str

    def __iter__(self):
        return iter((self.abar, self.beta))


def solve_min_quality(dprime: float) -> MinQuality:
    """Minimal (average current, delayed) exponents achieving symmetric DoF
    ``dprime`` per user: abar = 3d'-2 and beta = 2d'-1, clamped at zero.

    Targets up to 2/3 need no current CSIT at all; the full DoF d' = 1
    forces perfect, immediately available CSIT (abar = 1).
    """
    if dprime > 1 + TOL:
        raise InfeasibleError(f"symmetric DoF target {dprime} exceeds 1 per user")
    if dprime < 0:
        raise ValueError("dprime must be nonnegative")
    abar = max(0.0, 3 * dprime - 2)
    beta = max(0.0, 2 * dprime - 1)
    if dprime >= 1 - TOL:
        note = "d'=1 requires perfect and immediately available CSIT (abar=1)"
    elif dprime <= 2 / 3 + TOL:
        note = "no current CSIT needed for targets up to 2/3"
    else:
        note = ""
    return MinQuality(abar=abar, beta=beta, note=note)


def solve_max_delay(
    dprime: float,
    alpha_max: float | None = None,
    beta_max: float | None = None,
    T: int = 360,
) -> tuple[float, QualityProfile]:
    """Largest fractional feedback delay gamma achieving symmetric DoF
    ``dprime``, with the canonical zero-prefix / constant-suffix witness.

    * no constraint:      gamma = 3(1-d'), suffix exponents = beta = 1;
    * alpha_max given:    gamma = 1 - (3d'-2)/alpha_max, suffix = alpha_max,
                          beta = max(2d'-1, alpha_max);
    * beta_max given:     gamma = 1 - (3d'-2)/beta_max, suffix = beta = beta_max
                          (infeasible when beta_max < 2d'-1, since the region
                          needs delayed quality at least 2d'-1).

    The witness profile uses ``T`` slots with the zero prefix rounded down,
    so its average exponent is at least 3d'-2.
    """
    if not (2 / 3 - TOL <= dprime <= 1 + TOL):
        raise ValueError(f"dprime must lie in [2/3, 1], got {dprime}")
    if alpha_max is not None and beta_max is not None:
        raise ValueError("give at most one of alpha_max / beta_max")
    need_abar = max(0.0, 3 * dprime - 2)
    need_beta = max(0.0, 2 * dprime - 1)

    if alpha_max is None and beta_max is None:
        gamma, suffix, beta = 3 * (1 - dprime), 1.0, 1.0
    elif alpha_max is not None:
        _check_unit("alpha_max", alpha_max)
        if alpha_max < need_abar - TOL:
            raise InfeasibleError(
                f"alpha_max = {alpha_max} cannot reach the required average "
                f"exponent 3d'-2 = {need_abar}"
            )
        gamma = 1 - need_abar / alpha_max if alpha_max > 0 else 0.0
        suffix = alpha_max
        beta = max(need_beta, alpha_max)
    else:
        _check_unit("beta_max", beta_max)
        if beta_max < need_beta - TOL:
            raise InfeasibleError(
                f"beta_max = {beta_max} is below the required delayed quality "
                f"2d'-1 = {need_beta}"
            )
        gamma = 1 - need_abar / beta_max if beta_max > 0 else 1.0
        suffix = beta = beta_max

    gamma = min(1.0, max(0.0, gamma))
    prefix = int(math.floor(gamma * T + TOL))
    alphas = (0.0,) * prefix + (suffix,) * (T - prefix)
    witness = QualityProfile.make(alpha1=alphas, beta=beta)
    return gamma, witness


def asymmetry_penalty(abar: float, abar_prime: float) -> tuple[DofPoint, float]:
    """Cost of feedback-quality asymmetry to the degraded user.

    Starting from the symmetric optimum at average quality ``abar``, user 2's
    quality drops to ``abar_prime`` < ``abar`` while user 1 keeps its DoF
    (2+abar)/3.  The best pair then lies on 2*d2 + d1 = 2 + abar', i.e.

        d2 = (2 + abar')/3 - (abar - abar')/6,

    which falls short of the symmetric optimum at abar' by
    (abar - abar')/6 > 0: asymmetry hurts beyond the quality loss itself.
    """
    _check_unit("abar", abar)
    _check_unit("abar_prime", abar_prime)
    if abar_prime >= abar - TOL:
        raise ValueError(
            f"need abar_prime < abar, got abar={abar}, abar_prime={abar_prime}"
        )
    d1 = (2 + abar) / 3
    shortfall = (abar - abar_prime) / 6
    d2 = (2 + abar_prime) / 3 - shortfall
    return DofPoint(d1, d2), shortfall
