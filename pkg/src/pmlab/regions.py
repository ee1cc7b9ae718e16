"""Subcritical-region extraction and the quantitative front checks.

A slope field is subcritical where |u_x| < 1.  This module extracts the
maximal subcritical (or supercritical) intervals of a snapshot from midpoint
gradients, verifies the three quantitative front claims at the discrete level (region
monotonicity, cone expansion at rate k0, the sup-gradient lower bound), and
measures front speeds against the formal interface ODE.

Interval semantics: "contains up to s cells of slack" always means
containment in the union of the intervals dilated by s*h on both sides, so
isolated single-face defects narrower than the slack do not count.  This is
the natural reading for a scheme whose supercritical remnants are
single-face staircase jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, RangeError, TrackingError
from .nonlinearity import DerivedConstants, NonlinearityProfile, constants
from .solvers import Field1D, Trajectory

Interval = tuple[float, float]


# ---------------------------------------------------------------------------
# region snapshots


@dataclass(frozen=True)
class RegionSnapshot:
    """Maximal open intervals of one regime at a fixed time."""

    time: float
    intervals: tuple[Interval, ...]
    domain: Interval
    regime: str = "subcritical"


def _crossing(x1, g1, x2, g2, level):
    """Linear-interpolation root of g = level between two midpoints."""
    return x1 + (level - g1) * (x2 - x1) / (g2 - g1)


def _intervals_from_gradients(x, g, inside, domain):
    """Assemble maximal intervals of the 'inside' state with interpolated ends."""
    intervals = []
    start = None
    for i in range(len(x)):
        if inside[i] and start is None:
            if i == 0:
                start = domain[0]
            else:
                start = _boundary_between(x[i - 1], g[i - 1], x[i], g[i], inside[i])
        elif not inside[i] and start is not None:
            end = _boundary_between(x[i - 1], g[i - 1], x[i], g[i], inside[i])
            intervals.append((start, end))
            start = None
    if start is not None:
        intervals.append((start, domain[1]))
    return tuple(intervals)


def _boundary_between(x1, g1, x2, g2, entering):
    """Crossing of |g| = 1 between adjacent midpoints with a state change.

    A linear segment changing state crosses exactly one of the two levels
    +1 / -1; pick the level actually bracketed.
    """
    for level in (1.0, -1.0):
        if (g1 - level) == 0.0 and (g2 - level) == 0.0:
            continue
        if (g1 - level) * (g2 - level) < 0.0 or g1 == level or g2 == level:
            c = _crossing(x1, g1, x2, g2, level)
            if min(x1, x2) <= c <= max(x1, x2):
                return c
    # no bracketed level (grazing contact): fall back to the segment midpoint
    return 0.5 * (x1 + x2)


def subcritical_intervals(
    fld: Field1D, profile: NonlinearityProfile, regime: str = "subcritical"
) -> RegionSnapshot:
    """Maximal open intervals where |gradient| < 1 (or > 1 for supercritical).

    Gradients live at cell midpoints; interval ends are interpolated
    crossings of |gradient| = 1, exact for gradients linear between
    midpoints.
    """
    if regime not in ("subcritical", "supercritical"):
        raise DomainError("regime must be subcritical or supercritical")
    crit = profile.sigma_critical
    x = fld.grid.midpoints()
    g = fld.face_gradients() / crit
    inside = np.abs(g) < 1.0 if regime == "subcritical" else np.abs(g) > 1.0
    domain = (fld.grid.a, fld.grid.b)
    return RegionSnapshot(
        time=fld.time,
        intervals=_intervals_from_gradients(x, g, inside, domain),
        domain=domain,
        regime=regime,
    )


def region_snapshots(traj: Trajectory, profile, regime: str = "subcritical"):
    return [subcritical_intervals(s, profile, regime) for s in traj.snapshots]


# ---------------------------------------------------------------------------
# interval algebra


def merge_dilated(intervals, slack, domain):
    """Union of the intervals dilated by ``slack``, clipped to the domain."""
    if not intervals:
        return []
    spans = sorted((max(l - slack, domain[0]), min(r + slack, domain[1])) for l, r in intervals)
    merged = [list(spans[0])]
    for lo, hi in spans[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def uncovered_length(target: Interval, cover) -> float:
    """Measure of target \\ union(cover)."""
    lo, hi = target
    if hi <= lo:
        return 0.0
    missing = 0.0
    cursor = lo
    for a, b in cover:
        if b <= cursor:
            continue
        if a >= hi:
            break
        if a > cursor:
            missing += a - cursor
        cursor = max(cursor, b)
        if cursor >= hi:
            return missing
    missing += max(0.0, hi - cursor)
    return missing


# ---------------------------------------------------------------------------
# monotone inclusion of subcritical regions


@dataclass(frozen=True)
class InclusionReport:
    passed: bool
    worst_uncovered: float
    worst_pair: tuple[float, float] | None
    pairs_checked: int
    slack: float


def check_monotone_inclusion(
    traj: Trajectory,
    profile: NonlinearityProfile,
    slack_cells: int = 2,
    regime: str = "subcritical",
    reverse_time: bool = False,
) -> InclusionReport:
    """Check I(s) dilated-covered by I(t) for every snapshot pair s < t.

    ``reverse_time`` checks the opposite inclusion I(t) within I(s), which is
    the expected behaviour of supercritical regions.
    """
    snaps = region_snapshots(traj, profile, regime)
    return inclusion_from_snapshots(snaps, traj.grid.spacing, slack_cells, reverse_time)


def inclusion_from_snapshots(snaps, spacing, slack_cells=2, reverse_time=False):
    slack = slack_cells * spacing
    worst = 0.0
    worst_pair = None
    pairs = 0
    for i in range(len(snaps)):
        for j in range(i + 1, len(snaps)):
            early, late = (snaps[j], snaps[i]) if reverse_time else (snaps[i], snaps[j])
            cover = merge_dilated(late.intervals, slack, late.domain)
            pairs += 1
            for interval in early.intervals:
                miss = uncovered_length(interval, cover)
                if miss > worst:
                    worst = miss
                    worst_pair = (early.time, late.time)
    return InclusionReport(
        passed=worst <= 1e-12,
        worst_uncovered=worst,
        worst_pair=worst_pair,
        pairs_checked=pairs,
        slack=slack,
    )


# ---------------------------------------------------------------------------
# front tracking


@dataclass
class FrontTrajectory:
    times: list[float] = field(default_factory=list)
    positions: list[float] = field(default_factory=list)
    orientation: str = "subcritical_left"
    status: str = "active"

    def as_arrays(self):
        return np.asarray(self.times), np.asarray(self.positions)


def _interval_containing(intervals, x):
    for l, r in intervals:
        if l <= x <= r:
            return (l, r)
    return None


def track_front(
    traj: Trajectory,
    profile: NonlinearityProfile,
    anchor: float,
    side: str = "right",
    mode: str = "strict",
    slack_cells: int = 2,
) -> FrontTrajectory:
    """Follow one endpoint of the subcritical interval containing ``anchor``.

    ``mode="strict"`` follows the literal interpolated crossing and ends the
    track with status ``"merged"`` when the adjacent supercritical interval
    collapses (the endpoint leaps past it), or ``"exited"`` at the domain
    edge.  ``mode="cover"`` follows the endpoint of the slack-dilated
    subcritical cover, ignoring single-face remnants; it only terminates at
    the domain edge.
    """
    if side not in ("left", "right"):
        raise DomainError("side must be left or right")
    if mode not in ("strict", "cover"):
        raise DomainError("mode must be strict or cover")
    orientation = "subcritical_left" if side == "right" else "subcritical_right"
    out = FrontTrajectory(orientation=orientation)
    grid = traj.grid
    slack = slack_cells * grid.spacing
    prev_gap_end = None
    for snap_field in traj.snapshots:
        snap = subcritical_intervals(snap_field, profile)
        if mode == "cover":
            cover = merge_dilated(snap.intervals, slack, snap.domain)
            hit = _interval_containing(cover, anchor)
        else:
            hit = _interval_containing(snap.intervals, anchor)
        if hit is None:
            if not out.times:
                raise TrackingError(f"no subcritical interval contains {anchor:g} at t=0")
            out.status = "lost"
            break
        pos = hit[1] if side == "right" else hit[0]
        if mode == "strict" and out.times:
            if prev_gap_end is not None:
                swallowed = pos > prev_gap_end if side == "right" else pos < prev_gap_end
                if swallowed:
                    out.status = "merged"
                    break
        out.times.append(snap_field.time)
        out.positions.append(pos)
        edge = snap.domain[1] if side == "right" else snap.domain[0]
        if abs(pos - edge) <= slack:
            out.status = "exited"
            break
        if mode == "strict":
            gap = _adjacent_gap(snap, pos, side)
            prev_gap_end = gap
    return out


def _adjacent_gap(snap: RegionSnapshot, pos, side):
    """Far end of the supercritical gap adjacent to the front, if any."""
    nexts = []
    for l, r in snap.intervals:
        if side == "right" and l > pos:
            nexts.append(l)
        if side == "left" and r < pos:
            nexts.append(r)
    if not nexts:
        return None
    return min(nexts) if side == "right" else max(nexts)


def measured_speed(front: FrontTrajectory, window: float) -> np.ndarray:
    """Least-squares slope of position over a sliding time window.

    Returns rows (t_center, speed); empty when no window holds 3 samples.
    """
    t, p = front.as_arrays()
    rows = []
    for i in range(len(t)):
        mask = np.abs(t - t[i]) <= window / 2.0
        if mask.sum() >= 3:
            slope = np.polyfit(t[mask], p[mask], 1)[0]
            rows.append((t[i], slope))
    return np.asarray(rows).reshape(-1, 2)


def heuristic_speed(
    fld: Field1D,
    profile: NonlinearityProfile,
    front_position: float,
    model: str = "pm1d",
) -> float:
    """Formal interface-ODE speed at the front.

    1D: -phi'''(1) u_xx(front).  Radial: phi'(1)/(r^2 u_rr) + |phi'''(1)| u_rr
    when the curvature is appreciable, otherwise the AM-GM floor
    2 sqrt(phi'(1) |phi'''(1)|)/r.
    """
    grid = fld.grid
    if not grid.a <= front_position <= grid.b:
        raise RangeError("front position outside the grid")
    u, h = fld.values, grid.spacing
    uxx = np.empty_like(u)
    uxx[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    uxx[0] = uxx[1]
    uxx[-1] = uxx[-2]
    val = float(np.interp(front_position, grid.nodes(), uxx))
    phi1 = profile.phi1_at_critical
    phi3 = profile.phi3_at_critical
    if model == "pm1d":
        return -phi3 * val
    if val > 1e-9:
        return phi1 / (front_position**2 * val) + abs(phi3) * val
    return 2.0 * math.sqrt(phi1 * abs(phi3)) / front_position


# ---------------------------------------------------------------------------
# expansion cone containment and invasion timing


@dataclass(frozen=True)
class ExpansionSet:
    """Space-time cone (r3 - k0 t, r4 + k0 t) within a fixed domain.

    An empty seed (r3 >= r4) is allowed and makes every check vacuous.
    """

    r3: float
    r4: float
    k0: float

    def __post_init__(self):
        if self.k0 < 0.0:
            raise ConfigError("expansion set: need k0 >= 0")

    def interval_at(self, t: float, domain: Interval) -> Interval:
        lo = max(self.r3 - self.k0 * t, domain[0])
        hi = min(self.r4 + self.k0 * t, domain[1])
        return (lo, hi)


@dataclass(frozen=True)
class ExpansionReport:
    passed: bool
    vacuous: bool
    worst_uncovered: float
    worst_time: float | None
    invasion_time: float | None
    invasion_bound: float
    slack: float


def check_expansion_rate(
    snaps: list[RegionSnapshot],
    cone: ExpansionSet,
    tolerance_frac: float = 0.0,
    slack_cells: int = 2,
    spacing: float = 0.0,
) -> ExpansionReport:
    """Verify dilated containment of the expanding cone in the regions.

    The slack is ``max(tolerance_frac * domain width, slack_cells * spacing)``.
    Also reports the first time the whole domain is covered (invasion)
    against the bound (r2 - r1)/k0.
    """
    if not snaps:
        raise ConfigError("need at least one region snapshot")
    domain = snaps[0].domain
    width = domain[1] - domain[0]
    slack = max(tolerance_frac * width, slack_cells * spacing)
    if cone.r4 <= cone.r3:
        return ExpansionReport(True, True, 0.0, None, None, math.inf, slack)
    worst = 0.0
    worst_time = None
    invasion_time = None
    for snap in snaps:
        cover = merge_dilated(snap.intervals, slack, domain)
        target = cone.interval_at(snap.time, domain)
        miss = uncovered_length(target, cover)
        if miss > worst:
            worst = miss
            worst_time = snap.time
        if invasion_time is None and uncovered_length(domain, cover) <= 1e-12:
            invasion_time = snap.time
    bound = width / cone.k0 if cone.k0 > 0.0 else math.inf
    return ExpansionReport(
        passed=worst <= 1e-12,
        vacuous=False,
        worst_uncovered=worst,
        worst_time=worst_time,
        invasion_time=invasion_time,
        invasion_bound=bound,
        slack=slack,
    )


# ---------------------------------------------------------------------------
# lower bound on the decay of the maximal slope


@dataclass(frozen=True)
class SupGradReport:
    passed: bool
    worst_margin: float
    times: np.ndarray
    maxima: np.ndarray
    bounds: np.ndarray


def check_supgrad_bound(
    traj: Trajectory,
    r3: float,
    r5: float,
    profile: NonlinearityProfile,
    tol: float = 1e-3,
) -> SupGradReport:
    """M(t) = max centered slope on [r3, r5] versus M(0) - phi'(1) t / r1^2."""
    grid = traj.grid
    if not (grid.a <= r3 < r5 <= grid.b):
        raise ConfigError("need a <= r3 < r5 <= b inside the grid")
    phi1 = profile.phi1_at_critical
    r = grid.nodes()
    sel = (r >= r3) & (r <= r5)
    times, maxima = [], []
    for snap in traj.snapshots:
        times.append(snap.time)
        maxima.append(float(snap.centered_gradients()[sel].max()))
    times = np.asarray(times)
    maxima = np.asarray(maxima)
    bounds = maxima[0] - phi1 * times / (grid.a**2) - tol
    margins = maxima - bounds
    return SupGradReport(
        passed=bool(np.all(margins >= 0.0)),
        worst_margin=float(margins.min()),
        times=times,
        maxima=maxima,
        bounds=bounds,
    )


# ---------------------------------------------------------------------------
# nonexistence thresholds


@dataclass(frozen=True)
class NonexistenceCertificate:
    gradient_threshold: float
    time_bound: float
    constants: DerivedConstants


def nonexistence_certificate(
    r1: float, r2: float, r3: float, r4: float, r5: float, profile: NonlinearityProfile
) -> NonexistenceCertificate:
    """Gradient threshold and finite-time bound for the nonexistence result.

    threshold = 1 + r2 (r2 - r1) / r1^2 * sqrt(phi'(1) / (2 |phi'''(1)|)),
    T0 = r2 (r2 - r1) / sqrt(2 phi'(1) |phi'''(1)|).
    """
    if not 0.0 < r1 < r3 < r4 < r5 < r2:
        raise ConfigError("need 0 < r1 < r3 < r4 < r5 < r2")
    consts = constants(profile, r2)  # raises HypothesisError when degenerate
    phi1 = profile.phi1_at_critical
    phi3 = abs(profile.phi3_at_critical)
    threshold = 1.0 + r2 * (r2 - r1) / (r1 * r1) * math.sqrt(phi1 / (2.0 * phi3))
    t_bound = r2 * (r2 - r1) / math.sqrt(2.0 * phi1 * phi3)
    return NonexistenceCertificate(
        gradient_threshold=threshold, time_bound=t_bound, constants=consts
    )
