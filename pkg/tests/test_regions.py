import math

import numpy as np
import pytest

from pmlab.errors import ConfigError, HypothesisError, RangeError, TrackingError
from pmlab.nonlinearity import ConcretePM, Tabulated
from pmlab.regions import (
    ExpansionSet,
    FrontTrajectory,
    RegionSnapshot,
    check_expansion_rate,
    check_monotone_inclusion,
    check_supgrad_bound,
    heuristic_speed,
    measured_speed,
    merge_dilated,
    nonexistence_certificate,
    subcritical_intervals,
    track_front,
    uncovered_length,
)
from pmlab.solvers import Field1D, Grid1D, RunConfig, Trajectory, integrate

PM = ConcretePM()


def field_from_midpoint_gradients(grid, grad_fn, time=0.0):
    """Nodal values whose face gradients equal grad_fn at cell midpoints."""
    g = grad_fn(grid.midpoints())
    u = np.concatenate([[0.0], np.cumsum(g * grid.spacing)])
    return Field1D(grid, u, time)


def synthetic_trajectory(grid, grad_fn_of_t, times, model="pm1d"):
    snaps = [field_from_midpoint_gradients(grid, lambda x, t=t: grad_fn_of_t(x, t), t) for t in times]
    return Trajectory(
        snapshots=snaps, model=model, profile_name="pm", boundary="neumann", cfl_safety=0.4
    )


# ---------------------------------------------------------------------------
# subcritical_intervals


def test_uniformly_subcritical_field():
    grid = Grid1D(0.0, 1.0, 32)
    snap = subcritical_intervals(field_from_midpoint_gradients(grid, lambda x: 0.5 + 0 * x), PM)
    assert snap.intervals == ((0.0, 1.0),)


def test_uniformly_supercritical_field():
    grid = Grid1D(0.0, 1.0, 32)
    snap = subcritical_intervals(field_from_midpoint_gradients(grid, lambda x: 2.0 + 0 * x), PM)
    assert snap.intervals == ()


def test_crossing_position_exact_for_linear_gradient():
    # gradient 0.5 + x crosses 1 at exactly 0.5
    grid = Grid1D(0.0, 1.0, 64)
    snap = subcritical_intervals(field_from_midpoint_gradients(grid, lambda x: 0.5 + x), PM)
    assert len(snap.intervals) == 1
    left, right = snap.intervals[0]
    assert left == 0.0
    assert abs(right - 0.5) <= 1e-12


def test_negative_crossing_detected():
    grid = Grid1D(0.0, 1.0, 64)
    snap = subcritical_intervals(field_from_midpoint_gradients(grid, lambda x: -2.0 + 2 * x), PM)
    # |g| < 1 for x in (0.5, 1); crossing of g = -1 at exactly 0.5
    assert len(snap.intervals) == 1
    assert abs(snap.intervals[0][0] - 0.5) <= 1e-12
    assert snap.intervals[0][1] == 1.0


def test_supercritical_regime_is_complement():
    grid = Grid1D(0.0, 1.0, 64)
    fld = field_from_midpoint_gradients(grid, lambda x: 0.5 + x)
    sup = subcritical_intervals(fld, PM, regime="supercritical")
    assert len(sup.intervals) == 1
    assert abs(sup.intervals[0][0] - 0.5) <= 1e-12
    assert sup.intervals[0][1] == 1.0


# ---------------------------------------------------------------------------
# interval helpers


def test_merge_dilated_joins_nearby_intervals():
    merged = merge_dilated([(0.1, 0.2), (0.25, 0.3)], slack=0.03, domain=(0.0, 1.0))
    assert len(merged) == 1
    assert merged[0][0] == pytest.approx(0.07)
    assert merged[0][1] == pytest.approx(0.33)


def test_uncovered_length():
    cover = [(0.0, 0.4), (0.5, 1.0)]
    assert uncovered_length((0.0, 1.0), cover) == pytest.approx(0.1)
    assert uncovered_length((0.1, 0.3), cover) == 0.0


# ---------------------------------------------------------------------------
# monotone inclusion


def test_inclusion_constant_trajectory():
    grid = Grid1D(0.0, 1.0, 64)
    traj = synthetic_trajectory(grid, lambda x, t: 0.5 + x, [0.0, 0.1, 0.2])
    rep = check_monotone_inclusion(traj, PM)
    assert rep.passed and rep.pairs_checked == 3


def test_inclusion_on_simulated_mixed_run():
    # region monotonicity on a run with both regimes present
    grid = Grid1D(0.0, 1.0, 128)
    x = grid.nodes()
    u0 = 0.7 * x - 0.7 * np.cos(2 * np.pi * x) / (2 * np.pi)  # slope 0.7 + 0.7 sin
    cfg = RunConfig(model="pm1d", t_end=0.05, snapshot_dt=0.01)
    traj = integrate(Field1D(grid, u0), cfg, PM)
    rep = check_monotone_inclusion(traj, PM, slack_cells=2)
    assert rep.passed, rep


def test_inclusion_catches_reversed_trajectory():
    # shrink the subcritical interval over time: inclusion must fail
    grid = Grid1D(0.0, 1.0, 64)

    def shrinking(x, t):
        return 0.5 + np.abs(x - 0.5) * (2.0 + 40.0 * t)

    traj = synthetic_trajectory(grid, shrinking, [0.0, 0.1, 0.2])
    rep = check_monotone_inclusion(traj, PM)
    assert not rep.passed
    assert rep.worst_uncovered > 0.05
    assert rep.worst_pair is not None


def test_supercritical_reverse_inclusion_on_radial_run():
    # supercritical intervals never expand (time-reversed inclusion)
    grid = Grid1D(0.5, 1.5, 128)
    r = grid.nodes()
    u0 = 0.8 * r - 0.5 * np.cos(2 * np.pi * r) / (2 * np.pi)
    cfg = RunConfig(model="pm_radial", t_end=0.05, snapshot_dt=0.01)
    traj = integrate(Field1D(grid, u0), cfg, PM)
    rep = check_monotone_inclusion(traj, PM, regime="supercritical", reverse_time=True)
    assert rep.passed, rep


# ---------------------------------------------------------------------------
# front tracking


def test_track_front_follows_moving_crossing():
    grid = Grid1D(0.0, 1.0, 256)
    times = [0.0, 0.05, 0.1, 0.15, 0.2]
    traj = synthetic_trajectory(grid, lambda x, t: 0.5 + x - 0.8 * t, times)
    front = track_front(traj, PM, anchor=0.05, side="right")
    t, p = front.as_arrays()
    assert len(t) == 5
    # crossing of 0.5 + x - 0.8 t = 1 sits at x = 0.5 + 0.8 t
    assert np.allclose(p, 0.5 + 0.8 * np.asarray(times), atol=1e-10)


def test_front_starts_at_dip_edges_of_critical_datum():
    # slope 1 everywhere except a localized subcritical dip: the interface
    # sits exactly at the dip edges
    grid = Grid1D(0.0, 1.0, 256)

    def grads(x, t):
        return np.where((x > 0.4) & (x < 0.6), 0.5, 1.0)

    traj = synthetic_trajectory(grid, grads, [0.0, 0.1])
    front_r = track_front(traj, PM, anchor=0.5, side="right")
    front_l = track_front(traj, PM, anchor=0.5, side="left")
    h = grid.spacing
    assert abs(front_r.positions[0] - 0.6) <= h
    assert abs(front_l.positions[0] - 0.4) <= h


def test_track_front_requires_interface_at_start():
    grid = Grid1D(0.0, 1.0, 64)
    traj = synthetic_trajectory(grid, lambda x, t: 2.0 + 0 * x, [0.0, 0.1])
    with pytest.raises(TrackingError):
        track_front(traj, PM, anchor=0.5)


def test_track_front_flags_merge_when_gap_collapses():
    def grads(x, t):
        # supercritical bump on (0.45, 0.55) that vanishes after t = 0.1
        bump = np.where((x > 0.45) & (x < 0.55), 2.0, 0.5)
        return bump if t < 0.1 else np.full_like(x, 0.5)

    grid = Grid1D(0.0, 1.0, 128)
    traj = synthetic_trajectory(grid, grads, [0.0, 0.05, 0.1, 0.15])
    front = track_front(traj, PM, anchor=0.2, side="right")
    assert front.status == "merged"
    assert len(front.times) == 2


def test_track_front_exits_at_domain_edge():
    grid = Grid1D(0.0, 1.0, 128)

    def grads(x, t):
        return np.where(x > 0.6 + 3.0 * t, 2.0, 0.5)

    traj = synthetic_trajectory(grid, grads, [0.0, 0.05, 0.1, 0.15, 0.2])
    front = track_front(traj, PM, anchor=0.2, side="right", mode="cover")
    assert front.status == "exited"


# ---------------------------------------------------------------------------
# measured_speed


def test_measured_speed_exact_line():
    front = FrontTrajectory(times=list(np.linspace(0, 1, 11)), positions=list(0.5 + 0.3 * np.linspace(0, 1, 11)))
    rows = measured_speed(front, window=0.3)
    assert rows.size > 0
    assert np.allclose(rows[:, 1], 0.3, atol=1e-12)


def test_measured_speed_square_root_track():
    t = np.linspace(0.0, 1.0, 101)
    alpha = np.sqrt(0.25 + 0.4 * t)
    front = FrontTrajectory(times=list(t), positions=list(alpha))
    rows = measured_speed(front, window=0.08)
    for tc in (0.2, 0.5, 0.8):
        analytic = 0.2 / math.sqrt(0.25 + 0.4 * tc)
        i = int(np.argmin(np.abs(rows[:, 0] - tc)))
        assert rows[i, 1] == pytest.approx(analytic, rel=0.05)
    assert rows[0, 1] > rows[-1, 1]  # decreasing in time


def test_measured_speed_too_few_samples():
    front = FrontTrajectory(times=[0.0], positions=[0.5])
    assert measured_speed(front, window=1.0).size == 0


# ---------------------------------------------------------------------------
# heuristic_speed


def test_heuristic_speed_1d_hand_value():
    grid = Grid1D(0.0, 1.0, 64)
    x = grid.nodes()
    fld = Field1D(grid, x * x)  # u_xx = 2 exactly in the discrete stencil
    assert heuristic_speed(fld, PM, 0.5, model="pm1d") == pytest.approx(1.0, abs=1e-10)


def test_heuristic_speed_radial_hand_value():
    grid = Grid1D(0.5, 1.5, 64)
    r = grid.nodes()
    fld = Field1D(grid, 0.5 * r * r)  # u_rr = 1
    got = heuristic_speed(fld, PM, 1.0, model="pm_radial")
    assert got == pytest.approx(0.5 / 1.0 + 0.5 * 1.0, abs=1e-9)


def test_heuristic_speed_radial_amgm_floor():
    grid = Grid1D(0.5, 1.5, 64)
    r = grid.nodes()
    fld = Field1D(grid, r.copy())  # u_rr = 0: fall back to the AM-GM bound
    assert heuristic_speed(fld, PM, 1.0, model="pm_radial") == pytest.approx(1.0, abs=1e-9)


def test_heuristic_speed_range_error():
    grid = Grid1D(0.0, 1.0, 64)
    fld = Field1D(grid, grid.nodes() ** 2)
    with pytest.raises(RangeError):
        heuristic_speed(fld, PM, 1.5)


# ---------------------------------------------------------------------------
# expansion cone


def snapshots_expanding(times, rate, domain=(0.5, 1.5)):
    snaps = []
    for t in times:
        lo = max(0.9 - rate * t, domain[0])
        hi = min(1.1 + rate * t, domain[1])
        snaps.append(
            RegionSnapshot(time=t, intervals=((lo, hi),), domain=domain)
        )
    return snaps


def test_expansion_containment_passes_when_faster_than_cone():
    times = np.linspace(0.0, 2.0, 21)
    snaps = snapshots_expanding(times, rate=0.6)
    cone = ExpansionSet(r3=0.9, r4=1.1, k0=0.47140452079103173)
    rep = check_expansion_rate(snaps, cone, slack_cells=2, spacing=1.0 / 600)
    assert rep.passed
    assert rep.invasion_time is not None
    assert rep.invasion_time <= rep.invasion_bound


def test_expansion_containment_fails_when_slower_than_cone():
    times = np.linspace(0.0, 2.0, 21)
    snaps = snapshots_expanding(times, rate=0.2)
    cone = ExpansionSet(r3=0.9, r4=1.1, k0=0.47140452079103173)
    rep = check_expansion_rate(snaps, cone, slack_cells=2, spacing=1.0 / 600)
    assert not rep.passed
    assert rep.worst_uncovered > 0.1


def test_expansion_zero_rate_reduces_to_monotonicity():
    times = np.linspace(0.0, 2.0, 11)
    snaps = snapshots_expanding(times, rate=0.1)
    rep = check_expansion_rate(snaps, ExpansionSet(0.9, 1.1, 0.0), slack_cells=0)
    assert rep.passed
    assert rep.invasion_time is None
    assert math.isinf(rep.invasion_bound)


def test_expansion_empty_seed_is_vacuous():
    snaps = snapshots_expanding([0.0, 1.0], rate=0.5)
    rep = check_expansion_rate(snaps, ExpansionSet(1.1, 0.9, 0.4), slack_cells=2)
    assert rep.vacuous and rep.passed


# ---------------------------------------------------------------------------
# sup-gradient bound


def test_supgrad_bound_stationary_field():
    grid = Grid1D(0.5, 1.5, 64)
    traj = synthetic_trajectory(grid, lambda x, t: 2.0 + 0 * x, [0.0, 0.5, 1.0])
    rep = check_supgrad_bound(traj, 0.7, 1.3, PM)
    assert rep.passed
    assert rep.maxima[0] == pytest.approx(2.0, abs=1e-9)


def test_supgrad_bound_detects_fast_decay():
    grid = Grid1D(0.5, 1.5, 64)

    def collapsing(x, t):
        return (2.0 if t == 0 else 0.1) + 0 * x

    traj = synthetic_trajectory(grid, collapsing, [0.0, 0.05])
    rep = check_supgrad_bound(traj, 0.7, 1.3, PM)
    assert not rep.passed
    # bound at t=0.05 is 2 - 0.5*0.05/0.25 - 1e-3 = 1.899; maximum is 0.1
    assert rep.worst_margin == pytest.approx(0.1 - 1.899, abs=1e-6)


def test_supgrad_bound_vacuous_for_small_initial_maximum():
    # subcritical field: the lower bound drops below zero immediately while
    # the maximum stays put, so the check passes trivially
    grid = Grid1D(0.5, 1.5, 64)
    traj = synthetic_trajectory(grid, lambda x, t: 0.4 + 0 * x, [0.0, 1.0, 2.0])
    rep = check_supgrad_bound(traj, 0.7, 1.3, PM)
    assert rep.passed
    assert rep.bounds[-1] < 0.0 < rep.maxima[-1]


def test_supgrad_bound_validates_window():
    grid = Grid1D(0.5, 1.5, 64)
    traj = synthetic_trajectory(grid, lambda x, t: 0.5 + 0 * x, [0.0])
    with pytest.raises(ConfigError):
        check_supgrad_bound(traj, 1.3, 0.7, PM)


# ---------------------------------------------------------------------------
# nonexistence certificate


def test_certificate_frozen_values():
    cert = nonexistence_certificate(0.5, 1.5, 0.7, 1.0, 1.3, PM)
    assert cert.gradient_threshold == pytest.approx(1.0 + 6.0 * math.sqrt(0.5), abs=1e-12)
    assert cert.gradient_threshold == pytest.approx(5.2426, abs=1e-4)
    assert cert.time_bound == pytest.approx(1.5 / math.sqrt(0.5), abs=1e-12)
    assert cert.time_bound == pytest.approx(2.1213, abs=1e-4)


def test_certificate_shrinking_annulus_limit():
    cert = nonexistence_certificate(1.0, 1.0 + 1e-9, 1.0 + 2e-10, 1.0 + 5e-10, 1.0 + 8e-10, PM)
    assert cert.time_bound < 1e-8


def test_certificate_ordering_error():
    with pytest.raises(ConfigError):
        nonexistence_certificate(0.5, 1.5, 1.0, 0.7, 1.3, PM)


def test_certificate_hypothesis_error_propagates():
    sig = np.linspace(0.0, 2.0, 2049)
    degenerate = Tabulated(sig, sig**2 / 2 - sig**4 / 6 + sig**6 / 30)
    with pytest.raises(HypothesisError):
        nonexistence_certificate(0.5, 1.5, 0.7, 1.0, 1.3, degenerate)
