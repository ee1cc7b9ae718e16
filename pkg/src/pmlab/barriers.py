"""Explicit subsolution barriers for the degenerate models.

Two families are implemented.  The static barrier for the plain degenerate
equation v_t = g(v) v_xx decays exponentially in place:

    w(x, t) = exp(-lam t) (delta^2 psi(x) + delta psi(x)^2),
    psi(x)  = (x - x5)(x6 - x),

and the traveling barrier for the radial inequality
v_t >= g(v){v_rr + f + A} translates with speed k:

    w(r, t) = delta^3 psi(y) + delta psi(y)^(3/2),   y = r - k t.

Both satisfy a strict differential inequality once delta is small enough and
(for the static one) lam is large enough; the selection recipes and the grid
verification of every premise live here, together with the pointwise
comparison of simulated fields against a verified barrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConeError, ConfigError, DomainError, RangeError, SelectionError
from .nonlinearity import NonlinearityProfile, coeff_g_array, constants
from .solvers import Field1D, Trajectory

#: clip fraction for the inverse-sqrt singularity at the traveling barrier's
#: endpoints
ENDPOINT_CLIP_FRACTION = 1.0 / 1024.0

#: safety factor on the sampled supremum in the lam selection
LAMBDA_SAFETY = 1.05

#: delta halving schedule
DELTA_START = 1e-1
DELTA_MAX_HALVINGS = 40


def eval_psi(x5: float, x6: float, x):
    """The endpoint parabola (x - x5)(x6 - x); psi'' = -2 exactly."""
    x = np.asarray(x, dtype=float)
    out = (x - x5) * (x6 - x)
    return out if out.ndim else float(out)


def _psi_prime(x5, x6, x):
    return x5 + x6 - 2.0 * np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# static barrier (decaying in place)


@dataclass(frozen=True)
class BarrierFBP1:
    x5: float
    x6: float
    delta: float
    lam: float
    x7: float
    x8: float

    def __post_init__(self):
        if not self.x5 < self.x7 < self.x8 < self.x6:
            raise ConfigError("barrier: need x5 < x7 < x8 < x6")
        if self.delta <= 0.0 or self.lam <= 0.0:
            raise ConfigError("barrier: delta and lam must be positive")


def eval_w1(barrier: BarrierFBP1, x, t):
    """Value and derivatives (w, w_t, w_x, w_xx) of the static barrier."""
    d = barrier.delta
    psi = eval_psi(barrier.x5, barrier.x6, x)
    dpsi = _psi_prime(barrier.x5, barrier.x6, x)
    decay = np.exp(-barrier.lam * np.asarray(t, dtype=float))
    w = decay * (d * d * psi + d * psi * psi)
    w_t = -barrier.lam * w
    w_x = decay * (d * d * dpsi + 2.0 * d * psi * dpsi)
    w_xx = decay * (2.0 * d * dpsi * dpsi - 4.0 * d * psi - 2.0 * d * d)
    return w, w_t, w_x, w_xx


def select_lambda(
    x5: float,
    x6: float,
    x7: float,
    x8: float,
    delta: float,
    profile: NonlinearityProfile,
    samples: int = 512,
) -> float:
    """Decay rate from the sampled supremum of g(w)(4 psi + 2 delta)/(delta psi + psi^2).

    The supremum is over [x7, x8]; since the barrier decreases in time and
    the diffusivity is increasing over the barrier's range, the t = 0 slice
    dominates and is sampled on a uniform grid, then inflated by 5%.
    """
    x = np.linspace(x7, x8, samples)
    psi = eval_psi(x5, x6, x)
    w0 = delta * delta * psi + delta * psi * psi
    cap = profile.phi1_at_critical
    if np.any(w0 >= cap):
        raise SelectionError("barrier exceeds the diffusivity domain; shrink delta")
    g = coeff_g_array(profile, w0)
    sup = float((g * (4.0 * psi + 2.0 * delta) / (delta * psi + psi * psi)).max())
    if not np.isfinite(sup):
        raise SelectionError("sampled supremum is not finite")
    return LAMBDA_SAFETY * sup


@dataclass(frozen=True)
class BarrierReport:
    passed: bool
    checks: dict
    min_margin: float


def verify_w1(
    barrier: BarrierFBP1,
    profile: NonlinearityProfile,
    grid_resolution: int = 512,
    t_max: float = 1.0,
    c0: Optional[float] = None,
) -> BarrierReport:
    """Grid check of positivity, endpoint slopes, the cap, and the strict
    inequality w_t < g(w) w_xx on the open interval at five time slices."""
    c0 = profile.phi1_at_critical if c0 is None else c0
    x = np.linspace(barrier.x5, barrier.x6, grid_resolution + 1)[1:-1]
    checks = {}
    w0 = eval_w1(barrier, x, 0.0)[0]
    checks["positive_inside"] = (bool(np.all(w0 > 0.0)), float(w0.min()))
    slope_lo = eval_w1(barrier, barrier.x5, 0.0)[2]
    slope_hi = eval_w1(barrier, barrier.x6, 0.0)[2]
    checks["endpoint_slopes"] = (
        bool(slope_lo > 0.0 > slope_hi),
        float(min(slope_lo, -slope_hi)),
    )
    checks["below_cap"] = (bool(np.all(w0 < c0)), float(c0 - w0.max()))

    min_margin = math.inf
    sup_flag = False
    for t in np.linspace(0.0, t_max, 5):
        w, w_t, _, w_xx = eval_w1(barrier, x, t)
        margin = coeff_g_array(profile, np.minimum(w, c0 * (1 - 1e-12))) * w_xx - w_t
        min_margin = min(min_margin, float(margin.min()))
    checks["strict_inequality"] = (min_margin > 0.0, min_margin)

    # flag for the open question on the t = 0 supremum proxy
    mid = np.linspace(barrier.x7, barrier.x8, 128)
    sup0 = _lambda_supremand(barrier, profile, mid, 0.0).max()
    supT = _lambda_supremand(barrier, profile, mid, t_max).max()
    sup_flag = bool(supT > sup0)
    checks["late_supremum_exceeds_initial"] = (not sup_flag, float(sup0 - supT))

    passed = all(ok for ok, _ in checks.values())
    return BarrierReport(passed=passed, checks=checks, min_margin=min_margin)


def _lambda_supremand(barrier, profile, x, t):
    psi = eval_psi(barrier.x5, barrier.x6, x)
    w = eval_w1(barrier, x, t)[0]
    g = coeff_g_array(profile, w)
    return g * (4.0 * psi + 2.0 * barrier.delta) / (barrier.delta * psi + psi * psi)


# ---------------------------------------------------------------------------
# traveling barrier


@dataclass(frozen=True)
class BarrierFBP2:
    r5: float
    r6: float
    k: float
    delta: float
    eps0: float
    c2: float
    r7: float
    r8: float
    t_star: float

    def __post_init__(self):
        mid = 0.5 * (self.r5 + self.r6)
        if not self.r5 < self.r7 < mid < self.r8 < self.r6:
            raise ConfigError("barrier: need r5 < r7 < midpoint < r8 < r6")
        if self.delta <= 0.0 or self.eps0 <= 0.0 or self.c2 <= 0.0:
            raise ConfigError("barrier: delta, eps0, c2 must be positive")
        if self.t_star <= 0.0:
            raise ConfigError("barrier: t_star must be positive")


def eval_w2(barrier: BarrierFBP2, r, t):
    """Value and derivatives (w, w_t, w_r, w_rr) of the traveling barrier.

    The profile argument is y = r - k t, which must lie in [r5, r6].  The
    second derivative carries a psi^(-1/2) factor and is +inf at the
    endpoints; callers sample the clipped interior.
    """
    y = np.asarray(r, dtype=float) - barrier.k * np.asarray(t, dtype=float)
    if np.any(y < barrier.r5 - 1e-12) or np.any(y > barrier.r6 + 1e-12):
        raise RangeError("barrier argument r - k t outside [r5, r6]")
    d = barrier.delta
    psi = np.maximum(eval_psi(barrier.r5, barrier.r6, y), 0.0)
    dpsi = _psi_prime(barrier.r5, barrier.r6, y)
    root = np.sqrt(psi)
    w = d**3 * psi + d * psi * root
    w_t = -barrier.k * (d**3 * dpsi + 1.5 * d * root * dpsi)
    w_r = d**3 * dpsi + 1.5 * d * root * dpsi
    inv_root = np.divide(
        1.0, root, out=np.full_like(np.asarray(root, dtype=float), np.inf), where=root > 0.0
    )
    w_rr = -2.0 * d**3 - 3.0 * d * root + 0.75 * d * inv_root * dpsi * dpsi
    if np.ndim(w):
        return w, w_t, w_r, w_rr
    return float(w), float(w_t), float(w_r), float(w_rr)


def select_eps0_c2(profile: NonlinearityProfile, k: float, A: float) -> tuple[float, float]:
    """Pick the cone slack eps0 and the diffusivity floor range c2.

    eps0 is the midpoint of the feasible set of
    |k| < (1 - e)(G - e) sqrt(A - 2e), found by bisection on the margin;
    c2 is scanned downward from the cap until g(s) >= (G - eps0) sqrt(s)
    holds on a dense sample of (0, c2).
    """
    G = constants(profile, 1.0).G
    if abs(k) >= G * math.sqrt(A):
        raise ConeError(f"|k| = {abs(k):g} does not fit inside the cone bound {G * math.sqrt(A):g}")
    e_cap = min(1.0, G, A / 2.0)

    def margin(e):
        return (1.0 - e) * (G - e) * math.sqrt(max(A - 2.0 * e, 0.0)) - abs(k)

    lo, hi = 0.0, e_cap
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    eps0 = 0.5 * lo  # midpoint of the feasible interval (0, lo)

    cap = profile.phi1_at_critical
    floor = G - eps0
    c2 = 0.98 * cap
    for _ in range(60):
        s = np.linspace(c2 * 1e-6, c2, 2048)
        if np.all(coeff_g_array(profile, s) >= floor * np.sqrt(s)):
            return eps0, c2
        c2 *= 0.5
    raise SelectionError("no c2 found with the square-root diffusivity floor")


def verify_w2(
    barrier: BarrierFBP2,
    profile: NonlinearityProfile,
    A: float,
    f_evaluator: Optional[Callable] = None,
    grid_resolution: int = 512,
) -> BarrierReport:
    """Grid check of the traveling barrier's premises and inequalities.

    Verifies, on the clipped profile interval and a time sample of
    [0, t_star]: the strict inequality w_t < g(w){w_rr + f + A}; the
    endpoint-regime and middle-regime reductions; the arithmetic-geometric
    mean chain; the smallness premises on f, the curvature, and the cap c2.
    """
    if f_evaluator is None:
        f_evaluator = radial_lower_order
    d = barrier.delta
    eps0 = barrier.eps0
    G = constants(profile, 1.0).G
    clip = (barrier.r6 - barrier.r5) * ENDPOINT_CLIP_FRACTION
    y = np.linspace(barrier.r5 + clip, barrier.r6 - clip, grid_resolution)
    psi = eval_psi(barrier.r5, barrier.r6, y)
    dpsi = _psi_prime(barrier.r5, barrier.r6, y)
    root = np.sqrt(psi)
    checks = {}

    # regime reductions of the translated inequality
    lhs = d**1.5 * np.abs(barrier.k * dpsi)
    endpoint = (y <= barrier.r7) | (y >= barrier.r8)
    rhs_endpoint = eps0 * (G - eps0) * 0.75 * d * dpsi * dpsi
    margin_ep = float((rhs_endpoint - lhs * np.sqrt(d))[endpoint].min())
    checks["endpoint_regime"] = (margin_ep > 0.0, margin_ep)
    middle = ~endpoint
    rhs_middle = eps0 * (G - eps0) * (A - 2.0 * eps0) * root
    margin_mid = float((rhs_middle - lhs * np.sqrt(d))[middle].min())
    checks["middle_regime"] = (margin_mid > 0.0, margin_mid)

    # arithmetic-geometric mean chain: its binding step is independent of
    # delta, sqrt(3) (1-e)(G-e) sqrt(A-2e) delta |psi'| sqrt(psi) must
    # dominate (3/2) delta |k psi'| sqrt(psi); equality holds where psi' = 0
    chain_lower = (
        math.sqrt(3.0)
        * (1.0 - eps0)
        * (G - eps0)
        * math.sqrt(max(A - 2.0 * eps0, 0.0))
        * d
        * np.abs(dpsi)
        * root
    )
    amgm = chain_lower - 1.5 * d * np.abs(barrier.k * dpsi) * root
    checks["amgm_chain"] = (bool(np.all(amgm >= -1e-14)), float(amgm.min()))
    # the implied nodewise form with the full right-hand side
    w_full = d**3 * psi + d * psi * root
    rhs_full = (G - eps0) * np.sqrt(w_full) * (
        A - 2.0 * eps0 + 0.75 * d * dpsi * dpsi / root
    )
    full = (1.0 - eps0) * rhs_full - 1.5 * d * np.abs(barrier.k * dpsi) * root
    checks["amgm_full_rhs"] = (bool(np.all(full >= -1e-14)), float(full.min()))

    # curvature premise: -2 d^3 - 3 d sqrt(psi) > -eps0
    curv = eps0 - (2.0 * d**3 + 3.0 * d * root)
    checks["curvature_premise"] = (bool(np.all(curv > 0.0)), float(curv.min()))

    # full inequality and the f premise over space-time samples
    min_margin = math.inf
    f_ok = True
    f_worst = math.inf
    cap_margin = math.inf
    for t in np.linspace(0.0, barrier.t_star, 5):
        r = y + barrier.k * t
        w, w_t, w_r, w_rr = eval_w2(barrier, r, t)
        f_vals = np.asarray(f_evaluator(r, t, w, w_r), dtype=float)
        f_margin = float((eps0 - np.abs(f_vals)).min())
        f_worst = min(f_worst, f_margin)
        f_ok = f_ok and f_margin > 0.0
        g = coeff_g_array(profile, np.minimum(w, barrier.c2))
        margin = g * (w_rr + f_vals + A) - w_t
        min_margin = min(min_margin, float(margin.min()))
        cap_margin = min(cap_margin, float(barrier.c2 - w.max()))
    checks["f_premise"] = (f_ok, f_worst)
    checks["below_c2"] = (cap_margin > 0.0, cap_margin)
    checks["strict_inequality"] = (min_margin > 0.0, min_margin)

    # diffusivity floor actually used by the comparison argument
    wpos = w_full[w_full > 0.0]
    floor_margin = float((coeff_g_array(profile, wpos) - (G - eps0) * np.sqrt(wpos)).min())
    checks["diffusivity_floor"] = (floor_margin >= 0.0, floor_margin)

    passed = all(ok for ok, _ in checks.values())
    return BarrierReport(passed=passed, checks=checks, min_margin=min_margin)


def radial_lower_order(r, t, p, q):
    """The lower-order terms of the radial identity: f(r,t,p,q) = q/r - p/r^2."""
    r = np.asarray(r, dtype=float)
    return q / r - p / (r * r)


# ---------------------------------------------------------------------------
# cone sets


@dataclass(frozen=True)
class ConeSet:
    """The expansion cone D and the slanted strip D* used by the comparison."""

    r3: float
    r4: float
    k0: float
    r5: float
    r6: float
    k: float
    t_star: float

    def __post_init__(self):
        for t in (0.0, self.t_star):
            lo, hi = self.r5 + self.k * t, self.r6 + self.k * t
            if not (self.r3 - self.k0 * t < lo and hi < self.r4 + self.k0 * t):
                raise ConeError("strip D* must stay inside the expansion cone D")

    def contains_cone(self, r, t):
        return self.r3 - self.k0 * t < r < self.r4 + self.k0 * t

    def contains_strip(self, r, t):
        return t <= self.t_star and self.r5 + self.k * t <= r <= self.r6 + self.k * t


# ---------------------------------------------------------------------------
# comparison against trajectories


@dataclass(frozen=True)
class ComparisonReport:
    passed: bool
    setup_ok: bool
    min_margin: float
    points_checked: int
    tol: float


def check_comparison(
    traj: Trajectory,
    barrier,
    which: str,
    tol_cmp: Optional[float] = None,
) -> ComparisonReport:
    """Nodewise v >= w - tol over the barrier's space-time region.

    Also verifies the ordering premise at t = 0 (the barrier must start
    strictly below the field); its failure flags ``setup_ok`` instead of a
    comparison failure.
    """
    if which not in ("fbp1", "fbp2"):
        raise DomainError("which must be fbp1 or fbp2")
    grid = traj.grid
    h = grid.spacing
    tol = (1e-6 + 2.0 * h) if tol_cmp is None else tol_cmp
    nodes = grid.nodes()

    if which == "fbp1":
        lo, hi = barrier.x5, barrier.x6
        if lo < grid.a - 1e-12 or hi > grid.b + 1e-12:
            raise RangeError("barrier interval outside the trajectory grid")
        snaps = traj.snapshots
    else:
        t_star = barrier.t_star
        if t_star > traj.snapshots[-1].time + 1e-12:
            raise RangeError("barrier horizon t_star beyond the trajectory end")
        end_lo = min(barrier.r5, barrier.r5 + barrier.k * t_star)
        end_hi = max(barrier.r6, barrier.r6 + barrier.k * t_star)
        if end_lo < grid.a - 1e-12 or end_hi > grid.b + 1e-12:
            raise RangeError("translated barrier leaves the trajectory grid")
        snaps = [s for s in traj.snapshots if s.time <= t_star + 1e-12]

    setup_ok = True
    min_margin = math.inf
    points = 0
    for index, snap in enumerate(snaps):
        t = snap.time
        if which == "fbp1":
            mask = (nodes >= lo) & (nodes <= hi)
            w = eval_w1(barrier, nodes[mask], t)[0]
        else:
            mask = (nodes >= barrier.r5 + barrier.k * t) & (
                nodes <= barrier.r6 + barrier.k * t
            )
            w = eval_w2(barrier, nodes[mask], t)[0]
        v = snap.values[mask]
        if index == 0 and np.any(w >= v):
            setup_ok = False
        margin = float((v - w + tol).min()) if v.size else math.inf
        min_margin = min(min_margin, margin)
        points += int(v.size)
    return ComparisonReport(
        passed=setup_ok and min_margin >= 0.0,
        setup_ok=setup_ok,
        min_margin=min_margin,
        points_checked=points,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# automatic parameter selection


def auto_barrier_fbp1(
    profile: NonlinearityProfile,
    x5: float,
    x6: float,
    v0: Optional[Field1D] = None,
    t_max: float = 1.0,
    grid_resolution: int = 512,
) -> BarrierFBP1:
    """Halve delta from 0.1 until the verification and the ordering pass."""
    length = x6 - x5
    x7, x8 = x5 + 0.25 * length, x6 - 0.25 * length
    delta = DELTA_START
    for _ in range(DELTA_MAX_HALVINGS):
        try:
            lam = select_lambda(x5, x6, x7, x8, delta, profile)
            barrier = BarrierFBP1(x5=x5, x6=x6, delta=delta, lam=lam, x7=x7, x8=x8)
            report = verify_w1(barrier, profile, grid_resolution, t_max)
        except SelectionError:
            delta *= 0.5
            continue
        if report.passed and _starts_below(barrier, v0, which="fbp1"):
            return barrier
        delta *= 0.5
    raise SelectionError("no delta found for the static barrier after 40 halvings")


def auto_barrier_fbp2(
    profile: NonlinearityProfile,
    r2: float,
    r5: float,
    r6: float,
    k: float,
    t_star: float,
    v0: Optional[Field1D] = None,
    grid_resolution: int = 512,
) -> BarrierFBP2:
    """Pick (eps0, c2) by the cone recipe, then halve delta until all pass."""
    A = constants(profile, r2).A
    eps0, c2 = select_eps0_c2(profile, k, A)
    length = r6 - r5
    r7, r8 = r5 + 0.3 * length, r6 - 0.3 * length
    delta = DELTA_START
    for _ in range(DELTA_MAX_HALVINGS):
        barrier = BarrierFBP2(
            r5=r5, r6=r6, k=k, delta=delta, eps0=eps0, c2=c2, r7=r7, r8=r8, t_star=t_star
        )
        report = verify_w2(barrier, profile, A, grid_resolution=grid_resolution)
        if report.passed and _starts_below(barrier, v0, which="fbp2"):
            return barrier
        delta *= 0.5
    raise SelectionError("no delta found for the traveling barrier after 40 halvings")


def _starts_below(barrier, v0: Optional[Field1D], which: str) -> bool:
    if v0 is None:
        return True
    nodes = v0.grid.nodes()
    if which == "fbp1":
        mask = (nodes >= barrier.x5) & (nodes <= barrier.x6)
        w = eval_w1(barrier, nodes[mask], 0.0)[0]
    else:
        mask = (nodes >= barrier.r5) & (nodes <= barrier.r6)
        w = eval_w2(barrier, nodes[mask], 0.0)[0]
    return bool(np.all(w < v0.values[mask]))
