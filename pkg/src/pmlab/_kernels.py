"""Numba stepping kernels for the concrete log profile.

Arithmetic mirrors the numpy reference loop in :mod:`pmlab.solvers` operation
by operation (same divisions, same update order), so the two backends agree
to rounding and the reference loop doubles as a parity oracle in the tests.
Status codes: 0 reached target, 1 breakdown, 3 degenerate range cap.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

CAP = 0.5  # phi'(1) for the concrete profile


@njit(cache=True)
def _advance_pm(u, h, r0, cfl, t, t_target, neumann, radial, n_dim, grad_cap):
    n = u.shape[0]
    nf = n - 1
    flux = np.empty(nf)
    rate = np.empty(n)
    steps = 0
    dt_min = 1e300
    dt_max = 0.0
    dt_sum = 0.0
    status = 0
    t_break = -1.0
    eps = 1e-12 * (t_target if t_target > 1.0 else 1.0)
    while t < t_target - eps:
        coeff = 0.0
        for i in range(nf):
            p = (u[i + 1] - u[i]) / h
            d = 1.0 + p * p
            flux[i] = p / d
            c = (1.0 - p * p) / (d * d)
            if c < 0.0:
                c = -c
            if c > coeff:
                coeff = c
        dt = cfl * h * h / coeff if coeff > 0.0 else (t_target - t)
        rem = t_target - t
        if dt > rem:
            dt = rem
        for i in range(1, n - 1):
            rate[i] = (flux[i] - flux[i - 1]) / h
        if neumann:
            rate[0] = flux[0] / h
            rate[n - 1] = -flux[nf - 1] / h
        else:
            rate[0] = 0.0
            rate[n - 1] = 0.0
        if radial:
            for i in range(n):
                if i == 0:
                    cg = (u[1] - u[0]) / (2.0 * h)
                elif i == n - 1:
                    cg = (u[n - 1] - u[n - 2]) / (2.0 * h)
                else:
                    cg = (u[i + 1] - u[i - 1]) / (2.0 * h)
                src = (n_dim - 1.0) * (cg / (1.0 + cg * cg)) / (r0 + h * i)
                if neumann or (0 < i < n - 1):
                    rate[i] = rate[i] + src
        for i in range(n):
            u[i] = u[i] + dt * rate[i]
        t += dt
        steps += 1
        dt_sum += dt
        if dt < dt_min:
            dt_min = dt
        if dt > dt_max:
            dt_max = dt
        ok = True
        for i in range(n):
            if not np.isfinite(u[i]):
                ok = False
        gmax = 0.0
        for i in range(nf):
            ad = u[i + 1] - u[i]
            if ad < 0.0:
                ad = -ad
            if ad > gmax:
                gmax = ad
        if not ok or gmax / h > grad_cap:
            status = 1
            t_break = t
            break
    return t, steps, dt_min, dt_max, dt_sum, status, t_break, -1.0


@njit(cache=True)
def _advance_fbp(v, h, r0, cfl, t, t_target, neumann, radial, grad_cap):
    n = v.shape[0]
    g = np.empty(n)
    rate = np.empty(n)
    steps = 0
    dt_min = 1e300
    dt_max = 0.0
    dt_sum = 0.0
    status = 0
    t_break = -1.0
    pos_violation = -1.0
    h2 = h * h
    eps = 1e-12 * (t_target if t_target > 1.0 else 1.0)
    while t < t_target - eps:
        coeff = 0.0
        for i in range(n):
            if v[i] < 0.0:
                v[i] = 0.0
            if v[i] >= CAP:
                status = 3
                return t, steps, dt_min, dt_max, dt_sum, status, t_break, pos_violation
            p = v[i] - v[i] * v[i]
            g[i] = math.sqrt(p) + 2.0 * p
            if g[i] > coeff:
                coeff = g[i]
        dt = cfl * h2 / coeff if coeff > 0.0 else (t_target - t)
        rem = t_target - t
        if dt > rem:
            dt = rem
        for i in range(n):
            if i == 0:
                lap = v[1] - v[0]
                cg = (v[1] - v[0]) / (2.0 * h)
            elif i == n - 1:
                lap = v[n - 2] - v[n - 1]
                cg = (v[n - 1] - v[n - 2]) / (2.0 * h)
            else:
                lap = v[i + 1] - 2.0 * v[i] + v[i - 1]
                cg = (v[i + 1] - v[i - 1]) / (2.0 * h)
            if v[i] > 0.0:
                if radial:
                    r = r0 + h * i
                    braces = lap / h2 + cg / r + (CAP - v[i]) / (r * r)
                    rate[i] = g[i] * braces
                else:
                    rate[i] = g[i] * lap / h2
            else:
                rate[i] = 0.0
        if not neumann:
            rate[0] = 0.0
            rate[n - 1] = 0.0
        for i in range(n):
            new = v[i] + dt * rate[i]
            if new < 0.0:
                new = 0.0
            if pos_violation < 0.0 and v[i] > 0.0 and new <= 0.0:
                pos_violation = t + dt
            v[i] = new
        t += dt
        steps += 1
        dt_sum += dt
        if dt < dt_min:
            dt_min = dt
        if dt > dt_max:
            dt_max = dt
        ok = True
        for i in range(n):
            if not np.isfinite(v[i]):
                ok = False
        gmax = 0.0
        for i in range(n - 1):
            ad = v[i + 1] - v[i]
            if ad < 0.0:
                ad = -ad
            if ad > gmax:
                gmax = ad
        if not ok or gmax / h > grad_cap:
            status = 1
            t_break = t
            break
    return t, steps, dt_min, dt_max, dt_sum, status, t_break, pos_violation


def make_backend(grid, config):
    """Stepping closure matching the signature of the numpy reference loop."""
    h = grid.spacing
    r0 = grid.a
    neumann = config.boundary == "neumann"
    radial = config.model in ("pm_radial", "fbp2")
    degenerate = config.model in ("fbp1", "fbp2")
    cfl = config.cfl_safety
    n_dim = float(config.n_dim)
    grad_cap = config.grad_blowup_cap

    def advance(values, t, t_target):
        if degenerate:
            out = _advance_fbp(
                values, h, r0, cfl, t, t_target, neumann, radial, grad_cap
            )
        else:
            out = _advance_pm(
                values, h, r0, cfl, t, t_target, neumann, radial, n_dim, grad_cap
            )
        _, steps, dt_min, dt_max, dt_sum, status, t_break, pos_t = out
        return {
            "steps": steps,
            "dt_min": dt_min,
            "dt_max": dt_max,
            "dt_sum": dt_sum,
            "status": {0: "ok", 1: "breakdown", 3: "range"}[status],
            "t_break": t_break if t_break >= 0.0 else None,
            "positivity_violation_time": pos_t if pos_t >= 0.0 else None,
        }

    return advance
