"""The 2D datum whose supercritical region expands despite being convex.

The datum is a cubic polynomial

    u0(x, y) = (sqrt2/2) x + (sqrt2/2) y + k1 x^2 + k2 y^2 + h1 x^3 + h2 y^3

with unit gradient at the origin.  Two closed-form quantities decide the
construction: the sign of

    8 k1^2 k2^2 + 3 sqrt2 (k1^2 h2 + k2^2 h1)        (negative => the
    supercritical boundary is locally convex), and

    v_t(0,0,0) = phi'(1){3 sqrt2 (h1+h2) + 4 k1 k2 - 6 k1^2 - 6 k2^2}
                 + 2 phi'''(1)(k1+k2)^2              (positive => the origin
    is absorbed by the supercritical region).

The one-parameter family (k1, k2, h1, h2) = (n, 1, n^3, -n^2) realises both
signs once n is large enough; the scan below finds the smallest such n and a
local 2D patch solver cross-checks the time derivative by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .nonlinearity import NonlinearityProfile
from .solvers import Patch2D, patch2d_time_derivative

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TaylorDatum:
    """Coefficients of the cubic initial datum."""

    k1: float
    k2: float
    h1: float
    h2: float

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (
            0.5 * SQRT2 * x
            + 0.5 * SQRT2 * y
            + self.k1 * x * x
            + self.k2 * y * y
            + self.h1 * x**3
            + self.h2 * y**3
        )

    def gradient(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ux = 0.5 * SQRT2 + 2.0 * self.k1 * x + 3.0 * self.h1 * x * x
        uy = 0.5 * SQRT2 + 2.0 * self.k2 * y + 3.0 * self.h2 * y * y
        return ux, uy


def datum_from_n(n: int) -> TaylorDatum:
    """The scan family (k1, k2, h1, h2) = (n, 1, n^3, -n^2)."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    return TaylorDatum(k1=float(n), k2=1.0, h1=float(n) ** 3, h2=-float(n) ** 2)


def dini_condition(datum: TaylorDatum) -> float:
    """y-derivative of |grad u0|^2 at the origin: 2 sqrt2 k2.

    Positive means the implicit function theorem applies to the level set
    |grad u0| = 1 near the origin.
    """
    return 2.0 * SQRT2 * datum.k2


def convexity_margin(datum: TaylorDatum) -> float:
    """8 k1^2 k2^2 + 3 sqrt2 (k1^2 h2 + k2^2 h1); negative means the
    supercritical boundary is locally convex."""
    k1, k2, h1, h2 = datum.k1, datum.k2, datum.h1, datum.h2
    return 8.0 * k1 * k1 * k2 * k2 + 3.0 * SQRT2 * (k1 * k1 * h2 + k2 * k2 * h1)


def vt_origin(datum: TaylorDatum, profile: NonlinearityProfile) -> float:
    """Closed-form time derivative of |grad u|^2 at the origin at t = 0."""
    k1, k2, h1, h2 = datum.k1, datum.k2, datum.h1, datum.h2
    phi1 = profile.phi1_at_critical
    phi3 = profile.phi3_at_critical
    bracket = 3.0 * SQRT2 * (h1 + h2) + 4.0 * k1 * k2 - 6.0 * k1 * k1 - 6.0 * k2 * k2
    return phi1 * bracket + 2.0 * phi3 * (k1 + k2) ** 2


def find_min_n(profile: NonlinearityProfile, n_max: int = 50) -> Optional[int]:
    """Smallest n in [1, n_max] with all three conditions; None if absent."""
    if n_max < 1:
        raise ConfigError("n_max must be at least 1")
    for n in range(1, n_max + 1):
        datum = datum_from_n(n)
        if (
            dini_condition(datum) > 0.0
            and convexity_margin(datum) < 0.0
            and vt_origin(datum, profile) > 0.0
        ):
            return n
    return None


@dataclass(frozen=True)
class CrosscheckResult:
    closed_form: float
    fd_value: float
    rel_err: float


def crosscheck_fd(
    datum: TaylorDatum,
    profile: NonlinearityProfile,
    patch_half_width: float = 1e-3,
    patch_n: int = 64,
) -> CrosscheckResult:
    """Finite-difference oracle for v_t(0,0,0) on a local 2D patch.

    Builds the datum on the patch, computes u_t from the divergence-form
    fluxes, then assembles 2(u_x u_tx + u_y u_ty) at the origin with centered
    differences.
    """
    if patch_half_width > 1e-2:
        raise ConfigError("patch_half_width must be at most 1e-2 to resolve the cubic")
    patch = Patch2D.from_function(datum.evaluate, patch_half_width, patch_n)
    u_t = patch2d_time_derivative(patch, profile)
    h = patch.spacing
    c = patch_n // 2  # origin index
    ux, uy = datum.gradient(0.0, 0.0)
    utx = (u_t[c + 1, c] - u_t[c - 1, c]) / (2.0 * h)
    uty = (u_t[c, c + 1] - u_t[c, c - 1]) / (2.0 * h)
    fd = 2.0 * (float(ux) * utx + float(uy) * uty)
    closed = vt_origin(datum, profile)
    if abs(closed) > 1e-12:
        rel = abs(fd - closed) / abs(closed)
    else:
        rel = abs(fd - closed)  # absolute difference for a vanishing target
    return CrosscheckResult(closed_form=closed, fd_value=fd, rel_err=rel)
