"""The diffusion nonlinearity and everything derived from it.

The model equations are driven by an even function ``phi`` whose second
derivative is positive below the critical slope 1, vanishes at 1, and is
negative above it.  This module houses the two profile flavours (the concrete
Perona-Malik log profile and tabulated samples), the structural hypothesis
checker, the truncated monotone flux, its inverse, the degenerate diffusivity
of the slope-transformed equation, and the derived expansion constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisError, NumericError, RangeError

#: critical slope separating the forward and backward regimes
SIGMA_CRITICAL = 1.0

#: residual tolerance for the bisection inverting the truncated flux
TOL_ROOT = 1e-12

#: sign margin used by the tabulated hypothesis checks
SIGN_MARGIN = 1e-6


class NonlinearityProfile:
    """Common interface of the nonlinearity flavours.

    Profiles are immutable after construction and safe to share between
    concurrent runs.
    """

    kind: str = "abstract"
    name: str = "abstract"
    sigma_critical: float = SIGMA_CRITICAL

    def phi(self, sigma, order: int = 0):
        raise NotImplementedError

    @property
    def phi1_at_critical(self) -> float:
        """phi'(1), the plateau value of the truncated flux."""
        return float(self.phi(self.sigma_critical, 1))

    @property
    def phi3_at_critical(self) -> float:
        """phi'''(1), negative for profiles with a strict inflection."""
        return float(self.phi(self.sigma_critical, 3))

    @property
    def supercritical_sample_max(self) -> float:
        """Largest slope at which hypothesis checks may sample phi''."""
        raise NotImplementedError


class ConcretePM(NonlinearityProfile):
    """phi(s) = log(1 + s^2)/2 with closed-form derivatives up to order 3."""

    kind = "concrete_pm"
    name = "pm"

    def phi(self, sigma, order: int = 0):
        s = np.asarray(sigma, dtype=float)
        d = 1.0 + s * s
        if order == 0:
            out = 0.5 * np.log1p(s * s)
        elif order == 1:
            out = s / d
        elif order == 2:
            out = (1.0 - s * s) / (d * d)
        elif order == 3:
            out = -2.0 * s * (3.0 - s * s) / (d * d * d)
        else:
            raise DomainError(f"derivative order must be 0..3, got {order}")
        return out if out.ndim else float(out)

    @property
    def supercritical_sample_max(self) -> float:
        return 10.0


class Tabulated(NonlinearityProfile):
    """Profile sampled on a uniform slope grid; derivatives by differences.

    Derivative tables use 4th-order central differences applied successively
   , so each order loses two cells at both ends of the table.  Queries
    outside the remaining valid range raise :class:`RangeError`.
    """

    kind = "tabulated"

    def __init__(self, sigma: np.ndarray, values: np.ndarray, name: str = "tabulated"):
        sigma = np.asarray(sigma, dtype=float)
        values = np.asarray(values, dtype=float)
        if sigma.ndim != 1 or sigma.shape != values.shape or sigma.size < 16:
            raise DomainError("need matching 1-D arrays with at least 16 samples")
        if not np.all(np.diff(sigma) > 0):
            raise DomainError("sample slopes must be strictly ascending")
        steps = np.diff(sigma)
        if np.ptp(steps) > 1e-9 * steps[0]:
            raise DomainError("sample slopes must be uniformly spaced")

        if sigma[0] == 0.0:
            # even extension around 0; the file only carries sigma >= 0
            sigma = np.concatenate([-sigma[:0:-1], sigma])
            values = np.concatenate([values[:0:-1], values])
        elif sigma[0] > 0.0:
            raise DomainError("samples must start at 0 or cover negative slopes")
        else:
            self._check_even(sigma, values)

        if sigma[0] > -0.75 or sigma[-1] < 1.5:
            raise DomainError("samples must cover at least [-0.75, 1.5]")

        self.name = name
        self._sigma = sigma
        self._h = float(sigma[1] - sigma[0])
        self._tables = [values]
        for _ in range(3):
            self._tables.append(self._central4(self._tables[-1], self._h))

    @staticmethod
    def _check_even(sigma, values):
        mirrored = np.interp(-sigma, sigma, values, left=np.nan, right=np.nan)
        ok = np.isnan(mirrored) | (np.abs(mirrored - values) <= SIGN_MARGIN)
        if not ok.all():
            raise DomainError("sampled function is not even within tolerance")

    @staticmethod
    def _central4(f, h):
        """(-f2 + 8f1 - 8f-1 + f-2)/(12h) on the interior, nan padding."""
        out = np.full_like(f, np.nan)
        out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
        return out

    def _valid_bounds(self, order):
        lo = self._sigma[2 * order] if order else self._sigma[0]
        hi = self._sigma[-1 - 2 * order] if order else self._sigma[-1]
        return lo, hi

    def phi(self, sigma, order: int = 0):
        if order not in (0, 1, 2, 3):
            raise DomainError(f"derivative order must be 0..3, got {order}")
        s = np.asarray(sigma, dtype=float)
        lo, hi = self._valid_bounds(order)
        if np.any(s < lo) or np.any(s > hi):
            raise RangeError(
                f"slope outside tabulated range [{lo:g}, {hi:g}] for order {order}"
            )
        table = self._tables[order]
        mask = ~np.isnan(table)
        out = np.interp(s, self._sigma[mask], table[mask])
        return out if out.ndim else float(out)

    @property
    def supercritical_sample_max(self) -> float:
        return self._valid_bounds(3)[1]

    @classmethod
    def from_file(cls, path, name=None):
        data = np.loadtxt(path, dtype=float)
        if data.ndim != 2 or data.shape[1] != 2:
            raise DomainError("sample file must have two whitespace-separated columns")
        return cls(data[:, 0], data[:, 1], name=name or str(path))


def profile_by_name(spec: str) -> NonlinearityProfile:
    """Resolve the config string: ``"pm"`` or a path to a two-column file."""
    if spec == "pm":
        return ConcretePM()
    return Tabulated.from_file(spec)


def eval_phi(profile: NonlinearityProfile, sigma, order: int = 0):
    """Evaluate phi or one of its first three derivatives at ``sigma``."""
    return profile.phi(sigma, order)


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    margin: float


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the four structural checks on a profile.

    ``margin`` is the distance to violation: the worst sampled phi'' below the
    critical slope, the equality slack at the critical slope, the worst
    sampled -phi'' above it, and -phi'''(1).
    """

    convex_below: CheckResult
    flat_at_critical: CheckResult
    concave_above: CheckResult
    strict_inflection: CheckResult

    @property
    def all_hold(self) -> bool:
        return (
            self.convex_below.holds
            and self.flat_at_critical.holds
            and self.concave_above.holds
            and self.strict_inflection.holds
        )


def check_hypotheses(profile: NonlinearityProfile, sample_count: int = 256) -> HypothesisReport:
    """Sample-based verification of the four hypotheses on phi''/phi'''."""
    if sample_count < 16:
        raise DomainError("sample_count must be at least 16")
    below = np.linspace(0.0, 1.0, sample_count, endpoint=False)
    phi2_below = np.asarray(profile.phi(below, 2))
    margin_below = float(phi2_below.min())

    phi2_crit = float(profile.phi(profile.sigma_critical, 2))
    eq_slack = SIGN_MARGIN - abs(phi2_crit)

    hi = profile.supercritical_sample_max
    above = np.linspace(1.0, hi, sample_count + 1)[1:]
    phi2_above = np.asarray(profile.phi(above, 2))
    margin_above = float((-phi2_above).min())

    phi3_crit = float(profile.phi(profile.sigma_critical, 3))

    return HypothesisReport(
        convex_below=CheckResult(margin_below > 0.0, margin_below),
        flat_at_critical=CheckResult(eq_slack >= 0.0, phi2_crit),
        concave_above=CheckResult(margin_above > 0.0, margin_above),
        strict_inflection=CheckResult(phi3_crit < -SIGN_MARGIN, -phi3_crit),
    )


def truncated_flux_h(profile: NonlinearityProfile, sigma):
    """The C^1 nondecreasing truncation of phi'.

    Equals phi' on [0, 1], stays at the plateau phi'(1) for slopes >= 1, and
    is constant below -1/2.  On [-1/2, 0] we use the quadratic joiner
    q(s) = phi''(0) (s + 1/2)^2 - phi''(0)/4, which matches value and slope of
    phi' at 0 and has zero slope at -1/2.
    """
    s = np.asarray(sigma, dtype=float)
    cap = profile.phi1_at_critical
    c0 = float(profile.phi(0.0, 2))
    mid = np.clip(s, 0.0, 1.0)
    out = np.where(
        s >= 0.0,
        np.where(s >= 1.0, cap, np.asarray(profile.phi(mid, 1))),
        c0 * (np.maximum(s, -0.5) + 0.5) ** 2 - 0.25 * c0,
    )
    return out if out.ndim else float(out)


def h_inverse(profile: NonlinearityProfile, y: float) -> float:
    """Invert the truncated flux on (0, phi'(1)) by bisection.

    Returns the slope in (0, 1) with ``|h(slope) - y| <= TOL_ROOT``.
    """
    cap = profile.phi1_at_critical
    if not 0.0 < y < cap:
        raise DomainError(f"flux value must lie strictly inside (0, {cap:g})")
    lo, hi = 0.0, 1.0
    f_mid = math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = float(profile.phi(mid, 1)) - y
        if abs(f_mid) <= TOL_ROOT:
            return mid
        if f_mid < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17:
            break
    mid = 0.5 * (lo + hi)
    if abs(float(profile.phi(mid, 1)) - y) <= 10 * TOL_ROOT:
        return mid
    raise NumericError(f"flux inversion stalled at residual {f_mid:.3e}")


def coeff_g(profile: NonlinearityProfile, sigma: float) -> float:
    """Diffusivity of the transformed equation: phi''(h^-1(phi'(1) - sigma)).

    Defined (and positive) for sigma strictly inside (0, phi'(1)).  This is
    the generic route through the flux inverse; the concrete-profile closed
    form is kept as an independent oracle in the test-suite.
    """
    cap = profile.phi1_at_critical
    if not 0.0 < sigma < cap:
        raise DomainError(f"diffusivity argument must lie inside (0, {cap:g})")
    return float(profile.phi(h_inverse(profile, cap - sigma), 2))


def coeff_g_array(profile: NonlinearityProfile, sigma: np.ndarray) -> np.ndarray:
    """Vectorised diffusivity used by the solver hot loops.

    For the concrete profile this is the closed form
    ``sqrt(s - s^2) + 2 (s - s^2)`` on (0, phi'(1)), equivalent to the generic
    route within 1e-8.  Tabulated profiles go through a dense inverse
    table of the truncated flux.
    """
    s = np.asarray(sigma, dtype=float)
    cap = profile.phi1_at_critical
    if np.any(s < 0.0) or np.any(s >= cap):
        raise RangeError(f"diffusivity arguments must lie inside [0, {cap:g})")
    if isinstance(profile, ConcretePM):
        p = s - s * s
        return np.sqrt(p) + 2.0 * p
    table = _inverse_table(profile)
    tau = np.interp(cap - s, table[0], table[1])
    return np.asarray(profile.phi(tau, 2)) * (s > 0.0)


_INVERSE_TABLE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _inverse_table(profile):
    key = id(profile)
    if key not in _INVERSE_TABLE_CACHE:
        tau = np.linspace(0.0, 1.0, 8193)
        flux = np.asarray(profile.phi(tau, 1))
        flux = np.maximum.accumulate(flux)  # guard monotonicity against noise
        _INVERSE_TABLE_CACHE[key] = (flux, tau)
    return _INVERSE_TABLE_CACHE[key]


@dataclass(frozen=True)
class DerivedConstants:
    """Constants of the radial expansion estimate for a given outer radius."""

    G: float   # limit of g(s)/sqrt(s) at zero: sqrt(2 |phi'''(1)|)
    A: float   # source floor phi'(1)/r2^2
    k0: float  # expansion rate G*sqrt(A)
    r2: float


def constants(profile: NonlinearityProfile, r2: float) -> DerivedConstants:
    """Expansion constants G, A and k0 = G sqrt(A) for outer radius ``r2``."""
    if r2 <= 0.0:
        raise DomainError("outer radius must be positive")
    phi1 = profile.phi1_at_critical
    phi3 = profile.phi3_at_critical
    if phi3 >= -SIGN_MARGIN:
        raise HypothesisError("phi'''(1) must be negative for the expansion constants")
    if phi1 <= 0.0:
        raise HypothesisError("phi'(1) must be positive for the expansion constants")
    G = math.sqrt(2.0 * abs(phi3))
    A = phi1 / (r2 * r2)
    return DerivedConstants(G=G, A=A, k0=G * math.sqrt(A), r2=r2)
