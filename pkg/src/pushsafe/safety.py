"""Saturation calibration, interaction-zone identification and risk scoring."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .errors import InvalidInput, NonMonotone, NotBracketed
from .model import ALPHA_TOL_DEG, OperationPoint, VehicleParams, rotor_pair_thrusts

#: Zone boundaries as published for the reference vehicle, eta = 0.7:
#: beta0 -> (safe upper, critical lower, critical upper), integer degrees.
PUBLISHED_ZONES: dict[float, tuple[int, int, int]] = {
    10.0: (1, 2, 4),
    30.0: (3, 4, 10),
    60.0: (7, 8, 21),
    80.0: (10, 11, 29),
    90.0: (12, 13, 34),
}

BOUNDARY_TOL_N = 1e-6
PRECHECK_POINTS = 2001

PHI_U_MODES = ("continuous", "integer", "published")


@dataclass(frozen=True)
class ActuationLimits:
    C_h: float
    eta: float
    T_sum_max: float
    T_max: float

    @property
    def T_safe(self) -> float:
        """Outer-pair thrust above which operation is no longer safe."""
        return self.eta * self.T_max


def calibrate_limits(params: VehicleParams = VehicleParams(), C_h: float = 0.61, eta: float = 0.7) -> ActuationLimits:
    """Thrust saturation from the hover thrust ratio ``C_h = G_t / T_sum_max``."""
    if not 0.0 < C_h < 1.0:
        raise InvalidInput(f"hover ratio C_h must lie in (0, 1), got {C_h}")
    if not 0.0 < eta <= 0.9:
        raise InvalidInput(f"safety factor eta must lie in (0, 0.9], got {eta}")
    T_sum_max = params.G_t / C_h
    return ActuationLimits(C_h=C_h, eta=eta, T_sum_max=T_sum_max, T_max=T_sum_max / 4.0)


class Zone(str, enum.Enum):
    SAFE = "SAFE"
    CRITICAL = "CRITICAL"
    FAILURE = "FAILURE"


@dataclass(frozen=True)
class Assessment:
    zone: Zone
    T_out: float
    lam: float | None = None
    phi_u: float | None = None

    def __post_init__(self):
        if (self.lam is not None) != (self.zone is Zone.CRITICAL):
            raise InvalidInput("risk level is defined for critical assessments only")

    def __str__(self) -> str:
        if self.zone is Zone.CRITICAL:
            return f"CRITICAL λ={self.lam:.2f}"
        return self.zone.value


@dataclass(frozen=True)
class ZoneBoundaries:
    beta0: float
    phi_safe_hi: float
    phi_crit_hi: float
    table_safe_hi: int
    table_crit_lo: int
    table_crit_hi: int


def _outer_thrust_curve(beta0: float, phis: np.ndarray, params: VehicleParams) -> np.ndarray:
    return kernels.outer_thrust_scan(
        math.radians(beta0), np.radians(phis), params.G_t, params.link_weight,
        params.b_1, params.b_2, params.r_arm,
    )


def _bisect(f, lo: float, hi: float, xtol: float = 1e-11, max_iter: int = 200) -> float:
    """Root of an increasing ``f`` with ``f(lo) <= 0 < f(hi)``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < xtol:
            break
    return 0.5 * (lo + hi)


def thrust_boundary(beta0: float, threshold_N: float, params: VehicleParams = VehicleParams()) -> float:
    """Roll angle [deg] at which the outer-pair thrust reaches ``threshold_N``.

    Returns 0 when the threshold is already met at zero roll.  The search
    runs on ``[0, beta0 - ALPHA_TOL_DEG]`` after checking on a dense grid
    that the thrust is strictly increasing there.
    """
    OperationPoint(beta0, 0.0)
    hi = beta0 - ALPHA_TOL_DEG
    if hi <= 0.0:
        raise NotBracketed(f"beta0 = {beta0} deg leaves no admissible roll range")

    def excess(phi):
        return rotor_pair_thrusts(OperationPoint(beta0, phi), params)[1] - threshold_N

    if excess(0.0) >= 0.0:
        return 0.0
    grid = np.linspace(0.0, hi, PRECHECK_POINTS)
    curve = _outer_thrust_curve(beta0, grid, params)
    if not np.all(np.diff(curve) > 0.0):
        raise NonMonotone(f"outer-pair thrust is not increasing in roll at beta0 = {beta0} deg")
    if excess(hi) < 0.0:
        raise NotBracketed(
            f"threshold {threshold_N:.4g} N not reached before joint angle {ALPHA_TOL_DEG} deg at beta0 = {beta0}"
        )
    phi = _bisect(excess, 0.0, hi)
    if abs(excess(phi)) > BOUNDARY_TOL_N:
        raise NotBracketed(f"bisection stalled at residual {excess(phi):.3g} N")
    return phi


def zone_boundaries(beta0: float, params: VehicleParams, limits: ActuationLimits) -> ZoneBoundaries:
    safe_hi = thrust_boundary(beta0, limits.T_safe, params)
    crit_hi = thrust_boundary(beta0, limits.T_max, params)
    table_safe_hi = int(math.floor(safe_hi))
    return ZoneBoundaries(
        beta0=float(beta0),
        phi_safe_hi=safe_hi,
        phi_crit_hi=crit_hi,
        table_safe_hi=table_safe_hi,
        table_crit_lo=table_safe_hi + 1,
        table_crit_hi=int(math.floor(crit_hi)),
    )


def zone_table(
    beta_list: Iterable[float], params: VehicleParams = VehicleParams(), limits: ActuationLimits | None = None
) -> list[ZoneBoundaries]:
    limits = limits or calibrate_limits(params)
    return [zone_boundaries(b, params, limits) for b in beta_list]


def upper_roll_bound(beta0: float, params: VehicleParams, limits: ActuationLimits, mode: str = "continuous") -> float:
    """Critical-zone upper boundary used as the risk denominator.

    ``continuous`` is the root of the saturation crossing, ``integer`` its
    floor, ``published`` the tabulated reference value (only defined for the
    tabulated surface angles).
    """
    if mode == "continuous":
        return thrust_boundary(beta0, limits.T_max, params)
    if mode == "integer":
        return float(math.floor(thrust_boundary(beta0, limits.T_max, params)))
    if mode == "published":
        try:
            return float(PUBLISHED_ZONES[float(beta0)][2])
        except KeyError:
            raise InvalidInput(f"no published zone boundary for beta0 = {beta0} deg") from None
    raise InvalidInput(f"unknown phi_u mode {mode!r}; expected one of {PHI_U_MODES}")


def risk(phi0: float, phi_u: float) -> float:
    """Risk level of a critical-zone roll angle, ``phi0 / phi_u``."""
    if not phi_u > 0:
        raise InvalidInput(f"phi_u must be > 0, got {phi_u}")
    if not 0.0 < phi0 <= phi_u:
        raise InvalidInput(f"phi0 = {phi0} outside (0, phi_u = {phi_u}]: not a critical-zone roll")
    return phi0 / phi_u


def classify(
    beta0: float,
    phi0: float,
    params: VehicleParams = VehicleParams(),
    limits: ActuationLimits | None = None,
    phi_u_mode: str = "continuous",
) -> Assessment:
    """Safe / Critical / Failure from the predicted outer-pair thrust.

    Only critical points carry a risk level; its denominator comes from
    :func:`upper_roll_bound` with ``phi_u_mode``.
    """
    limits = limits or calibrate_limits(params)
    t_out = rotor_pair_thrusts(OperationPoint(beta0, phi0), params)[1]
    if t_out <= limits.T_safe:
        return Assessment(Zone.SAFE, t_out)
    if t_out > limits.T_max:
        return Assessment(Zone.FAILURE, t_out)
    phi_u = upper_roll_bound(beta0, params, limits, phi_u_mode)
    return Assessment(Zone.CRITICAL, t_out, lam=risk(phi0, phi_u), phi_u=phi_u)
