"""Closed-form static-equilibrium model of the pushing aerial manipulator.

The vehicle and its locked 1-DoF link are treated as a single rigid body in
the plane that contains the surface normal.  Angles enter and leave every
public function in degrees; trigonometry is done in radians internally.

All quantities use magnitudes: surface orientation ``beta0``, vehicle roll
``phi0`` and joint angle ``alpha0 = beta0 - phi0`` always share a sign, so
only their absolute values matter.  :meth:`OperationPoint.from_signed`
performs that normalisation.

``r_arm`` is used as the full propeller-to-CoM distance in the rotor torque
balance (no in-plane projection for the X frame), matching the reference
parameter set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DegenerateGeometry, InvalidInput, NegativeThrust

#: Joint angles below this (deg) are rejected: force and thrust blow up as 1/sin(alpha0).
ALPHA_TOL_DEG = 0.5


@dataclass(frozen=True)
class VehicleParams:
    """Mass and geometry of the aerial manipulator (SI units)."""

    m_b: float = 2.1
    m_e: float = 0.1
    r_arm: float = 0.266
    b_1: float = 0.113
    b_2: float = 0.593
    g: float = 9.8

    def __post_init__(self):
        for name in ("m_b", "m_e", "r_arm", "b_1", "b_2", "g"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInput(f"VehicleParams.{name} must be finite and > 0, got {value!r}")

    @property
    def G_t(self) -> float:
        """Total weight of vehicle plus manipulator [N]."""
        return (self.m_b + self.m_e) * self.g

    @property
    def link_weight(self) -> float:
        return self.m_e * self.g


@dataclass(frozen=True)
class OperationPoint:
    """A commanded pushing configuration: surface angle and vehicle roll [deg]."""

    beta0: float
    phi0: float

    def __post_init__(self):
        b, p = self.beta0, self.phi0
        if not (math.isfinite(b) and math.isfinite(p)):
            raise InvalidInput(f"non-finite operation point ({b!r}, {p!r})")
        if not 0.0 < b <= 90.0:
            raise InvalidInput(f"beta0 must lie in (0, 90] deg, got {b}")
        if not 0.0 <= p < b:
            raise InvalidInput(f"phi0 must lie in [0, beta0) = [0, {b}) deg, got {p}")

    @property
    def alpha0(self) -> float:
        return self.beta0 - self.phi0

    @classmethod
    def from_signed(cls, beta_w: float, phi_w: float) -> "OperationPoint":
        """Build from inertial-frame signed angles, which must share a sign."""
        if beta_w * phi_w < 0:
            raise InvalidInput("surface and roll angles must have the same sign")
        return cls(abs(beta_w), abs(phi_w))


@dataclass(frozen=True)
class EEPose:
    phi_e: float


@dataclass(frozen=True)
class EquilibriumSolution:
    """Forces, thrusts and lever arms at quasi-static equilibrium."""

    f_e: float
    T_sum: float
    T_in: float
    T_out: float
    tau_sum_x: float
    l_e: float
    l_Ge: float


class SweepRow(NamedTuple):
    beta0: float
    phi0: float
    f_e: float
    T_sum: float
    T_in: float
    T_out: float


def _radians(op: OperationPoint) -> tuple[float, float, float]:
    if op.alpha0 < ALPHA_TOL_DEG:
        raise DegenerateGeometry(
            f"joint angle {op.alpha0:.4g} deg below {ALPHA_TOL_DEG} deg at "
            f"(beta0={op.beta0}, phi0={op.phi0})"
        )
    return math.radians(op.beta0), math.radians(op.phi0), math.radians(op.alpha0)


def ee_orientation(op: OperationPoint) -> EEPose:
    # The task constraint forces the EE frame onto the surface normal.
    return EEPose(phi_e=op.phi0 + op.alpha0)


def contact_force(op: OperationPoint, params: VehicleParams = VehicleParams()) -> float:
    """Normal contact force magnitude f_e [N]."""
    _, p, a = _radians(op)
    return params.G_t * math.sin(p) / math.sin(a)


def total_thrust(op: OperationPoint, params: VehicleParams = VehicleParams()) -> float:
    """Total rotor thrust T_sum [N]."""
    b, _, a = _radians(op)
    return params.G_t * math.sin(b) / math.sin(a)


def contact_force_slope(op: OperationPoint, params: VehicleParams = VehicleParams()) -> float:
    """Analytic d f_e / d phi0 in N per degree."""
    b, _, a = _radians(op)
    return params.G_t * math.sin(b) / math.sin(a) ** 2 * (math.pi / 180.0)


def lever_arms(op: OperationPoint, params: VehicleParams = VehicleParams()) -> tuple[float, float]:
    """Return ``(l_Ge, l_e)``: manipulator-weight and contact-force lever arms [m]."""
    b, p, a = (math.radians(op.beta0), math.radians(op.phi0), math.radians(op.alpha0))
    l_Ge = params.b_2 * math.sin(b) + params.b_1 * math.sin(p)
    l_e = params.b_1 * math.sin(a)
    return l_Ge, l_e


def rotor_pair_thrusts(
    op: OperationPoint, params: VehicleParams = VehicleParams(), strict: bool = False
) -> tuple[float, float]:
    """Per-rotor thrust of the inner and outer pair, ``(T_in, T_out)`` [N].

    The pair sum carries a quarter of the total thrust each side; the
    difference is whatever rotor torque closes the moment balance about the
    vehicle CoM.  A negative ``T_in`` is returned as is unless ``strict``.
    """
    T_sum = total_thrust(op, params)
    f_e = contact_force(op, params)
    l_Ge, l_e = lever_arms(op, params)
    tau = f_e * l_e - params.link_weight * l_Ge
    half_diff = tau / (4.0 * params.r_arm)
    T_in = T_sum / 4.0 - half_diff
    T_out = T_sum / 4.0 + half_diff
    if strict and T_in < 0:
        raise NegativeThrust(f"T_in = {T_in:.4g} N < 0 at (beta0={op.beta0}, phi0={op.phi0})")
    return T_in, T_out


def outer_thrust(op: OperationPoint, params: VehicleParams = VehicleParams()) -> float:
    return rotor_pair_thrusts(op, params)[1]


def solve_equilibrium(op: OperationPoint, params: VehicleParams = VehicleParams()) -> EquilibriumSolution:
    f_e = contact_force(op, params)
    T_sum = total_thrust(op, params)
    T_in, T_out = rotor_pair_thrusts(op, params)
    l_Ge, l_e = lever_arms(op, params)
    return EquilibriumSolution(
        f_e=f_e,
        T_sum=T_sum,
        T_in=T_in,
        T_out=T_out,
        tau_sum_x=2.0 * (T_out - T_in) * params.r_arm,
        l_e=l_e,
        l_Ge=l_Ge,
    )


def equilibrium_residuals(
    op: OperationPoint, params: VehicleParams, sol: EquilibriumSolution
) -> tuple[float, float, float]:
    """Signed vertical, lateral and moment balance residuals of ``sol``.

    Geometry is taken from ``op``; the rotor torque is rebuilt from the pair
    thrusts so that inconsistent pair values show up in ``r_tau``.
    """
    b, p = math.radians(op.beta0), math.radians(op.phi0)
    l_Ge, l_e = lever_arms(op, params)
    tau = 2.0 * (sol.T_out - sol.T_in) * params.r_arm
    r_z = sol.T_sum * math.cos(p) - params.G_t - sol.f_e * math.cos(b)
    r_y = sol.T_sum * math.sin(p) - sol.f_e * math.sin(b)
    r_tau = tau + params.link_weight * l_Ge - sol.f_e * l_e
    return r_z, r_y, r_tau


def equilibrium_grid(beta0, phi0, params: VehicleParams = VehicleParams()) -> dict[str, np.ndarray]:
    """Vectorised closed form over broadcastable angle arrays [deg].

    No degeneracy check is made here; callers keep ``beta0 - phi0`` away from 0.
    """
    b = np.radians(np.asarray(beta0, dtype=float))
    p = np.radians(np.asarray(phi0, dtype=float))
    a = b - p
    G_t = params.G_t
    f_e = G_t * np.sin(p) / np.sin(a)
    T_sum = G_t * np.sin(b) / np.sin(a)
    l_Ge = params.b_2 * np.sin(b) + params.b_1 * np.sin(p)
    l_e = params.b_1 * np.sin(a)
    half_diff = (f_e * l_e - params.link_weight * l_Ge) / (4.0 * params.r_arm)
    return {
        "f_e": f_e,
        "T_sum": T_sum,
        "T_in": T_sum / 4.0 - half_diff,
        "T_out": T_sum / 4.0 + half_diff,
        "l_e": l_e,
        "l_Ge": l_Ge,
    }


def sweep_curves(
    beta_list: Iterable[float], phi_step: float, params: VehicleParams = VehicleParams()
) -> list[SweepRow]:
    """Force/thrust curves for each surface angle, phi0 = 0, step, 2*step, ...

    Each curve stops before the joint angle drops below ``ALPHA_TOL_DEG``.
    """
    if not phi_step > 0:
        raise InvalidInput(f"phi_step must be > 0, got {phi_step}")
    rows: list[SweepRow] = []
    for beta0 in beta_list:
        OperationPoint(beta0, 0.0)
        n = int(math.floor((beta0 - ALPHA_TOL_DEG) / phi_step + 1e-9)) + 1
        phis = np.arange(n) * phi_step
        phis = phis[beta0 - phis >= ALPHA_TOL_DEG]
        grid = equilibrium_grid(beta0, phis, params)
        for i, phi0 in enumerate(phis):
            rows.append(
                SweepRow(
                    float(beta0),
                    float(phi0),
                    float(grid["f_e"][i]),
                    float(grid["T_sum"][i]),
                    float(grid["T_in"][i]),
                    float(grid["T_out"][i]),
                )
            )
    return rows
