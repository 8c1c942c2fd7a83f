"""Quasi-static planar contact simulator.

The vehicle and the locked link form one rigid body moving in the (y, z)
plane.  The EE tip touches a flat surface through a spring-damper normal
contact and a stick-slip tangential contact bounded by the friction cone.
Thrust is produced by two rotor pairs whose commands come from

* an attitude PID loop tracking the commanded roll ``phi0``, and
* a thrust-magnitude loop that holds the tip still along the surface
  tangent (gravity compensated along that tangent, plus PID on the tip's
  tangential offset from the first-contact point).

Each pair is clamped to ``[0, T_max]`` per rotor.  Nothing in here evaluates
the closed-form force model; the equilibrium the dynamics settle into is
what the tests compare against it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .errors import InvalidInput, NumericalBlowup
from .model import OperationPoint, VehicleParams, solve_equilibrium
from .safety import ActuationLimits, calibrate_limits


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    k_spring: float = 2000.0
    c_spring: float = 50.0
    mu_s: float = 0.8
    k_tangent: float = 2000.0
    c_tangent: float = 50.0
    inertia_b: float = 0.025  # vehicle roll inertia about its CoM [kg m^2]
    drag: float = 1.0  # linear translational drag [N s/m]
    att_kp: float = 1600.0
    att_kd: float = 150.0
    att_ki: float = 5000.0
    alt_kp: float = 0.0
    alt_kd: float = 30.0
    alt_ki: float = 0.0
    t_max_sim: float = 10.0
    window_s: float = 1.0
    deriv_tol: float = 1e-3
    attitude_tol_deg: float = 0.01
    disturbance: float = 0.0
    seed: int = 0
    trace_every: int = 10

    def __post_init__(self):
        for name in ("dt", "k_spring", "mu_s", "k_tangent", "inertia_b", "t_max_sim", "window_s", "deriv_tol"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"SimConfig.{name} must be > 0")
        for name in ("c_spring", "c_tangent", "drag", "disturbance", "att_kp", "att_kd", "att_ki",
                     "alt_kp", "alt_kd", "alt_ki"):
            if getattr(self, name) < 0:
                raise InvalidInput(f"SimConfig.{name} must be >= 0")
        if self.trace_every < 1:
            raise InvalidInput("SimConfig.trace_every must be >= 1")


@dataclass
class SimState:
    """Planar state.  Position and velocity refer to the vehicle CoM."""

    y: float
    z: float
    phi: float  # roll [deg]
    vy: float = 0.0
    vz: float = 0.0
    roll_rate: float = 0.0  # [deg/s]
    in_contact: bool = False
    penetration: float = 0.0
    # controller and contact memory
    att_integral: float = 0.0
    tan_integral: float = 0.0
    anchor: float = 0.0


@dataclass
class SimResult:
    converged: bool
    f_n: float
    f_s: float
    T_in: float
    T_out: float
    saturation_events: int
    trace: np.ndarray = field(repr=False)
    phi_final: float = float("nan")
    time_s: float = 0.0
    status: str = "horizon"

    @property
    def reached_attitude(self) -> bool:
        return self.status == "converged"


def _inertia_about_com(params: VehicleParams, cfg: SimConfig, alpha_rad: float) -> float:
    # rigid offsets, independent of roll
    lever = math.hypot(params.b_1 + params.b_2 * math.cos(alpha_rad), params.b_2 * math.sin(alpha_rad))
    m = params.m_b + params.m_e
    d_b = params.m_e / m * lever
    d_e = params.m_b / m * lever
    return cfg.inertia_b + params.m_b * d_b**2 + params.m_e * d_e**2


def pack_params(
    op: OperationPoint,
    params: VehicleParams,
    limits: ActuationLimits,
    cfg: SimConfig,
    thrust: tuple[float, float] | None = None,
) -> np.ndarray:
    p = np.zeros(K.N_PARAMS)
    alpha = math.radians(op.alpha0)
    p[K.P_MASS] = params.m_b + params.m_e
    p[K.P_G] = params.g
    p[K.P_INERTIA] = _inertia_about_com(params, cfg, alpha)
    p[K.P_RARM] = params.r_arm
    p[K.P_TMAX] = limits.T_max
    p[K.P_BETA] = math.radians(op.beta0)
    p[K.P_PHIREF] = math.radians(op.phi0)
    p[K.P_ALPHA] = alpha
    p[K.P_B1] = params.b_1
    p[K.P_B2] = params.b_2
    p[K.P_ME] = params.m_e
    p[K.P_MB] = params.m_b
    p[K.P_KN] = cfg.k_spring
    p[K.P_CN] = cfg.c_spring
    p[K.P_KT] = cfg.k_tangent
    p[K.P_CT] = cfg.c_tangent
    p[K.P_MU] = cfg.mu_s
    p[K.P_ATT_KP] = cfg.att_kp
    p[K.P_ATT_KD] = cfg.att_kd
    p[K.P_ATT_KI] = cfg.att_ki
    p[K.P_ALT_KP] = cfg.alt_kp
    p[K.P_ALT_KD] = cfg.alt_kd
    p[K.P_ALT_KI] = cfg.alt_ki
    p[K.P_DT] = cfg.dt
    p[K.P_DERIV_TOL] = cfg.deriv_tol
    p[K.P_ATT_TOL] = math.radians(cfg.attitude_tol_deg)
    p[K.P_WINDOW] = int(round(cfg.window_s / cfg.dt))
    p[K.P_BOUND] = 1e6
    p[K.P_DRAG] = cfg.drag
    if thrust is not None:
        p[K.P_OVERRIDE] = 1.0
        p[K.P_TIN_CMD], p[K.P_TOUT_CMD] = thrust
    return p


def _to_vector(state: SimState, p: np.ndarray) -> np.ndarray:
    th = math.radians(state.phi)
    om = math.radians(state.roll_rate)
    gby, gbz, _, _ = K.body_offsets(th, p)
    x = np.zeros(K.N_STATE)
    x[K.X_CY] = state.y - gby
    x[K.X_CZ] = state.z - gbz
    x[K.X_TH] = th
    x[K.X_VY] = state.vy - om * gbz
    x[K.X_VZ] = state.vz + om * gby
    x[K.X_OM] = om
    x[K.X_ZATT] = state.att_integral
    x[K.X_ZS] = state.tan_integral
    x[K.X_ANCHOR] = state.anchor
    x[K.X_CONTACT] = 1.0 if state.in_contact else 0.0
    return x


def _from_vector(x: np.ndarray, p: np.ndarray, penetration: float) -> SimState:
    gby, gbz, _, _ = K.body_offsets(x[K.X_TH], p)
    om = x[K.X_OM]
    return SimState(
        y=float(x[K.X_CY] + gby),
        z=float(x[K.X_CZ] + gbz),
        phi=math.degrees(x[K.X_TH]),
        vy=float(x[K.X_VY] + om * gbz),
        vz=float(x[K.X_VZ] - om * gby),
        roll_rate=math.degrees(om),
        in_contact=bool(x[K.X_CONTACT] > 0.5),
        penetration=float(penetration),
        att_integral=float(x[K.X_ZATT]),
        tan_integral=float(x[K.X_ZS]),
        anchor=float(x[K.X_ANCHOR]),
    )


def _place_tip(phi_deg: float, penetration: float, p: np.ndarray) -> tuple[float, float]:
    """Vehicle CoM position putting the tip ``penetration`` past the surface at s = 0."""
    th = math.radians(phi_deg)
    gby, gbz, py, pz = K.body_offsets(th, p)
    beta = p[K.P_BETA]
    tip_y = penetration * math.sin(beta)
    tip_z = penetration * math.cos(beta)
    return tip_y - py + gby, tip_z - pz + gbz


def incipient_contact_state(op: OperationPoint, params: VehicleParams, limits: ActuationLimits,
                            cfg: SimConfig = SimConfig()) -> SimState:
    """At rest, commanded roll, tip touching the surface under zero load.

    The attitude integrator carries the free-flight trim for ``phi0``, as it
    would on arrival from the approach phase.
    """
    p = pack_params(op, params, limits, cfg)
    y, z = _place_tip(op.phi0, 0.0, p)
    return SimState(y=y, z=z, phi=op.phi0, att_integral=_free_flight_trim(op.phi0, p, cfg))


def _free_flight_trim(roll_deg: float, p: np.ndarray, cfg: SimConfig) -> float:
    """Attitude-integrator value that holds ``roll_deg`` in free flight.

    The thrust loop at rest commands ``m g sin(beta) / sin(alpha)``; the rotor
    pair difference must cancel that thrust's moment about the system CoM,
    which sits off the vehicle CoM because of the link mass.
    """
    if cfg.att_ki <= 0:
        return 0.0
    th = math.radians(roll_deg)
    gby, gbz, _, _ = K.body_offsets(th, p)
    thrust = p[K.P_MASS] * p[K.P_G] * math.sin(p[K.P_BETA]) / math.sin(p[K.P_BETA] - th)
    moment = thrust * (gbz * math.sin(th) - gby * math.cos(th))
    return -moment / (p[K.P_INERTIA] * cfg.att_ki)


def equilibrium_state(op: OperationPoint, params: VehicleParams, limits: ActuationLimits,
                      cfg: SimConfig = SimConfig()) -> SimState:
    """State sitting exactly on the closed-form equilibrium.

    The spring is pre-deflected by ``f_e / k_spring`` and the attitude
    integrator is pre-loaded with the rotor torque the equilibrium needs.
    """
    sol = solve_equilibrium(op, params)
    p = pack_params(op, params, limits, cfg)
    pen = sol.f_e / cfg.k_spring
    y, z = _place_tip(op.phi0, pen, p)
    torque = 2.0 * params.r_arm * (sol.T_out - sol.T_in)
    att_int = torque / (p[K.P_INERTIA] * cfg.att_ki) if cfg.att_ki > 0 else 0.0
    return SimState(y=y, z=z, phi=op.phi0, in_contact=pen > 0, penetration=pen, att_integral=att_int)


def step(
    state: SimState,
    config: SimConfig,
    op: OperationPoint,
    params: VehicleParams = VehicleParams(),
    limits: ActuationLimits | None = None,
    thrust: tuple[float, float] | None = None,
    noise: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> tuple[SimState, dict]:
    """Advance one step.  ``thrust`` bypasses the controllers with fixed (T_in, T_out).

    Returns the new state and a dict of step diagnostics (contact forces,
    applied thrusts, saturation flag, state-derivative norm at ``state``).
    """
    limits = limits or calibrate_limits(params)
    p = pack_params(op, params, limits, config, thrust)
    x = _to_vector(state, p)
    xn, f_n, f_s, t_in, t_out, sat, dnorm, pen = K.step_kernel(x, p, *noise)
    if not np.all(np.isfinite(xn)) or np.max(np.abs(xn)) > p[K.P_BOUND]:
        raise NumericalBlowup("simulator state left the bounded region")
    # penetration reported for the new state
    _, _, py, pz = K.body_offsets(xn[K.X_TH], p)
    beta = p[K.P_BETA]
    new_pen = max(0.0, (xn[K.X_CY] + py) * math.sin(beta) + (xn[K.X_CZ] + pz) * math.cos(beta))
    diag = {"f_n": f_n, "f_s": f_s, "T_in": t_in, "T_out": t_out, "saturated": bool(sat > 0.5),
            "deriv_norm": dnorm, "penetration": pen}
    return _from_vector(xn, p, new_pen), diag


def run_to_equilibrium(
    op: OperationPoint,
    params: VehicleParams = VehicleParams(),
    limits: ActuationLimits | None = None,
    config: SimConfig = SimConfig(),
    initial: SimState | None = None,
) -> SimResult:
    """Integrate from incipient contact until the contact phase settles.

    ``converged`` means: for one full window the state-derivative norm stayed
    below ``deriv_tol``, roll stayed within ``attitude_tol_deg`` of ``phi0``
    and no rotor was clamped.  Running out of horizon is not an error.
    """
    limits = limits or calibrate_limits(params)
    p = pack_params(op, params, limits, config)
    state = initial or incipient_contact_state(op, params, limits, config)
    x0 = _to_vector(state, p)
    n_steps = int(round(config.t_max_sim / config.dt))
    noise = np.zeros((n_steps, 3))
    if config.disturbance > 0:
        rng = np.random.default_rng(config.seed)
        amp = config.disturbance
        noise = rng.uniform(-amp, amp, size=(n_steps, 3))
        noise[:, 2] *= params.r_arm
    trace = np.zeros((n_steps, len(K.TRACE_COLUMNS)))
    x, done, status, sat_steps = K.integrate(x0, p, noise, n_steps, trace)
    trace = trace[:done]
    if status == K.STATUS_BLOWUP:
        raise NumericalBlowup(f"simulation diverged at t = {done * config.dt:.3f} s")
    window = max(1, min(done, int(round(config.window_s / config.dt))))
    tail = trace[-window:]
    return SimResult(
        converged=status == K.STATUS_CONVERGED,
        f_n=float(tail[:, 4].mean()),
        f_s=float(tail[:, 5].mean()),
        T_in=float(tail[:, 6].mean()),
        T_out=float(tail[:, 7].mean()),
        saturation_events=int(sat_steps),
        trace=trace,
        phi_final=math.degrees(x[K.X_TH]),
        time_s=done * config.dt,
        status={K.STATUS_CONVERGED: "converged", K.STATUS_HORIZON: "horizon"}[status],
    )


def decimated_trace(result: SimResult, every: int) -> np.ndarray:
    """Every ``every``-th trace row, always keeping the last one."""
    idx = np.arange(0, len(result.trace), every)
    if len(result.trace) and idx[-1] != len(result.trace) - 1:
        idx = np.append(idx, len(result.trace) - 1)
    return result.trace[idx]

