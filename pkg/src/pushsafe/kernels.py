"""Hot numeric loops.

Every kernel is written once as plain Python over scalars and float64
arrays and compiled with numba when :data:`pushsafe._accel.USE_NUMBA` is
true.  The thrust scan additionally has a vectorised numpy path, which is
what runs when numba is disabled.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, kernel

# Layout of the constant vector ``p`` consumed by the simulator kernels.
P_MASS, P_G, P_INERTIA, P_RARM, P_TMAX = 0, 1, 2, 3, 4
P_BETA, P_PHIREF, P_ALPHA, P_B1, P_B2, P_ME, P_MB = 5, 6, 7, 8, 9, 10, 11
P_KN, P_CN, P_KT, P_CT, P_MU = 12, 13, 14, 15, 16
P_ATT_KP, P_ATT_KD, P_ATT_KI, P_ALT_KP, P_ALT_KD, P_ALT_KI = 17, 18, 19, 20, 21, 22
P_DT, P_DERIV_TOL, P_ATT_TOL, P_WINDOW, P_BOUND = 23, 24, 25, 26, 27
P_OVERRIDE, P_TIN_CMD, P_TOUT_CMD, P_DRAG = 28, 29, 30, 31
N_PARAMS = 32

# Layout of the state vector ``x``.
X_CY, X_CZ, X_TH, X_VY, X_VZ, X_OM, X_ZATT, X_ZS, X_ANCHOR, X_CONTACT = range(10)
N_STATE = 10

# Trace columns written by ``integrate``.
TRACE_COLUMNS = ("t_s", "y_m", "z_m", "phi_deg", "f_n_N", "f_s_N", "T_in_N", "T_out_N", "saturated_flag")

STATUS_HORIZON, STATUS_CONVERGED, STATUS_BLOWUP = 0, 1, 2


# ---------------------------------------------------------------------------
# closed-form outer-pair thrust over a roll-angle scan
# ---------------------------------------------------------------------------

@kernel
def _outer_thrust_scan_loop(beta_rad, phi_rad, G_t, w_e, b1, b2, r_arm):
    n = phi_rad.shape[0]
    out = np.empty(n)
    sb = math.sin(beta_rad)
    for i in range(n):
        sp = math.sin(phi_rad[i])
        sa = math.sin(beta_rad - phi_rad[i])
        t_sum = G_t * sb / sa
        # f_e * l_e collapses to G_t * b1 * sin(phi)
        tau = G_t * b1 * sp - w_e * (b2 * sb + b1 * sp)
        out[i] = 0.25 * t_sum + tau / (4.0 * r_arm)
    return out


def _outer_thrust_scan_numpy(beta_rad, phi_rad, G_t, w_e, b1, b2, r_arm):
    sb = np.sin(beta_rad)
    sp = np.sin(phi_rad)
    t_sum = G_t * sb / np.sin(beta_rad - phi_rad)
    tau = G_t * b1 * sp - w_e * (b2 * sb + b1 * sp)
    return 0.25 * t_sum + tau / (4.0 * r_arm)


def outer_thrust_scan(beta_rad, phi_rad, G_t, w_e, b1, b2, r_arm):
    """Outer-pair per-rotor thrust at fixed ``beta_rad`` for each ``phi_rad``."""
    phi_rad = np.ascontiguousarray(phi_rad, dtype=np.float64)
    if USE_NUMBA:
        return _outer_thrust_scan_loop(float(beta_rad), phi_rad, G_t, w_e, b1, b2, r_arm)
    return _outer_thrust_scan_numpy(float(beta_rad), phi_rad, G_t, w_e, b1, b2, r_arm)


# ---------------------------------------------------------------------------
# planar rigid-body contact simulator
# ---------------------------------------------------------------------------

@kernel
def body_offsets(th, p):
    """Offsets from the system CoM to the vehicle CoM and to the EE tip."""
    alpha = p[P_ALPHA]
    m = p[P_MASS]
    ly = p[P_B1] * math.sin(th) + p[P_B2] * math.sin(th + alpha)
    lz = p[P_B1] * math.cos(th) + p[P_B2] * math.cos(th + alpha)
    kb = p[P_ME] / m
    ke = p[P_MB] / m
    return -kb * ly, -kb * lz, ke * ly, ke * lz


@kernel
def step_kernel(x, p, ny, nz, nt):
    """One semi-implicit Euler step.

    Returns ``(x_next, f_n, f_s, T_in, T_out, saturated, deriv_norm, penetration)``.
    ``f_s`` is the signed tangential force along the surface tangent
    ``(cos beta, -sin beta)``.
    """
    dt = p[P_DT]
    m = p[P_MASS]
    g = p[P_G]
    inertia = p[P_INERTIA]
    r_arm = p[P_RARM]
    t_max = p[P_TMAX]
    beta = p[P_BETA]

    th = x[X_TH]
    vy = x[X_VY]
    vz = x[X_VZ]
    om = x[X_OM]
    z_att = x[X_ZATT]
    z_s = x[X_ZS]
    anchor = x[X_ANCHOR]

    sth = math.sin(th)
    cth = math.cos(th)
    gby, gbz, py, pz = body_offsets(th, p)

    # tip kinematics in surface coordinates; the surface passes through the origin
    tip_y = x[X_CY] + py
    tip_z = x[X_CZ] + pz
    tip_vy = vy + om * pz
    tip_vz = vz - om * py
    n0y = math.sin(beta)
    n0z = math.cos(beta)
    t0y = math.cos(beta)
    t0z = -math.sin(beta)
    pen = tip_y * n0y + tip_z * n0z
    pen_rate = tip_vy * n0y + tip_vz * n0z
    s = tip_y * t0y + tip_z * t0z
    s_rate = tip_vy * t0y + tip_vz * t0z

    f_n = 0.0
    f_s = 0.0
    contact = 0.0
    if pen > 0.0:
        contact = 1.0
        if x[X_CONTACT] < 0.5:
            anchor = s
        f_n = p[P_KN] * pen + p[P_CN] * pen_rate
        if f_n < 0.0:
            f_n = 0.0
        f_s = -p[P_KT] * (s - anchor) - p[P_CT] * s_rate
        cap = p[P_MU] * f_n
        if abs(f_s) > cap:
            f_s = cap if f_s > 0.0 else -cap
            anchor = s + f_s / p[P_KT]
    else:
        pen = 0.0
        anchor = s

    # controllers
    saturated = 0.0
    e_att = p[P_PHIREF] - th
    e_s = s
    if p[P_OVERRIDE] > 0.5:
        t_in = p[P_TIN_CMD]
        t_out = p[P_TOUT_CMD]
    else:
        m_cmd = inertia * (p[P_ATT_KP] * e_att - p[P_ATT_KD] * om + p[P_ATT_KI] * z_att)
        den = math.sin(beta - th)
        if den < 0.05:
            den = 0.05
        t_cmd = m * (g * math.sin(beta) + p[P_ALT_KP] * e_s + p[P_ALT_KD] * s_rate + p[P_ALT_KI] * z_s) / den
        if t_cmd < 0.0:
            t_cmd = 0.0
        elif t_cmd > 4.0 * t_max:
            t_cmd = 4.0 * t_max
        # collective priority: the roll torque is clipped so both pairs stay in [0, t_max]
        quarter = 0.25 * t_cmd
        headroom = min(t_max - quarter, quarter)
        half_diff = m_cmd / (4.0 * r_arm)
        if half_diff > headroom:
            half_diff = headroom
            saturated = 1.0
        elif half_diff < -headroom:
            half_diff = -headroom
            saturated = 1.0
        t_out = quarter + half_diff
        t_in = quarter - half_diff
        if saturated < 0.5:
            z_att += e_att * dt
            z_s += e_s * dt

    # forces on the body
    thrust = 2.0 * (t_in + t_out)
    fcy = -f_n * n0y + f_s * t0y
    fcz = -f_n * n0z + f_s * t0z
    fy = thrust * sth + fcy + ny - p[P_DRAG] * vy
    fz = thrust * cth - m * g + fcz + nz - p[P_DRAG] * vz

    # moments about the system CoM, positive in the direction of increasing roll
    eyy = cth
    eyz = -sth
    in_y = gby + r_arm * eyy
    in_z = gbz + r_arm * eyz
    out_y = gby - r_arm * eyy
    out_z = gbz - r_arm * eyz
    m_in = 2.0 * t_in * (in_z * sth - in_y * cth)
    m_out = 2.0 * t_out * (out_z * sth - out_y * cth)
    m_c = pz * fcy - py * fcz
    moment = m_in + m_out + m_c + nt

    ay = fy / m
    az = fz / m
    aw = moment / inertia
    dnorm = math.sqrt(vy * vy + vz * vz + om * om + ay * ay + az * az + aw * aw)

    xn = np.empty(N_STATE)
    xn[X_VY] = vy + ay * dt
    xn[X_VZ] = vz + az * dt
    xn[X_OM] = om + aw * dt
    xn[X_CY] = x[X_CY] + xn[X_VY] * dt
    xn[X_CZ] = x[X_CZ] + xn[X_VZ] * dt
    xn[X_TH] = th + xn[X_OM] * dt
    xn[X_ZATT] = z_att
    xn[X_ZS] = z_s
    xn[X_ANCHOR] = anchor
    xn[X_CONTACT] = contact
    return xn, f_n, f_s, t_in, t_out, saturated, dnorm, pen


@kernel
def integrate(x0, p, noise, n_steps, trace):
    """Run up to ``n_steps`` steps, filling ``trace`` row by row.

    Stops early once the convergence test has held for ``p[P_WINDOW]``
    consecutive steps.  Returns ``(x, steps_done, status, saturation_steps)``.
    """
    x = x0.copy()
    window = int(p[P_WINDOW])
    bound = p[P_BOUND]
    quiet = 0
    sat_count = 0
    status = STATUS_HORIZON
    done = 0
    for k in range(n_steps):
        xn, f_n, f_s, t_in, t_out, sat, dnorm, pen = step_kernel(
            x, p, noise[k, 0], noise[k, 1], noise[k, 2]
        )
        gby, gbz, _, _ = body_offsets(x[X_TH], p)
        trace[k, 0] = k * p[P_DT]
        trace[k, 1] = x[X_CY] + gby
        trace[k, 2] = x[X_CZ] + gbz
        trace[k, 3] = math.degrees(x[X_TH])
        trace[k, 4] = f_n
        trace[k, 5] = abs(f_s)
        trace[k, 6] = t_in
        trace[k, 7] = t_out
        trace[k, 8] = sat
        done = k + 1
        if sat > 0.5:
            sat_count += 1
        finite = True
        for j in range(N_STATE):
            if not math.isfinite(xn[j]) or abs(xn[j]) > bound:
                finite = False
        if not finite:
            status = STATUS_BLOWUP
            break
        x = xn
        if dnorm < p[P_DERIV_TOL] and abs(p[P_PHIREF] - x[X_TH]) < p[P_ATT_TOL] and sat < 0.5:
            quiet += 1
        else:
            quiet = 0
        if window > 0 and quiet >= window:
            status = STATUS_CONVERGED
            break
    return x, done, status, sat_count
