"""Pure-Python kernel. Mirrors ``_kernels.pyx`` operation for operation.

All functions take the flat parameter vector described in ``_layout`` and
plain floats, and return tuples of floats.
"""
import math

from absim._layout import D_FLOOR, ENC_CROSSING_GIVE_WAY, ENC_HEAD_ON, J_EPS, N_EPS, U_EPS

BACKEND = "python"

TWO_PI = 2.0 * math.pi


def wrap(a):
    w = math.fmod(a + math.pi, TWO_PI)
    if w <= 0.0:
        w += TWO_PI
    return w - math.pi


def hull_forces(u, v, r, P):
    U = math.sqrt(u * u + v * v)
    if U < U_EPS:
        return 0.0, 0.0, 0.0
    L = P[6]
    b = math.atan2(-v, u)
    rp = r * L / U
    cb = math.cos(b)
    b2 = b * b
    rp2 = rp * rp
    Xp = (-P[9] * cb * cb + P[10] * b2 + P[11] * b * rp + P[12] * rp2
          + P[13] * b2 * b2)
    Yp = (P[14] * b + P[15] * rp + P[16] * b2 * b + P[17] * b2 * rp
          + P[18] * b * rp2 + P[19] * rp2 * rp)
    Np = (P[20] * b + P[21] * rp + P[22] * b2 * b + P[23] * b2 * rp
          + P[24] * b * rp2 + P[25] * rp2 * rp)
    q = 0.5 * P[8] * L * P[7] * U * U
    return q * Xp, q * Yp, q * L * Np


def propeller_thrust(u, n, P):
    if abs(n) < N_EPS:
        return 0.0
    D = P[26]
    J = u * (1.0 - P[28]) / (n * D)
    KT = P[29] + P[30] * J + P[31] * J * J
    return (1.0 - P[27]) * P[8] * n * n * (D * D * D * D) * KT


def rudder_inflow(u, v, r, delta, n, P):
    D = P[26]
    eps = P[40]
    kappa = P[41]
    uP = u * (1.0 - P[28])
    if abs(n) < N_EPS:
        uR = eps * uP
    else:
        J = uP / (n * D)
        if abs(J) < J_EPS:
            k0 = P[29]
            uR = eps * kappa * abs(n) * D * math.sqrt(8.0 * k0 / math.pi) if k0 > 0.0 else eps * uP
        else:
            KT = P[29] + P[30] * J + P[31] * J * J
            if KT > 0.0:
                uR = eps * uP * (1.0 + kappa * (math.sqrt(1.0 + 8.0 * KT / (math.pi * J * J)) - 1.0))
            else:
                uR = eps * uP
    vR = P[38] * (v + P[39] * P[6] * r)
    UR = math.sqrt(uR * uR + vR * vR)
    return UR, delta - math.atan2(vR, uR)


def rudder_forces(u, v, r, delta, n, P):
    UR, aR = rudder_inflow(u, v, r, delta, n, P)
    lam = P[33]
    FN2 = 2.0 * 0.5 * P[8] * P[32] * UR * UR * (6.13 * lam / (lam + 2.25)) * math.sin(aR)
    cd = math.cos(delta)
    aH = P[37]
    return (-(1.0 - P[36]) * FN2 * math.sin(delta),
            -(1.0 + aH) * FN2 * cd,
            -(P[34] + aH * P[35]) * FN2 * cd)


def accelerations(X, Y, N, u, v, r, P):
    m = P[0]
    mx = P[1]
    my = P[2]
    xG = P[5]
    du = (X + (m + my) * v * r + xG * m * r * r) / (m + mx)
    a11 = m + my
    a12 = xG * m
    a22 = P[3] + xG * xG * m + P[4]
    b1 = Y + (m + mx) * u * r
    b2 = N - xG * m * u * r
    det = a11 * a22 - a12 * a12
    return du, (b1 * a22 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det


def derivative(x, y, psi, u, v, r, delta, n, P):
    XH, YH, NH = hull_forces(u, v, r, P)
    XP = propeller_thrust(u, n, P)
    XR, YR, NR = rudder_forces(u, v, r, delta, n, P)
    du, dv, dr = accelerations(XH + XP + XR, YH + YR, NH + NR, u, v, r, P)
    c = math.cos(psi)
    s = math.sin(psi)
    return (u * c - v * s + P[42], u * s + v * c + P[43], r, du, dv, dr)


def rk4_step(state, delta, n, dt, P):
    P = tuple(float(p) for p in P)
    x, y, psi, u, v, r = (float(s) for s in state)
    h = 0.5 * dt
    k1 = derivative(x, y, psi, u, v, r, delta, n, P)
    k2 = derivative(x + h * k1[0], y + h * k1[1], psi + h * k1[2],
                    u + h * k1[3], v + h * k1[4], r + h * k1[5], delta, n, P)
    k3 = derivative(x + h * k2[0], y + h * k2[1], psi + h * k2[2],
                    u + h * k2[3], v + h * k2[4], r + h * k2[5], delta, n, P)
    k4 = derivative(x + dt * k3[0], y + dt * k3[1], psi + dt * k3[2],
                    u + dt * k3[3], v + dt * k3[4], r + dt * k3[5], delta, n, P)
    w = dt / 6.0
    return (x + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            wrap(psi + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])),
            u + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
            v + w * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]),
            r + w * (k1[5] + 2.0 * k2[5] + 2.0 * k3[5] + k4[5]))


def rollout(state, delta, n, dt, nsteps, P):
    """Fixed-command RK4 rollout; returns the list of states after each step."""
    out = []
    s = tuple(float(v) for v in state)
    for _ in range(nsteps):
        s = rk4_step(s, delta, n, dt, P)
        out.append(s)
    return out


def sbmpc_grid_costs(x0, y0, chi0, U0, chi_d, U_d, offsets, mults, obs, codes, nsamp, prm):
    """Score every (offset, multiplier) pair, offsets outer.

    ``obs`` is a flat sequence of obstacle samples laid out as
    ``[i][k][x, y, vx, vy]`` with ``nsamp`` samples per obstacle.
    """
    dt, T_chi, T_U, q_col, d_safe, d_close, kap, k_p, k_s, k_du, k_dchi, u_ref, prev = prm
    nobs = len(codes)
    d_close2 = d_close * d_close
    costs = []
    for off in offsets:
        chi_c = chi_d + off
        for mult in mults:
            U_c = U_d * mult
            worst = 0.0
            if nobs:
                risk = [0.0] * nobs
                x, y, chi, U = x0, y0, chi0, U0
                for k in range(nsamp):
                    c = math.cos(chi)
                    s = math.sin(chi)
                    vx = U * c
                    vy = U * s
                    for i in range(nobs):
                        j = 4 * (i * nsamp + k)
                        dx = x - obs[j]
                        dy = y - obs[j + 1]
                        d2 = dx * dx + dy * dy
                        if d2 < d_close2:
                            d = max(math.sqrt(d2), D_FLOOR)
                            rvx = vx - obs[j + 2]
                            rvy = vy - obs[j + 3]
                            cr = (1.0 + math.sqrt(rvx * rvx + rvy * rvy) / u_ref) * q_col * ((d_safe / d) * (d_safe / d))
                            if cr > risk[i]:
                                risk[i] = cr
                    dchi = wrap(chi_c - chi) / T_chi
                    dU = (U_c - U) / T_U
                    x += dt * vx
                    y += dt * vy
                    chi += dt * dchi
                    U += dt * dU
                for i in range(nobs):
                    tot = risk[i]
                    if off > 0.0 and (codes[i] == ENC_HEAD_ON or codes[i] == ENC_CROSSING_GIVE_WAY):
                        tot += kap
                    if tot > worst:
                        worst = tot
            k_chi = k_p if off > 0.0 else k_s
            costs.append(worst + k_chi * off * off + k_du * (1.0 - mult) + k_dchi * abs(off - prev))
    return costs


def nomoto_cost_grad(r0, psi0, r_d, psi_d, deltas, T_s, K, T, q_r, q_psi, p, r_max, w_pen, want_grad=True):
    deltas = [float(d) for d in deltas]
    N = len(deltas)
    rs = [r0]
    ps = [psi0]
    a = T_s / T
    for k in range(N):
        rs.append(rs[k] + a * (K * deltas[k] - rs[k]))
        ps.append(ps[k] + T_s * rs[k])
    J = 0.0
    gr = [0.0] * (N + 1)
    gp = [0.0] * (N + 1)
    for i in range(1, N + 1):
        er = rs[i] - r_d
        ep = wrap(ps[i] - psi_d)
        exc = abs(rs[i]) - r_max
        J += q_r * er * er + q_psi * ep * ep + p * deltas[i - 1] * deltas[i - 1]
        g = 2.0 * q_r * er
        if exc > 0.0:
            J += w_pen * exc * exc
            g += 2.0 * w_pen * exc * (1.0 if rs[i] > 0.0 else -1.0)
        gr[i] = g
        gp[i] = 2.0 * q_psi * ep
    if not want_grad:
        return J, None
    grad = [0.0] * N
    lr = gr[N]
    lp = gp[N]
    for k in range(N - 1, -1, -1):
        grad[k] = 2.0 * p * deltas[k] + lr * a * K
        lr, lp = gr[k] + lr * (1.0 - a) + lp * T_s, gp[k] + lp
    return J, grad
