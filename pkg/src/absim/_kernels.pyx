# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel. Operation-for-operation twin of ``_kernels_py``."""
from libc.math cimport atan2, cos, fabs, fmod, sin, sqrt, M_PI

BACKEND = "cython"

# must match absim._layout.PARAM_NAMES
PARAM_NAMES = (
    "m", "m_x", "m_y", "I_z", "J_z", "x_G", "L", "T_d", "rho", "R0_prime",
    "X_bb", "X_br", "X_rr", "X_bbbb",
    "Y_b", "Y_r", "Y_bbb", "Y_bbr", "Y_brr", "Y_rrr",
    "N_b", "N_r", "N_bbb", "N_bbr", "N_brr", "N_rrr",
    "D_P", "t_ded", "w_P", "k0", "k1", "k2",
    "A_R", "Lambda", "x_R", "x_H", "t_R", "a_H", "gamma_R", "l_R_prime", "eps_ratio", "kappa",
    "c_x", "c_y",
)

cdef enum:
    I_M = 0
    I_MX = 1
    I_MY = 2
    I_IZ = 3
    I_JZ = 4
    I_XG = 5
    I_L = 6
    I_TD = 7
    I_RHO = 8
    I_R0 = 9
    I_XBB = 10
    I_XBR = 11
    I_XRR = 12
    I_XBBBB = 13
    I_YB = 14
    I_YR = 15
    I_YBBB = 16
    I_YBBR = 17
    I_YBRR = 18
    I_YRRR = 19
    I_NB = 20
    I_NR = 21
    I_NBBB = 22
    I_NBBR = 23
    I_NBRR = 24
    I_NRRR = 25
    I_DP = 26
    I_TDED = 27
    I_WP = 28
    I_K0 = 29
    I_K1 = 30
    I_K2 = 31
    I_AR = 32
    I_LAM = 33
    I_XR = 34
    I_XH = 35
    I_TR = 36
    I_AH = 37
    I_GR = 38
    I_LR = 39
    I_EPS = 40
    I_KAP = 41
    I_CX = 42
    I_CY = 43
    NPARAM = 44

cdef double U_EPS = 1e-6
cdef double N_EPS = 1e-9
cdef double J_EPS = 1e-6
cdef double D_FLOOR = 1e-3
cdef double TWO_PI = 2.0 * M_PI
cdef long long ENC_HEAD_ON = 1
cdef long long ENC_CROSSING_GIVE_WAY = 2


cdef inline double _wrap(double a) nogil:
    cdef double w = fmod(a + M_PI, TWO_PI)
    if w <= 0.0:
        w += TWO_PI
    return w - M_PI


cdef inline void _hull(double u, double v, double r, const double* P,
                       double* X, double* Y, double* N) nogil:
    cdef double U = sqrt(u * u + v * v)
    cdef double L, b, rp, cb, b2, rp2, q
    if U < U_EPS:
        X[0] = 0.0
        Y[0] = 0.0
        N[0] = 0.0
        return
    L = P[I_L]
    b = atan2(-v, u)
    rp = r * L / U
    cb = cos(b)
    b2 = b * b
    rp2 = rp * rp
    q = 0.5 * P[I_RHO] * L * P[I_TD] * U * U
    X[0] = q * (-P[I_R0] * cb * cb + P[I_XBB] * b2 + P[I_XBR] * b * rp + P[I_XRR] * rp2
                + P[I_XBBBB] * b2 * b2)
    Y[0] = q * (P[I_YB] * b + P[I_YR] * rp + P[I_YBBB] * b2 * b + P[I_YBBR] * b2 * rp
                + P[I_YBRR] * b * rp2 + P[I_YRRR] * rp2 * rp)
    N[0] = q * L * (P[I_NB] * b + P[I_NR] * rp + P[I_NBBB] * b2 * b + P[I_NBBR] * b2 * rp
                    + P[I_NBRR] * b * rp2 + P[I_NRRR] * rp2 * rp)


cdef inline double _thrust(double u, double n, const double* P) nogil:
    cdef double D, J, KT
    if fabs(n) < N_EPS:
        return 0.0
    D = P[I_DP]
    J = u * (1.0 - P[I_WP]) / (n * D)
    KT = P[I_K0] + P[I_K1] * J + P[I_K2] * J * J
    return (1.0 - P[I_TDED]) * P[I_RHO] * n * n * (D * D * D * D) * KT


cdef inline void _inflow(double u, double v, double r, double delta, double n, const double* P,
                         double* UR, double* aR) nogil:
    cdef double D = P[I_DP]
    cdef double eps = P[I_EPS]
    cdef double kappa = P[I_KAP]
    cdef double uP = u * (1.0 - P[I_WP])
    cdef double uR, vR, J, KT, k0
    if fabs(n) < N_EPS:
        uR = eps * uP
    else:
        J = uP / (n * D)
        if fabs(J) < J_EPS:
            k0 = P[I_K0]
            if k0 > 0.0:
                uR = eps * kappa * fabs(n) * D * sqrt(8.0 * k0 / M_PI)
            else:
                uR = eps * uP
        else:
            KT = P[I_K0] + P[I_K1] * J + P[I_K2] * J * J
            if KT > 0.0:
                uR = eps * uP * (1.0 + kappa * (sqrt(1.0 + 8.0 * KT / (M_PI * J * J)) - 1.0))
            else:
                uR = eps * uP
    vR = P[I_GR] * (v + P[I_LR] * P[I_L] * r)
    UR[0] = sqrt(uR * uR + vR * vR)
    aR[0] = delta - atan2(vR, uR)


cdef inline void _rudder(double u, double v, double r, double delta, double n, const double* P,
                         double* X, double* Y, double* N) nogil:
    cdef double UR, aR, lam, FN2, cd, aH
    _inflow(u, v, r, delta, n, P, &UR, &aR)
    lam = P[I_LAM]
    FN2 = 2.0 * 0.5 * P[I_RHO] * P[I_AR] * UR * UR * (6.13 * lam / (lam + 2.25)) * sin(aR)
    cd = cos(delta)
    aH = P[I_AH]
    X[0] = -(1.0 - P[I_TR]) * FN2 * sin(delta)
    Y[0] = -(1.0 + aH) * FN2 * cd
    N[0] = -(P[I_XR] + aH * P[I_XH]) * FN2 * cd


cdef inline void _accel(double X, double Y, double N, double u, double v, double r, const double* P,
                        double* du, double* dv, double* dr) nogil:
    cdef double m = P[I_M]
    cdef double mx = P[I_MX]
    cdef double my = P[I_MY]
    cdef double xG = P[I_XG]
    cdef double a11 = m + my
    cdef double a12 = xG * m
    cdef double a22 = P[I_IZ] + xG * xG * m + P[I_JZ]
    cdef double b1 = Y + (m + mx) * u * r
    cdef double b2 = N - xG * m * u * r
    cdef double det = a11 * a22 - a12 * a12
    du[0] = (X + (m + my) * v * r + xG * m * r * r) / (m + mx)
    dv[0] = (b1 * a22 - a12 * b2) / det
    dr[0] = (a11 * b2 - a12 * b1) / det


cdef inline void _deriv(const double* s, double delta, double n, const double* P, double* out) nogil:
    cdef double XH, YH, NH, XR, YR, NR, XP, c, sn
    cdef double u = s[3]
    cdef double v = s[4]
    cdef double r = s[5]
    _hull(u, v, r, P, &XH, &YH, &NH)
    XP = _thrust(u, n, P)
    _rudder(u, v, r, delta, n, P, &XR, &YR, &NR)
    _accel(XH + XP + XR, YH + YR, NH + NR, u, v, r, P, &out[3], &out[4], &out[5])
    c = cos(s[2])
    sn = sin(s[2])
    out[0] = u * c - v * sn + P[I_CX]
    out[1] = u * sn + v * c + P[I_CY]
    out[2] = r


cdef inline void _rk4(double* s, double delta, double n, double dt, const double* P) nogil:
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double tmp[6]
    cdef double h = 0.5 * dt
    cdef double w = dt / 6.0
    cdef int i
    _deriv(s, delta, n, P, k1)
    for i in range(6):
        tmp[i] = s[i] + h * k1[i]
    _deriv(tmp, delta, n, P, k2)
    for i in range(6):
        tmp[i] = s[i] + h * k2[i]
    _deriv(tmp, delta, n, P, k3)
    for i in range(6):
        tmp[i] = s[i] + dt * k3[i]
    _deriv(tmp, delta, n, P, k4)
    for i in range(6):
        s[i] = s[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    s[2] = _wrap(s[2])


def wrap(double a):
    return _wrap(a)


def hull_forces(double u, double v, double r, const double[::1] P):
    cdef double X, Y, N
    _hull(u, v, r, &P[0], &X, &Y, &N)
    return X, Y, N


def propeller_thrust(double u, double n, const double[::1] P):
    return _thrust(u, n, &P[0])


def rudder_inflow(double u, double v, double r, double delta, double n, const double[::1] P):
    cdef double UR, aR
    _inflow(u, v, r, delta, n, &P[0], &UR, &aR)
    return UR, aR


def rudder_forces(double u, double v, double r, double delta, double n, const double[::1] P):
    cdef double X, Y, N
    _rudder(u, v, r, delta, n, &P[0], &X, &Y, &N)
    return X, Y, N


def accelerations(double X, double Y, double N, double u, double v, double r, const double[::1] P):
    cdef double du, dv, dr
    _accel(X, Y, N, u, v, r, &P[0], &du, &dv, &dr)
    return du, dv, dr


def derivative(double x, double y, double psi, double u, double v, double r,
               double delta, double n, const double[::1] P):
    cdef double s[6]
    cdef double out[6]
    s[0] = x; s[1] = y; s[2] = psi; s[3] = u; s[4] = v; s[5] = r
    _deriv(s, delta, n, &P[0], out)
    return out[0], out[1], out[2], out[3], out[4], out[5]


def rk4_step(state, double delta, double n, double dt, const double[::1] P):
    cdef double s[6]
    cdef int i
    for i in range(6):
        s[i] = state[i]
    _rk4(s, delta, n, dt, &P[0])
    return s[0], s[1], s[2], s[3], s[4], s[5]


def rollout(state, double delta, double n, double dt, int nsteps, const double[::1] P):
    """Fixed-command RK4 rollout; returns the list of states after each step."""
    cdef double s[6]
    cdef int i, k
    out = []
    for i in range(6):
        s[i] = state[i]
    for k in range(nsteps):
        _rk4(s, delta, n, dt, &P[0])
        out.append((s[0], s[1], s[2], s[3], s[4], s[5]))
    return out


def sbmpc_grid_costs(double x0, double y0, double chi0, double U0, double chi_d, double U_d,
                     const double[::1] offsets, const double[::1] mults, const double[::1] obs,
                     const long long[::1] codes, int nsamp, const double[::1] prm):
    """Score every (offset, multiplier) pair, offsets outer."""
    cdef double dt = prm[0], T_chi = prm[1], T_U = prm[2], q_col = prm[3], d_safe = prm[4]
    cdef double d_close = prm[5], kap = prm[6], k_p = prm[7], k_s = prm[8], k_du = prm[9]
    cdef double k_dchi = prm[10], u_ref = prm[11], prev = prm[12]
    cdef Py_ssize_t nobs = codes.shape[0]
    cdef Py_ssize_t noff = offsets.shape[0], nmul = mults.shape[0]
    cdef Py_ssize_t a, b, i, k, j
    cdef double off, mult, chi_c, U_c, worst, x, y, chi, U, c, s, vx, vy
    cdef double dx, dy, d2, d, rvx, rvy, cr, tot, dchi, dU, k_chi
    cdef double d_close2 = d_close * d_close
    cdef double[::1] risk
    import numpy as np
    risk = np.zeros(max(nobs, 1))
    costs = []
    for a in range(noff):
        off = offsets[a]
        chi_c = chi_d + off
        for b in range(nmul):
            mult = mults[b]
            U_c = U_d * mult
            worst = 0.0
            if nobs:
                for i in range(nobs):
                    risk[i] = 0.0
                x = x0; y = y0; chi = chi0; U = U0
                for k in range(nsamp):
                    c = cos(chi)
                    s = sin(chi)
                    vx = U * c
                    vy = U * s
                    for i in range(nobs):
                        j = 4 * (i * nsamp + k)
                        dx = x - obs[j]
                        dy = y - obs[j + 1]
                        d2 = dx * dx + dy * dy
                        if d2 < d_close2:
                            d = sqrt(d2)
                            if d < D_FLOOR:
                                d = D_FLOOR
                            rvx = vx - obs[j + 2]
                            rvy = vy - obs[j + 3]
                            cr = (1.0 + sqrt(rvx * rvx + rvy * rvy) / u_ref) * q_col * ((d_safe / d) * (d_safe / d))
                            if cr > risk[i]:
                                risk[i] = cr
                    dchi = _wrap(chi_c - chi) / T_chi
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
            costs.append(worst + k_chi * off * off + k_du * (1.0 - mult) + k_dchi * fabs(off - prev))
    return costs


def nomoto_cost_grad(double r0, double psi0, double r_d, double psi_d, deltas,
                     double T_s, double K, double T, double q_r, double q_psi, double p,
                     double r_max, double w_pen, bint want_grad=True):
    cdef Py_ssize_t N = len(deltas)
    cdef Py_ssize_t i, k
    cdef double a = T_s / T
    cdef double J = 0.0, er, ep, exc, g, lr, lp, lr_new
    cdef double[::1] d, rs, ps, gr, gp
    import numpy as np
    d = np.asarray(deltas, dtype=np.float64).copy()
    rs = np.empty(N + 1)
    ps = np.empty(N + 1)
    gr = np.zeros(N + 1)
    gp = np.zeros(N + 1)
    rs[0] = r0
    ps[0] = psi0
    for k in range(N):
        rs[k + 1] = rs[k] + a * (K * d[k] - rs[k])
        ps[k + 1] = ps[k] + T_s * rs[k]
    for i in range(1, N + 1):
        er = rs[i] - r_d
        ep = _wrap(ps[i] - psi_d)
        exc = fabs(rs[i]) - r_max
        J += q_r * er * er + q_psi * ep * ep + p * d[i - 1] * d[i - 1]
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
        grad[k] = 2.0 * p * d[k] + lr * a * K
        lr_new = gr[k] + lr * (1.0 - a) + lp * T_s
        lp = gp[k] + lp
        lr = lr_new
    return J, grad
