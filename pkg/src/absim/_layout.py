"""Index layout of the flat ship-parameter vector shared by both kernel backends.

The compiled kernel hard-codes the same order in a ``cdef enum``; the test
suite asserts the two agree.
"""

PARAM_NAMES = (
    # rigid body / environment
    "m", "m_x", "m_y", "I_z", "J_z", "x_G", "L", "T_d", "rho", "R0_prime",
    # hull derivatives
    "X_bb", "X_br", "X_rr", "X_bbbb",
    "Y_b", "Y_r", "Y_bbb", "Y_bbr", "Y_brr", "Y_rrr",
    "N_b", "N_r", "N_bbb", "N_bbr", "N_brr", "N_rrr",
    # propeller
    "D_P", "t_ded", "w_P", "k0", "k1", "k2",
    # rudder
    "A_R", "Lambda", "x_R", "x_H", "t_R", "a_H", "gamma_R", "l_R_prime", "eps_ratio", "kappa",
    # uniform current
    "c_x", "c_y",
)

NPARAM = len(PARAM_NAMES)
INDEX = {name: i for i, name in enumerate(PARAM_NAMES)}

# SBMPC scalar parameter block
SBMPC_NAMES = (
    "dt", "T_chi", "T_U", "q_col", "d_safe", "d_close", "kappa_colregs",
    "k_chi_p", "k_chi_s", "k_du", "k_dchi", "u_ref", "prev_chi_m",
)

# encounter codes passed to the SBMPC grid kernel
ENC_NONE = 0
ENC_HEAD_ON = 1
ENC_CROSSING_GIVE_WAY = 2
ENC_OVERTAKING = 3
ENC_CROSSING_STAND_ON = 4

U_EPS = 1e-6
N_EPS = 1e-9
J_EPS = 1e-6
D_FLOOR = 1e-3


def pack(*sources, current=(0.0, 0.0)):
    """Build the flat parameter vector from objects exposing the named fields.

    Propeller ``kt_coeffs`` expands to ``k0, k1, k2``. Missing fields stay 0.
    """
    import numpy as np

    vec = np.zeros(NPARAM)
    for src in sources:
        if src is None:
            continue
        for name in PARAM_NAMES:
            if hasattr(src, name):
                vec[INDEX[name]] = float(getattr(src, name))
        if hasattr(src, "kt_coeffs"):
            k = tuple(src.kt_coeffs) + (0.0, 0.0, 0.0)
            vec[INDEX["k0"]], vec[INDEX["k1"]], vec[INDEX["k2"]] = k[0], k[1], k[2]
    vec[INDEX["c_x"]] = float(current[0])
    vec[INDEX["c_y"]] = float(current[1])
    return vec
