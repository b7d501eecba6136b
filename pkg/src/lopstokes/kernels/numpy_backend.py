"""Pure-numpy implementations of the per-point symbol kernels.

This is the fallback backend (LOPSTOKES_BACKEND=numpy, or numba missing).
All functions take flat arrays: lam complex128[n], a float64[n] (tangential
frequency magnitudes), plus scalar fluid constants, and return complex128
arrays.  The numba backend mirrors these signatures exactly; keep the two in
sync operation-for-operation so results agree to rounding.
"""

import numpy as np

NAME = "numpy"


def roots_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p):
    """Decay roots (a_plus, b_plus, b_minus), principal square root.

    a_plus^2 = rho_+ lam/(mu_+ + nu_+) + A^2, b_pm^2 = rho_pm lam/mu_pm + A^2.
    Arguments never touch the negative real axis for lam in the sector, so the
    principal branch has strictly positive real part.
    """
    a2 = a * a
    ap = np.sqrt(rho_p / (mu_p + nu_p) * lam + a2)
    bp = np.sqrt(rho_p / mu_p * lam + a2)
    bm = np.sqrt(rho_m / mu_m * lam + a2)
    return ap, bp, bm


def lmatrix_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p):
    """Boundary-matrix entries in cancellation-safe form, plus det and P.

    Returns (l11p, l12p, l21p, l22p, l11m, l12m, l21m, l22m, det_l, p_stab).
    The +-side entries use the stabilized forms built around
    P = (a_plus b_plus + A^2)/(rho_+ lam/(2mu_+ + nu_+) + A^2); the --side
    difference b_minus - A is evaluated as rho_- lam/(mu_-(b_minus + A)).
    det_l is assembled from the two 2x2 blocks, never by naive expansion.
    """
    a2 = a * a
    ap, bp, bm = roots_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p)

    den = rho_p / (2.0 * mu_p + nu_p) * lam + a2
    p_stab = (ap * bp + a2) / den
    c_pn = (mu_p + nu_p) / (2.0 * mu_p + nu_p)

    l11p = mu_p * c_pn * ap * p_stab
    l12p = mu_p * a2 * (2.0 - c_pn * p_stab)
    l21p = (
        2.0 * mu_p * nu_p / (2.0 * mu_p + nu_p) * ap / (bp + ap)
        - mu_p * (nu_p - mu_p) / (2.0 * mu_p + nu_p)
    ) * p_stab
    l22p = mu_p * c_pn * bp * p_stab

    bm_minus_a = rho_m * lam / (mu_m * (bm + a))
    l11m = mu_m * (a + bm)
    l12m = mu_m * a * bm_minus_a
    l21m = mu_m * bm_minus_a
    l22m = mu_m * (a + bm) * bm

    det_p = l11p * l22p - l12p * l21p
    det_m = l11m * l22m - l12m * l21m
    det_l = l22m * det_p + l22p * det_m
    return l11p, l12p, l21p, l22p, l11m, l12m, l21m, l22m, det_l, p_stab


def detscan_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p):
    """(|det L|, |det L|/(|lam|^{1/2}+A)^4) for lower-bound scans."""
    out = lmatrix_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p)
    det_l = out[8]
    absdet = np.abs(det_l)
    norm = np.sqrt(np.abs(lam)) + a
    return absdet, absdet / norm**4


def ksym_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m):
    """Height symbol K(lam, A).

    K multiplies H in the reduced height equation (lam + K) H = d; it is
    assembled from the normal-velocity traces of the surface-tension-driven
    solution.  sig_p/sig_m are the density-weighted tension coefficients.
    """
    (l11p, l12p, l21p, l22p, l11m, l12m, l21m, l22m, det_l, _) = lmatrix_batch(
        lam, a, rho_p, rho_m, mu_p, mu_m, nu_p
    )
    c22 = l21p * l12m
    c23 = l12m * l21m - (l11p + l11m) * l22m
    c32 = (l11p + l11m) * l22p - l12p * l21p
    c33 = -l12p * l21m
    drho = rho_m - rho_p
    a2 = a * a
    k = (a2 * a / det_l) * (rho_m * sig_m * c32 - rho_p * sig_m * c22) / drho
    k += (a2 / det_l) * (rho_m * sig_p * c33 - rho_p * sig_p * c23) / drho
    return k


def heightscan_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m):
    """(K, |lam + K|/(|lam| + A)) for height-bound scans."""
    k = ksym_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m)
    ratio = np.abs(lam + k) / (np.abs(lam) + a)
    return k, ratio
