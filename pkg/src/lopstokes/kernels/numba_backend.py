"""numba-compiled per-point symbol kernels (default backend).

Same signatures and, operation for operation, the same arithmetic as
numpy_backend, so the two agree to rounding.  fastmath stays off: it would
reassociate the complex arithmetic and break cross-backend agreement and
byte-stable reports.  Loops are elementwise writes, so results do not depend
on the thread count.
"""

import numpy as np

try:
    import numba as nb

    prange = nb.prange
    AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only where numba is absent
    nb = None
    prange = range
    AVAILABLE = False

NAME = "numba"

_kw = {"cache": True, "fastmath": False, "nogil": True}


def _jit(fn, parallel=False):
    if not AVAILABLE:
        return fn
    return nb.njit(parallel=parallel, **_kw)(fn)


def _roots_one(lam, a2, rho_p, rho_m, mu_p, mu_m, nu_p):
    ap = np.sqrt(rho_p / (mu_p + nu_p) * lam + a2)
    bp = np.sqrt(rho_p / mu_p * lam + a2)
    bm = np.sqrt(rho_m / mu_m * lam + a2)
    return ap, bp, bm


_roots_one = _jit(_roots_one)


def _lmatrix_one(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p):
    a2 = a * a
    ap, bp, bm = _roots_one(lam, a2, rho_p, rho_m, mu_p, mu_m, nu_p)

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


_lmatrix_one = _jit(_lmatrix_one)


def _ksym_one(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m):
    (l11p, l12p, l21p, l22p, l11m, l12m, l21m, l22m, det_l, _) = _lmatrix_one(
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


_ksym_one = _jit(_ksym_one)


def roots_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p):
    n = lam.shape[0]
    ap = np.empty(n, np.complex128)
    bp = np.empty(n, np.complex128)
    bm = np.empty(n, np.complex128)
    for i in prange(n):
        r0, r1, r2 = _roots_one(lam[i], a[i] * a[i], rho_p, rho_m, mu_p, mu_m, nu_p)
        ap[i] = r0
        bp[i] = r1
        bm[i] = r2
    return ap, bp, bm


def lmatrix_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p):
    n = lam.shape[0]
    l11p = np.empty(n, np.complex128)
    l12p = np.empty(n, np.complex128)
    l21p = np.empty(n, np.complex128)
    l22p = np.empty(n, np.complex128)
    l11m = np.empty(n, np.complex128)
    l12m = np.empty(n, np.complex128)
    l21m = np.empty(n, np.complex128)
    l22m = np.empty(n, np.complex128)
    det_l = np.empty(n, np.complex128)
    p_stab = np.empty(n, np.complex128)
    for i in prange(n):
        v0, v1, v2, v3, v4, v5, v6, v7, v8, v9 = _lmatrix_one(
            lam[i], a[i], rho_p, rho_m, mu_p, mu_m, nu_p
        )
        l11p[i] = v0
        l12p[i] = v1
        l21p[i] = v2
        l22p[i] = v3
        l11m[i] = v4
        l12m[i] = v5
        l21m[i] = v6
        l22m[i] = v7
        det_l[i] = v8
        p_stab[i] = v9
    return l11p, l12p, l21p, l22p, l11m, l12m, l21m, l22m, det_l, p_stab


def detscan_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p):
    n = lam.shape[0]
    absdet = np.empty(n, np.float64)
    ratio = np.empty(n, np.float64)
    for i in prange(n):
        vals = _lmatrix_one(lam[i], a[i], rho_p, rho_m, mu_p, mu_m, nu_p)
        d = abs(vals[8])
        absdet[i] = d
        norm = np.sqrt(abs(lam[i])) + a[i]
        ratio[i] = d / norm**4
    return absdet, ratio


def ksym_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m):
    n = lam.shape[0]
    k = np.empty(n, np.complex128)
    for i in prange(n):
        k[i] = _ksym_one(lam[i], a[i], rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m)
    return k


def heightscan_batch(lam, a, rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m):
    n = lam.shape[0]
    k = np.empty(n, np.complex128)
    ratio = np.empty(n, np.float64)
    for i in prange(n):
        kk = _ksym_one(lam[i], a[i], rho_p, rho_m, mu_p, mu_m, nu_p, sig_p, sig_m)
        k[i] = kk
        ratio[i] = abs(lam[i] + kk) / (abs(lam[i]) + a[i])
    return k, ratio


roots_batch = _jit(roots_batch, parallel=True)
lmatrix_batch = _jit(lmatrix_batch, parallel=True)
detscan_batch = _jit(detscan_batch, parallel=True)
ksym_batch = _jit(ksym_batch, parallel=True)
heightscan_batch = _jit(heightscan_batch, parallel=True)


def set_threads(n: int) -> None:
    """Cap the kernel thread pool; no-op when numba is unavailable."""
    if AVAILABLE and n > 0:
        nb.set_num_threads(min(n, nb.config.NUMBA_NUM_THREADS))
