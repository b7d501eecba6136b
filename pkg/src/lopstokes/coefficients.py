"""Closed-form solution coefficients and the height (kinematic) symbol.

The interface solve produces the triple (i xi'.beta'_-, beta_+N, beta_-N);
everything else is explicit: the scaled Stokes-kernel amplitudes
g_{pm J} = (B_pm - A_pm) alpha_{pm J}, the tangential boundary amplitudes
beta_{pm j}, the pressure amplitude gamma_-, and the data-to-coefficient
symbols P, R, S, T, p^- that express all of them as weights against
h_hat(0) and H_hat(0).  The height symbol

    K = [sigma_- A^3 (rho_- Lc32 - rho_+ Lc22)
         + sigma_+ A^2 (rho_- Lc33 - rho_+ Lc23)] / (det L (rho_- - rho_+))

closes the kinematic equation lambda H - weighted-normal-trace = d into
H = (lambda + K)^{-1} (d + w_h).  All symbol formulas live on SymbolKit and
accept scalars or numpy arrays alike, so the finite-difference class
estimator reuses the exact production arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import GridSpec, Tolerances
from .errors import HeightNotInvertible, NoCutoffFound
from .kernels import get_backend
from .lopatinski import LopatinskiMatrix, assemble, omega1
from .params import FluidParams, Sector, SpectralPoint
from .symbols import CharRoots

__all__ = [
    "SymbolKit",
    "BetaSolution",
    "CoefficientSet",
    "HeightSymbol",
    "HeightScanReport",
    "solve_betas",
    "coefficient_symbols",
    "height_K",
    "height_rhs",
    "omega3",
    "omega4_formula",
    "slope_limit",
    "find_lambda0",
    "height_scan",
    "height_ratio_curve",
]


class SymbolKit:
    """Entry/cofactor bundle with every coefficient symbol as a method.

    Fields are either python complex scalars or equal-shape numpy arrays;
    the formulas only use field arithmetic, so both work.  Indices are
    supplied as the value i*xi_m of the chosen frequency component.
    """

    __slots__ = (
        "fluid", "lam", "a", "ap", "bp", "bm",
        "l11p", "l12p", "l21p", "l22p", "l11m", "l12m", "l21m", "l22m",
        "det", "p_stab",
        "c11", "c12", "c13", "c21", "c22", "c23", "c31", "c32", "c33",
    )

    def __init__(self, fluid, lam, a, ap, bp, bm, entries, det, p_stab):
        self.fluid = fluid
        self.lam = lam
        self.a = a
        self.ap = ap
        self.bp = bp
        self.bm = bm
        (self.l11p, self.l12p, self.l21p, self.l22p,
         self.l11m, self.l12m, self.l21m, self.l22m) = entries
        self.det = det
        self.p_stab = p_stab
        l11 = self.l11p + self.l11m
        self.c11 = self.l22p * self.l22m
        self.c12 = -self.l22p * self.l12m
        self.c13 = self.l12p * self.l22m
        self.c21 = -self.l21p * self.l22m
        self.c22 = self.l21p * self.l12m
        self.c23 = self.l12m * self.l21m - l11 * self.l22m
        self.c31 = -self.l22p * self.l21m
        self.c32 = l11 * self.l22p - self.l12p * self.l21p
        self.c33 = -self.l12p * self.l21m

    @classmethod
    def from_matrix(cls, m: LopatinskiMatrix) -> "SymbolKit":
        p = _stab_p_of(m)
        return cls(
            m.fluid, m.point.lam, m.point.a,
            m.roots.a_plus, m.roots.b_plus, m.roots.b_minus,
            (*m.l_plus, *m.l_minus), m.det, p,
        )

    @classmethod
    def batch(cls, fluid: FluidParams, lam: np.ndarray, a: np.ndarray) -> "SymbolKit":
        lam = np.ascontiguousarray(lam, dtype=np.complex128)
        a = np.ascontiguousarray(a, dtype=np.float64)
        rp, rm, mp, mm, nup = fluid.as_tuple()
        backend = get_backend()
        ap, bp, bm = backend.roots_batch(lam, a, rp, rm, mp, mm, nup)
        out = backend.lmatrix_batch(lam, a, rp, rm, mp, mm, nup)
        entries = out[:8]
        det, p_stab = out[8], out[9]
        return cls(fluid, lam, a, ap, bp, bm, entries, det, p_stab)

    # -- P family: q_pm = i xi'.beta'_pm mp B_pm beta_pmN = A (sum_m P_m h_m + A P_N H)
    #
    # The raw cofactor sums c1j -+ B_pm c{2,3}j cancel like A/B_pm in the
    # lambda-dominated regime, so the P entries are built from regrouped
    # forms in which every minus-entry difference is resolved analytically.

    def _det_block_plus(self):
        return self.l11p * self.l22p - self.l12p * self.l21p

    def _w_plus(self):
        """L22+ + B+ L21+ with the parameter-level cancellation removed."""
        f = self.fluid
        mp, nup = f.mu_plus, f.nu_plus
        return (2.0 * mp * self.p_stab * self.bp
                * ((mp + nup) * self.ap + mp * self.bp)
                / ((2.0 * mp + nup) * (self.ap + self.bp)))

    def _row_plus(self, j: int):
        """Stable c1j - B+ c2j (the q_plus row of the inverse)."""
        if j == 0:
            return self.l22m * self._w_plus()
        if j == 1:
            return -self.l12m * self._w_plus()
        l11 = self.l11p + self.l11m
        return (self.l22m * (self.l12p + self.bp * l11)
                - self.bp * self.l12m * self.l21m)

    def _row_minus(self, j: int):
        """Stable c1j + B- c3j (the q_minus row of the inverse)."""
        f = self.fluid
        if j == 0:
            return 2.0 * f.mu_minus * self.a * self.bm * self.l22p
        if j == 1:
            return (f.mu_minus * (self.a * self.a + self.bm * self.bm) * self.l22p
                    + self.bm * self._det_block_plus())
        return 2.0 * f.mu_minus * self.a * self.bm * self.l12p

    def p_plus_m(self, ixi_m):
        w = ixi_m / self.a
        num = self._row_plus(0) * self.l11p - self._row_plus(2) * self.l21p
        return num / self.det * w - w

    def p_plus_N(self):
        f = self.fluid
        return -(self._row_plus(1) * f.sigma_minus * self.a
                 + self._row_plus(2) * f.sigma_plus) / self.det

    def p_minus_m(self, ixi_m):
        w = ixi_m / self.a
        num = self._row_minus(0) * self.l11p - self._row_minus(2) * self.l21p
        return num / self.det * w

    def p_minus_N(self):
        f = self.fluid
        return -(self._row_minus(1) * f.sigma_minus * self.a
                 + self._row_minus(2) * f.sigma_plus) / self.det

    # -- R family: (B_pm - A_pm) alpha_pmJ = A (sum_m R_Jm h_m + A R_JN H)

    def _r_plus_factor_j(self, ixi_j):
        f = self.fluid
        return -f.nu_plus * ixi_j * self.p_stab / (
            (2.0 * f.mu_plus + f.nu_plus) * (self.ap + self.bp))

    def _r_plus_factor_N(self):
        f = self.fluid
        return f.nu_plus * self.ap * self.p_stab / (
            (2.0 * f.mu_plus + f.nu_plus) * (self.ap + self.bp))

    def r_plus(self, j_normal: bool, m_normal: bool, ixi_j=None, ixi_m=None):
        fac = self._r_plus_factor_N() if j_normal else self._r_plus_factor_j(ixi_j)
        p = self.p_plus_N() if m_normal else self.p_plus_m(ixi_m)
        return fac * p

    def r_minus(self, j_normal: bool, m_normal: bool, ixi_j=None, ixi_m=None):
        fac = -1.0 if j_normal else -ixi_j / self.a
        p = self.p_minus_N() if m_normal else self.p_minus_m(ixi_m)
        return fac * p

    # -- S family: beta_pmJ = [T_j h_j] + A (sum_m S_Jm h_m + A S_JN H)

    def s_plus_Nm(self, ixi_m):
        return (self.c21 * self.l11p - self.c23 * self.l21p) / self.det * (ixi_m / self.a)

    def s_plus_NN(self):
        f = self.fluid
        return -(self.c22 * f.sigma_minus * self.a + self.c23 * f.sigma_plus) / self.det

    def s_minus_Nm(self, ixi_m):
        return (self.c31 * self.l11p - self.c33 * self.l21p) / self.det * (ixi_m / self.a)

    def s_minus_NN(self):
        f = self.fluid
        return -(self.c32 * f.sigma_minus * self.a + self.c33 * f.sigma_plus) / self.det

    def _bsum(self):
        f = self.fluid
        return f.mu_plus * self.bp + f.mu_minus * self.bm

    def s_jm(self, ixi_j, ixi_m):
        f = self.fluid
        return -(
            f.mu_plus * self.r_plus(False, False, ixi_j, ixi_m)
            + f.mu_minus * self.r_minus(False, False, ixi_j, ixi_m)
            - f.mu_plus * ixi_j * self.s_plus_Nm(ixi_m)
            + f.mu_minus * ixi_j * self.s_minus_Nm(ixi_m)
        ) / self._bsum()

    def s_jN(self, ixi_j):
        f = self.fluid
        return -(
            f.mu_plus * self.r_plus(False, True, ixi_j)
            + f.mu_minus * self.r_minus(False, True, ixi_j)
            - f.mu_plus * ixi_j * self.s_plus_NN()
            + f.mu_minus * ixi_j * self.s_minus_NN()
        ) / self._bsum()

    def t_plus(self):
        return -self.fluid.mu_minus * self.bm / self._bsum()

    def t_minus(self):
        return self.fluid.mu_plus * self.bp / self._bsum()

    # -- pressure: gamma_- = sum_m p_m1 h_m + A p_N1 H

    def p_press_m(self, ixi_m):
        return -self.fluid.mu_minus * (self.a + self.bm) * self.p_minus_m(ixi_m)

    def p_press_N(self):
        return -self.fluid.mu_minus * (self.a + self.bm) * self.p_minus_N()

    # -- height symbol

    def k_height(self):
        f = self.fluid
        drho = f.rho_minus - f.rho_plus
        a2 = self.a * self.a
        a3 = a2 * self.a
        return (
            f.sigma_minus * a3 * (f.rho_minus * self.c32 - f.rho_plus * self.c22)
            + f.sigma_plus * a2 * (f.rho_minus * self.c33 - f.rho_plus * self.c23)
        ) / (self.det * drho)


def _stab_p_of(m: LopatinskiMatrix) -> complex:
    f = m.fluid
    a2 = m.point.a ** 2
    den = f.rho_plus / (2.0 * f.mu_plus + f.nu_plus) * m.point.lam + a2
    return (m.roots.a_plus * m.roots.b_plus + a2) / den


@dataclass(frozen=True)
class BetaSolution:
    """Direct solve of the interface system plus all derived amplitudes.

    Arrays are indexed [0..N-2] tangential, [N-1] normal.
    """

    matrix: LopatinskiMatrix
    h_hat: np.ndarray
    H_hat: complex
    ix_beta_minus: complex
    ix_beta_plus: complex
    q_plus: complex
    q_minus: complex
    beta_plus: np.ndarray
    beta_minus: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    gamma_minus: complex

    @property
    def dim(self) -> int:
        return self.h_hat.size + 1

    def system_residual(self) -> float:
        """Relative residual of L x = rhs for the solved triple."""
        m = self.matrix
        x = np.array(
            [self.ix_beta_minus, self.beta_plus[-1], self.beta_minus[-1]],
            dtype=np.complex128,
        )
        rhs = _rhs_vector(m, self.h_hat, self.H_hat)
        r = m.matrix() @ x - rhs
        scale = max(float(np.max(np.abs(m.matrix()) @ np.abs(x))), float(np.max(np.abs(rhs))), 1e-300)
        return float(np.max(np.abs(r))) / scale


def _rhs_vector(m: LopatinskiMatrix, h_hat: np.ndarray, H_hat: complex) -> np.ndarray:
    f = m.fluid
    a = m.point.a
    ixh = np.sum(1j * np.asarray(m.point.xi) * h_hat)
    return np.array(
        [
            m.l_plus[0] * ixh,
            -f.sigma_minus * a ** 3 * H_hat,
            -f.sigma_plus * a ** 2 * H_hat - m.l_plus[2] * ixh,
        ],
        dtype=np.complex128,
    )


def solve_betas(
    fluid: FluidParams,
    sp: SpectralPoint,
    r: CharRoots,
    L: LopatinskiMatrix,
    h_hat,
    H_hat: complex,
) -> BetaSolution:
    """Solve the 3x3 interface system and expand every amplitude.

    h_hat: tangential jump data, length N-1; H_hat: height datum.
    """
    h_hat = np.asarray(h_hat, dtype=np.complex128)
    if h_hat.shape != (sp.dim - 1,):
        raise ValueError(f"h_hat must have shape ({sp.dim - 1},), got {h_hat.shape}")
    H_hat = complex(H_hat)
    a = sp.a
    xi = np.asarray(sp.xi, dtype=np.float64)
    ixh = complex(np.sum(1j * xi * h_hat))

    x = L.solve(_rhs_vector(L, h_hat, H_hat))
    ixbm = complex(x[0])
    beta_p_N = complex(x[1])
    beta_m_N = complex(x[2])
    ixbp = ixbm - ixh

    f = fluid
    kit = SymbolKit.from_matrix(L)
    # q_pm via the representation tables, not the trace combinations
    # ixb_pm -+ B_pm beta_pmN: the latter cancel catastrophically when
    # B_pm >> A and would poison gamma_minus and every g amplitude.
    q_plus = complex(
        a * (sum(kit.p_plus_m(1j * xi[m]) * h_hat[m] for m in range(sp.dim - 1))
             + a * kit.p_plus_N() * H_hat))
    q_minus = complex(
        a * (sum(kit.p_minus_m(1j * xi[m]) * h_hat[m] for m in range(sp.dim - 1))
             + a * kit.p_minus_N() * H_hat))
    fac_N = kit._r_plus_factor_N()
    n = sp.dim
    g_plus = np.empty(n, dtype=np.complex128)
    g_minus = np.empty(n, dtype=np.complex128)
    for j in range(n - 1):
        g_plus[j] = kit._r_plus_factor_j(1j * xi[j]) * q_plus
        g_minus[j] = -(1j * xi[j] / a) * q_minus
    g_plus[-1] = fac_N * q_plus
    g_minus[-1] = -q_minus
    gamma_minus = -f.mu_minus * (a + r.b_minus) * q_minus / a

    bsum = f.mu_plus * r.b_plus + f.mu_minus * r.b_minus
    beta_plus = np.empty(n, dtype=np.complex128)
    beta_minus = np.empty(n, dtype=np.complex128)
    for j in range(n - 1):
        beta_minus[j] = (
            f.mu_plus * r.b_plus * h_hat[j]
            - f.mu_plus * g_plus[j] - f.mu_minus * g_minus[j]
            + 1j * xi[j] * (f.mu_plus * beta_p_N - f.mu_minus * beta_m_N)
        ) / bsum
        beta_plus[j] = beta_minus[j] - h_hat[j]
    beta_plus[-1] = beta_p_N
    beta_minus[-1] = beta_m_N

    return BetaSolution(
        matrix=L, h_hat=h_hat, H_hat=H_hat,
        ix_beta_minus=ixbm, ix_beta_plus=ixbp,
        q_plus=q_plus, q_minus=q_minus,
        beta_plus=beta_plus, beta_minus=beta_minus,
        g_plus=g_plus, g_minus=g_minus, gamma_minus=gamma_minus,
    )


@dataclass(frozen=True)
class CoefficientSet:
    """All data-to-amplitude symbols at one spectral point.

    Layout: column m in 0..N-2 weights h_hat[m], column N-1 weights H_hat.
    Rows of r_/s_ arrays run over solution components J = 0..N-1
    (tangential first, normal last).
    """

    fluid: FluidParams
    point: SpectralPoint
    roots: CharRoots
    p_plus: np.ndarray      # (N,)  P+_{m,0}, last = P+_{N,0}
    p_minus: np.ndarray     # (N,)
    r_plus: np.ndarray      # (N, N)
    r_minus: np.ndarray     # (N, N)
    s_plus: np.ndarray      # (N, N)
    s_minus: np.ndarray     # (N, N)
    t_plus: np.ndarray      # (N-1,)
    t_minus: np.ndarray     # (N-1,)
    p_press: np.ndarray     # (N,)  p-_{m,1}, last = p-_{N,1}

    @property
    def dim(self) -> int:
        return self.p_plus.size

    def _weights(self, h_hat: np.ndarray, H_hat: complex) -> np.ndarray:
        a = self.point.a
        return np.concatenate([np.asarray(h_hat, dtype=np.complex128), [a * complex(H_hat)]])

    def assemble_g(self, h_hat, H_hat):
        """(g_plus, g_minus): kernel amplitudes  A * (R h-weights)."""
        w = self._weights(h_hat, H_hat)
        a = self.point.a
        return a * (self.r_plus @ w), a * (self.r_minus @ w)

    def assemble_beta(self, h_hat, H_hat):
        """(beta_plus, beta_minus) from the T and S tables."""
        w = self._weights(h_hat, H_hat)
        a = self.point.a
        h_hat = np.asarray(h_hat, dtype=np.complex128)
        bp = a * (self.s_plus @ w)
        bm = a * (self.s_minus @ w)
        bp[:-1] += self.t_plus * h_hat
        bm[:-1] += self.t_minus * h_hat
        return bp, bm

    def assemble_gamma(self, h_hat, H_hat) -> complex:
        w = self._weights(h_hat, H_hat)
        return complex(self.p_press @ w)

    def assemble_q(self, h_hat, H_hat):
        w = self._weights(h_hat, H_hat)
        a = self.point.a
        return complex(a * (self.p_plus @ w)), complex(a * (self.p_minus @ w))


def coefficient_symbols(
    fluid: FluidParams, sp: SpectralPoint, r: CharRoots, L: LopatinskiMatrix
) -> CoefficientSet:
    """Populate the full P/R/S/T/p^- table at one spectral point."""
    kit = SymbolKit.from_matrix(L)
    n = sp.dim
    xi = np.asarray(sp.xi, dtype=np.float64)
    ixi = 1j * xi

    p_plus = np.empty(n, dtype=np.complex128)
    p_minus = np.empty(n, dtype=np.complex128)
    for m in range(n - 1):
        p_plus[m] = kit.p_plus_m(ixi[m])
        p_minus[m] = kit.p_minus_m(ixi[m])
    p_plus[-1] = kit.p_plus_N()
    p_minus[-1] = kit.p_minus_N()

    r_plus = np.empty((n, n), dtype=np.complex128)
    r_minus = np.empty((n, n), dtype=np.complex128)
    for jn, jv in [(False, j) for j in range(n - 1)] + [(True, n - 1)]:
        for mn, mv in [(False, m) for m in range(n - 1)] + [(True, n - 1)]:
            kw = {}
            if not jn:
                kw["ixi_j"] = ixi[jv]
            if not mn:
                kw["ixi_m"] = ixi[mv]
            r_plus[jv, mv] = kit.r_plus(jn, mn, **kw)
            r_minus[jv, mv] = kit.r_minus(jn, mn, **kw)

    s_plus = np.empty((n, n), dtype=np.complex128)
    s_minus = np.empty((n, n), dtype=np.complex128)
    for j in range(n - 1):
        for m in range(n - 1):
            s_plus[j, m] = s_minus[j, m] = kit.s_jm(ixi[j], ixi[m])
        s_plus[j, -1] = s_minus[j, -1] = kit.s_jN(ixi[j])
    for m in range(n - 1):
        s_plus[-1, m] = kit.s_plus_Nm(ixi[m])
        s_minus[-1, m] = kit.s_minus_Nm(ixi[m])
    s_plus[-1, -1] = kit.s_plus_NN()
    s_minus[-1, -1] = kit.s_minus_NN()

    t_p = np.full(n - 1, kit.t_plus(), dtype=np.complex128)
    t_m = np.full(n - 1, kit.t_minus(), dtype=np.complex128)

    p_press = np.empty(n, dtype=np.complex128)
    for m in range(n - 1):
        p_press[m] = kit.p_press_m(ixi[m])
    p_press[-1] = kit.p_press_N()

    return CoefficientSet(
        fluid=fluid, point=sp, roots=r,
        p_plus=p_plus, p_minus=p_minus,
        r_plus=r_plus, r_minus=r_minus,
        s_plus=s_plus, s_minus=s_minus,
        t_plus=t_p, t_minus=t_m, p_press=p_press,
    )


@dataclass(frozen=True)
class HeightSymbol:
    """K at one point plus the formula-level constants of its lower bound."""

    K: complex
    inv: complex
    omega3: float
    omega4: float
    lambda0: float

    @property
    def lam_plus_K_abs(self) -> float:
        return 1.0 / abs(self.inv)


def omega3(fluid: FluidParams) -> float:
    """A-regime constant of the height symbol (printed form; exact at sigma=1).

    K/A -> sigma * omega3/omega1 as A/sqrt|lam| grows; the sigma factor is
    carried by slope_limit, not here.
    """
    mp, mm, nup = fluid.mu_plus, fluid.mu_minus, fluid.nu_plus
    rp, rm = fluid.rho_plus, fluid.rho_minus
    drho = rm - rp
    return (
        4.0 * mp * ((mp + mm) * nup + mp * mm) / (2.0 * mp + nup) * (rm / drho) ** 2
        + 4.0 * (mp * (mp + nup) / (2.0 * mp + nup) + mm) * mm * (rp / drho) ** 2
    )


def slope_limit(fluid: FluidParams) -> float:
    """Limit of K/A in the A-dominated regime: sigma * omega3 / omega1."""
    return fluid.sigma * omega3(fluid) / omega1(fluid)


def omega4_formula(fluid: FluidParams, sector: Sector) -> float:
    """Reference constant of |lam + K| >= omega4 (|lam| + A) (not sharp)."""
    ratio = slope_limit(fluid)
    s = 0.5 * math.sin(sector.epsilon / 2.0)
    return min(0.25, 0.25 * ratio, s, s * ratio)


def height_K(
    fluid: FluidParams,
    sp: SpectralPoint,
    L: LopatinskiMatrix,
    sector: Sector | None = None,
    tol: Tolerances | None = None,
) -> HeightSymbol:
    """Evaluate K and (lambda + K)^{-1} at one spectral point.

    The omega4/lambda0 fields carry the formula-level reference values; the
    certified (scanned) versions come from height_scan / find_lambda0.
    """
    sector = sector or Sector(epsilon=math.pi / 4)
    tol = tol or Tolerances()
    kit = SymbolKit.from_matrix(L)
    k = complex(kit.k_height())
    denom = sp.lam + k
    if abs(denom) < tol.height_inv_rel * (abs(sp.lam) + sp.a) or abs(denom) < 1e-300:
        raise HeightNotInvertible(
            f"|lambda + K| = {abs(denom):.3e} at lam={sp.lam!r}, A={sp.a!r}"
        )
    return HeightSymbol(
        K=k, inv=1.0 / denom, omega3=omega3(fluid),
        omega4=omega4_formula(fluid, sector), lambda0=sector.lambda_floor,
    )


def height_rhs(coeffs: CoefficientSet, h_hat) -> complex:
    """Weighted normal-trace contribution w_h of the jump data to the
    kinematic equation: H = (lambda+K)^{-1} (d + w_h)."""
    f = coeffs.fluid
    a = coeffs.point.a
    h_hat = np.asarray(h_hat, dtype=np.complex128)
    drho = f.rho_minus - f.rho_plus
    sm = coeffs.s_minus[-1, :-1]
    sp_ = coeffs.s_plus[-1, :-1]
    return complex(a * np.sum((f.rho_minus * sm - f.rho_plus * sp_) * h_hat) / drho)


@dataclass(frozen=True)
class HeightScanReport:
    """Scanned invertibility certificate for lambda + K."""

    fluid: FluidParams
    epsilon: float
    grid: GridSpec
    lambda0: float
    omega3: float
    omega4: float            # scanned min of |lam+K|/(|lam|+A) over |lam| >= lambda0
    omega4_formula: float
    slope: float             # measured K/A in the A-dominated regime
    slope_limit: float
    k_envelope: float        # max |K|/sqrt|lam| over A <= sqrt|lam|
    worst_lam: complex
    worst_a: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "fluid": {
                "rho_plus": self.fluid.rho_plus, "rho_minus": self.fluid.rho_minus,
                "mu_plus": self.fluid.mu_plus, "mu_minus": self.fluid.mu_minus,
                "nu_plus": self.fluid.nu_plus, "sigma": self.fluid.sigma,
            },
            "epsilon": self.epsilon,
            "lambda0": self.lambda0,
            "omega3": self.omega3,
            "omega4": self.omega4,
            "omega4_formula": self.omega4_formula,
            "slope": self.slope,
            "slope_limit": self.slope_limit,
            "k_envelope": self.k_envelope,
            "worst_point": {
                "re_lambda": self.worst_lam.real,
                "im_lambda": self.worst_lam.imag,
                "A": self.worst_a,
            },
            "n_points": self.n_points,
        }


def _height_ratios(fluid: FluidParams, sector: Sector, grid: GridSpec):
    """(mags, per-magnitude min ratio, argmin metadata) over the scan grid."""
    backend = get_backend()
    rp, rm, mp, mm, nup = fluid.as_tuple()
    sig_p, sig_m = fluid.sigma_plus, fluid.sigma_minus
    mags = grid.lam_mags()
    angs = grid.angles(sector.epsilon)
    avals = grid.a_vals()
    block = angs.size * avals.size
    lam_block = np.repeat(np.exp(1j * angs), avals.size)
    a_block = np.tile(avals, angs.size)
    per_mag_min = np.empty(mags.size)
    worst = []
    for i, mag in enumerate(mags):
        lam = np.ascontiguousarray(mag * lam_block)
        _, ratio = backend.heightscan_batch(
            lam, np.ascontiguousarray(a_block), rp, rm, mp, mm, nup, sig_p, sig_m
        )
        k = int(np.argmin(ratio))
        per_mag_min[i] = float(ratio[k])
        worst.append((complex(lam[k]), float(a_block[k])))
    return mags, per_mag_min, worst, mags.size * block


def height_ratio_curve(fluid: FluidParams, sector: Sector,
                       grid: GridSpec | None = None):
    """(|lambda| magnitudes, per-magnitude min of |lam+K|/(|lam|+A)); the
    plot-ready curve behind find_lambda0."""
    mags, per_min, _, _ = _height_ratios(fluid, sector, grid or GridSpec())
    return mags, per_min


def find_lambda0(
    fluid: FluidParams,
    sector: Sector,
    grid: GridSpec | None = None,
    floor: float | None = None,
) -> float:
    """Smallest grid cutoff with inf_{|lam| >= cutoff} |lam+K|/(|lam|+A) >= floor.

    Returns 0.0 when the bound holds over the whole scanned sector; raises
    NoCutoffFound when no cutoff inside the grid range works (sigma = 0 can
    land here when K degenerates).
    """
    grid = grid or GridSpec()
    floor = floor if floor is not None else Tolerances().height_floor
    mags, per_min, _, _ = _height_ratios(fluid, sector, grid)
    suffix = np.minimum.accumulate(per_min[::-1])[::-1]
    ok = suffix >= floor
    if not ok.any():
        raise NoCutoffFound(
            f"no cutoff in [{mags[0]:.3e}, {mags[-1]:.3e}] attains "
            f"|lam+K|/(|lam|+A) >= {floor:.1e}"
        )
    first = int(np.argmax(ok))
    return 0.0 if first == 0 else float(mags[first])


def height_scan(
    fluid: FluidParams,
    sector: Sector,
    grid: GridSpec | None = None,
    lambda0: float | None = None,
    slope_ratio: float = 100.0,
) -> HeightScanReport:
    """Certify omega4 > 0 above lambda0 and measure the A-regime slope of K."""
    grid = grid or GridSpec()
    if lambda0 is None:
        lambda0 = find_lambda0(fluid, sector, grid)
    mags, per_min, worst, n = _height_ratios(fluid, sector, grid)
    mask = mags >= max(lambda0, mags[0])
    idx = np.nonzero(mask)[0]
    kbest = idx[int(np.argmin(per_min[idx]))]
    w4 = float(per_min[kbest])
    worst_lam, worst_a = worst[kbest]

    # slope probe: A = slope_ratio * sqrt|lam|, lam real spanning scales
    slopes = []
    for lam_mag in (1e-2, 1.0, 1e2):
        a = slope_ratio * math.sqrt(lam_mag)
        sp = SpectralPoint(lam=complex(lam_mag), xi=(a,))
        kit = SymbolKit.from_matrix(assemble(fluid, sp))
        slopes.append(complex(kit.k_height()).real / a)
    slope = float(np.mean(slopes))

    # |K| <= C sqrt|lam| envelope on the lam-dominated side
    env = 0.0
    for lam_mag in (1.0, 1e2, 1e4, 1e6):
        for ang in (0.0, (math.pi - sector.epsilon) / 2):
            lam = lam_mag * complex(math.cos(ang), math.sin(ang))
            for afrac in (1e-3, 1e-2, 1e-1, 1.0):
                a = afrac * math.sqrt(lam_mag)
                sp = SpectralPoint(lam=lam, xi=(a,))
                kit = SymbolKit.from_matrix(assemble(fluid, sp))
                env = max(env, abs(complex(kit.k_height())) / math.sqrt(lam_mag))

    return HeightScanReport(
        fluid=fluid, epsilon=sector.epsilon, grid=grid, lambda0=float(lambda0),
        omega3=omega3(fluid), omega4=w4, omega4_formula=omega4_formula(fluid, sector),
        slope=slope, slope_limit=slope_limit(fluid), k_envelope=env,
        worst_lam=worst_lam, worst_a=worst_a, n_points=n,
    )
