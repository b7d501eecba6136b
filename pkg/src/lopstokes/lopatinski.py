"""Boundary determinant: the 3x3 interface matrix, its cofactors and bounds.

The interface system couples (i xi'.beta'_minus, beta_plus_N, beta_minus_N)
through a 3x3 matrix L assembled from eight scalar entries, four per phase.
Production entries avoid the A_plus*B_plus - A^2 cancellation (it vanishes
like lambda) by routing every division through

    P = (A_plus B_plus + A^2) / (rho_plus (2 mu_plus + nu_plus)^{-1} lambda + A^2),

whose denominator stays comparable to (sqrt|lambda| + A)^2 on the sector.
Raw textbook entries are kept as an oracle for cross-checks away from the
degenerate set.  The determinant obeys

    |det L| >= omega (sqrt|lambda| + A)^4

with explicit constants omega1 (A-dominated regime) and omega2
(lambda-dominated regime); scan_lower_bound estimates the sector-wide omega
on a log grid and asymptotic_report certifies the two limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import GridSpec, Tolerances, mutation_from_env
from .errors import AsymptoticMismatch, NonPositiveOmega, SingularDetL
from .kernels import get_backend
from .params import FluidParams, Sector, SpectralPoint
from .symbols import CharRoots, char_roots

__all__ = [
    "LopatinskiMatrix",
    "ScanReport",
    "entries_plus",
    "entries_minus",
    "assemble",
    "omega1",
    "omega2",
    "scan_lower_bound",
    "asymptotic_report",
    "ENTRY_DEGREES",
    "ENTRY_TARGETS",
]

# parabolic degree of each entry: value under (lam, xi') -> (s^2 lam, s xi')
ENTRY_DEGREES = {
    "l11p": 1, "l12p": 2, "l21p": 0, "l22p": 1,
    "l11m": 1, "l12m": 2, "l21m": 1, "l22m": 2,
    "det": 4,
}


def _stab_p(fluid: FluidParams, lam: complex, a: float, ap: complex, bp: complex) -> complex:
    a2 = a * a
    den = fluid.rho_plus / (2.0 * fluid.mu_plus + fluid.nu_plus) * lam + a2
    return (ap * bp + a2) / den


def entries_plus(
    fluid: FluidParams, sp: SpectralPoint, r: CharRoots
) -> tuple[complex, complex, complex, complex]:
    """Stabilized compressible-side entries (L+11, L+12, L+21, L+22)."""
    mu, nu = fluid.mu_plus, fluid.nu_plus
    a = sp.a
    p = _stab_p(fluid, sp.lam, a, r.a_plus, r.b_plus)
    c_pn = (mu + nu) / (2.0 * mu + nu)
    l11 = mu * c_pn * r.a_plus * p
    l12 = mu * a * a * (2.0 - c_pn * p)
    l21 = (
        2.0 * mu * nu / (2.0 * mu + nu) * r.a_plus / (r.b_plus + r.a_plus)
        - mu * (nu - mu) / (2.0 * mu + nu)
    ) * p
    l22 = mu * c_pn * r.b_plus * p
    return l11, l12, l21, l22


def entries_plus_raw(
    fluid: FluidParams, sp: SpectralPoint, r: CharRoots
) -> tuple[complex, complex, complex, complex]:
    """Textbook compressible entries with the explicit A+B+ - A^2 division.

    Loses accuracy as lambda -> 0; cross-check oracle only.
    """
    mu, nu, rho = fluid.mu_plus, fluid.nu_plus, fluid.rho_plus
    a = sp.a
    lam = sp.lam
    ap, bp = r.a_plus, r.b_plus
    d = ap * bp - a * a
    l11 = rho * lam * ap / d
    l22 = rho * lam * bp / d
    l12 = mu * a * a * (2.0 * ap * bp - a * a - bp * bp) / d
    l21 = rho * lam * ((mu + nu) * ap + (mu - nu) * bp) / ((mu + nu) * (bp + ap) * d)
    return l11, l12, l21, l22


def entries_minus(
    fluid: FluidParams, sp: SpectralPoint, r: CharRoots
) -> tuple[complex, complex, complex, complex]:
    """Incompressible-side entries; B- - A taken as rho-*lam/(mu-*(B-+A))."""
    mu = fluid.mu_minus
    a = sp.a
    bm = r.b_minus
    bm_minus_a = fluid.rho_minus * sp.lam / (mu * (bm + a))
    l11 = mu * (a + bm)
    l12 = mu * a * bm_minus_a
    l21 = mu * bm_minus_a
    l22 = mu * (a + bm) * bm
    return l11, l12, l21, l22


def entries_minus_raw(
    fluid: FluidParams, sp: SpectralPoint, r: CharRoots
) -> tuple[complex, complex, complex, complex]:
    """Incompressible entries with the naive B- - A subtraction (oracle)."""
    mu = fluid.mu_minus
    a = sp.a
    bm = r.b_minus
    return (
        mu * (a + bm),
        mu * a * (bm - a),
        mu * (bm - a),
        mu * (a + bm) * bm,
    )


@dataclass(frozen=True)
class LopatinskiMatrix:
    """One assembled interface matrix; entries, determinant, cofactors."""

    fluid: FluidParams
    point: SpectralPoint
    roots: CharRoots
    l_plus: tuple[complex, complex, complex, complex]
    l_minus: tuple[complex, complex, complex, complex]
    det: complex
    det_plus: complex
    det_minus: complex

    def matrix(self) -> np.ndarray:
        l11p, l12p, l21p, l22p = self.l_plus
        l11m, l12m, l21m, l22m = self.l_minus
        return np.array(
            [
                [l11p + l11m, l12p, l12m],
                [l21m, 0.0, l22m],
                [-l21p, -l22p, 0.0],
            ],
            dtype=np.complex128,
        )

    def cofactors(self) -> np.ndarray:
        """3x3 array Lc with (L^{-1})_{ij} = Lc[i,j]/det."""
        l11p, l12p, l21p, l22p = self.l_plus
        l11m, l12m, l21m, l22m = self.l_minus
        l11 = l11p + l11m
        return np.array(
            [
                [l22p * l22m, -l22p * l12m, l12p * l22m],
                [-l21p * l22m, l21p * l12m, l12m * l21m - l11 * l22m],
                [-l22p * l21m, l11 * l22p - l12p * l21p, -l12p * l21m],
            ],
            dtype=np.complex128,
        )

    def inverse(self) -> np.ndarray:
        return self.cofactors() / self.det

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """x with L x = rhs through the explicit cofactors."""
        return self.cofactors() @ np.asarray(rhs, dtype=np.complex128) / self.det

    @property
    def scale4(self) -> float:
        return (math.sqrt(abs(self.point.lam)) + self.point.a) ** 4

    @property
    def ratio(self) -> float:
        return abs(self.det) / self.scale4


# Slots addressable by the deliberate-defect hook; unknown targets that are
# not amplitude names either must raise, so typos cannot silently no-op.
ENTRY_TARGETS = {
    "l11p": ("p", 0), "l12p": ("p", 1), "l21p": ("p", 2), "l22p": ("p", 3),
    "l11m": ("m", 0), "l12m": ("m", 1), "l21m": ("m", 2), "l22m": ("m", 3),
}


def assemble(
    fluid: FluidParams,
    sp: SpectralPoint,
    r: CharRoots | None = None,
    perturb: tuple[str, float] | None = None,
) -> LopatinskiMatrix:
    """Build the matrix at one spectral point, det via the block split.

    perturb (or the LOPSTOKES_MUTATE environment hook) scales one named
    entry by (1 + rel) before the determinant and cofactors are formed, so
    a mutated build is internally consistent and only the physics checks
    can expose it.
    """
    r = r or char_roots(fluid, sp)
    lp = entries_plus(fluid, sp, r)
    lm = entries_minus(fluid, sp, r)
    mut = perturb if perturb is not None else mutation_from_env()
    if mut is not None and mut[0] in ENTRY_TARGETS:
        side, k = ENTRY_TARGETS[mut[0]]
        bump = 1.0 + mut[1]
        if side == "p":
            lp = tuple(v * bump if i == k else v for i, v in enumerate(lp))
        else:
            lm = tuple(v * bump if i == k else v for i, v in enumerate(lm))
    det_p = lp[0] * lp[3] - lp[1] * lp[2]
    det_m = lm[0] * lm[3] - lm[1] * lm[2]
    det = lm[3] * det_p + lp[3] * det_m
    if abs(det) < 1e-300:
        raise SingularDetL(
            f"det L = {det!r} at lam={sp.lam!r}, A={sp.a!r}; "
            "vanishing determinant inside the sector is a certification failure"
        )
    return LopatinskiMatrix(
        fluid=fluid, point=sp, roots=r, l_plus=lp, l_minus=lm,
        det=det, det_plus=det_p, det_minus=det_m,
    )


def omega1(fluid: FluidParams) -> float:
    """A-dominated limit constant: det L ~ omega1 * A^4 as A/sqrt|lam| -> inf."""
    mp, mm, nup = fluid.mu_plus, fluid.mu_minus, fluid.nu_plus
    return 8.0 * mp * mm * (mp * nup + mm * (mp + nup)) / (2.0 * mp + nup)


def omega2(fluid: FluidParams) -> float:
    """lambda-dominated limit constant: det L ~ omega2 * lam^2 as A -> 0."""
    mp, mm, nup = fluid.mu_plus, fluid.mu_minus, fluid.nu_plus
    rp, rm = fluid.rho_plus, fluid.rho_minus
    return math.sqrt(mp + nup) * (
        math.sqrt(mp) * rp * rm + math.sqrt(mm) * math.sqrt(rp) * rm ** 1.5
    )


@dataclass(frozen=True)
class ScanReport:
    """Grid infimum of |det L|/(sqrt|lam|+A)^4 plus the regime constants."""

    fluid: FluidParams
    epsilon: float
    grid: GridSpec
    omega: float
    omega1: float
    omega2: float
    r1: float
    r2: float
    delta1: float
    delta2: float
    worst_lam: complex
    worst_a: float
    n_points: int
    refine_drift: float | None = None
    stress: tuple = field(default=())

    def to_dict(self) -> dict:
        d = {
            "fluid": {
                "rho_plus": self.fluid.rho_plus, "rho_minus": self.fluid.rho_minus,
                "mu_plus": self.fluid.mu_plus, "mu_minus": self.fluid.mu_minus,
                "nu_plus": self.fluid.nu_plus, "sigma": self.fluid.sigma,
            },
            "epsilon": self.epsilon,
            "grid": {
                "lam_magnitudes": list(self.grid.lam_mags()),
                "angles": list(self.grid.angles(self.epsilon)),
                "a_values": list(self.grid.a_vals()),
            },
            "omega": self.omega,
            "omega1": self.omega1,
            "omega2": self.omega2,
            "regime_thresholds": {"R1": self.r1, "R2": self.r2},
            "regime_deviations": {"delta1": self.delta1, "delta2": self.delta2},
            "worst_point": {
                "re_lambda": self.worst_lam.real,
                "im_lambda": self.worst_lam.imag,
                "A": self.worst_a,
                "ratio": self.omega,
            },
            "n_points": self.n_points,
        }
        if self.refine_drift is not None:
            d["refine_drift"] = self.refine_drift
        return d


_CHUNK = 1 << 19


def _scan_min(fluid: FluidParams, sector: Sector, grid: GridSpec):
    """(omega, worst_lam, worst_a, n) over the grid, chunked through a backend."""
    backend = get_backend()
    rp, rm, mp, mm, nup = fluid.as_tuple()
    lam, a = grid.points(sector.epsilon)
    n = lam.size
    best = math.inf
    worst_lam = complex(lam[0])
    worst_a = float(a[0])
    for start in range(0, n, _CHUNK):
        lam_c = np.ascontiguousarray(lam[start:start + _CHUNK])
        a_c = np.ascontiguousarray(a[start:start + _CHUNK])
        _, ratio = backend.detscan_batch(lam_c, a_c, rp, rm, mp, mm, nup)
        if not np.all(np.isfinite(ratio)):
            bad = int(np.argmin(np.isfinite(ratio)))
            raise NonPositiveOmega(
                f"nonfinite |det L| ratio at lam={lam_c[bad]!r}, A={a_c[bad]!r}"
            )
        k = int(np.argmin(ratio))
        if ratio[k] < best:
            best = float(ratio[k])
            worst_lam = complex(lam_c[k])
            worst_a = float(a_c[k])
    return best, worst_lam, worst_a, n


def scan_lower_bound(
    fluid: FluidParams,
    sector: Sector,
    grid: GridSpec | None = None,
    refine: bool = False,
    tol: Tolerances | None = None,
) -> ScanReport:
    """Estimate omega = inf |det L|/(sqrt|lam|+A)^4 over the scan grid.

    The infimum is empirical (grid minimum); with refine=True the grid is
    re-run at double density and the relative movement of omega is recorded
    as refine_drift.  Raises NonPositiveOmega if the minimum is not strictly
    positive.
    """
    grid = grid or GridSpec()
    tol = tol or Tolerances()
    omega, worst_lam, worst_a, n = _scan_min(fluid, sector, grid)
    if not omega > 0.0:
        raise NonPositiveOmega(
            f"scan infimum {omega!r} at lam={worst_lam!r}, A={worst_a!r}"
        )
    drift = None
    if refine:
        omega_r, _, _, _ = _scan_min(fluid, sector, grid.refined())
        drift = abs(omega_r - omega) / omega
    w1, w2, dev = asymptotic_report(fluid, 100.0, sector=sector, dev_tol=math.inf)
    d1, d2 = dev
    return ScanReport(
        fluid=fluid, epsilon=sector.epsilon, grid=grid, omega=omega,
        omega1=w1, omega2=w2, r1=100.0, r2=100.0, delta1=d1, delta2=d2,
        worst_lam=worst_lam, worst_a=worst_a, n_points=n, refine_drift=drift,
    )


def asymptotic_report(
    fluid: FluidParams,
    ratio_threshold: float = 100.0,
    sector: Sector | None = None,
    dev_tol: float | None = None,
):
    """Certify det L ~ omega1*A^4 and det L ~ omega2*lam^2 at a regime ratio.

    Probes A/sqrt|lam| = ratio_threshold (and its reciprocal) across scales
    and sector angles; returns (omega1, omega2, (dev1, dev2)) with
    dev1 = max |det L/(omega1 A^4) - 1| and dev2 = max |det L/(omega2 lam^2) - 1|.
    Raises AsymptoticMismatch when the worse deviation exceeds dev_tol
    (default 5% at ratio 100, 0.5% beyond 10^3).
    """
    if ratio_threshold < 100.0:
        raise AsymptoticMismatch(
            f"regime ratio must be >= 100 to sit in the asymptotic zone, got {ratio_threshold}"
        )
    sector = sector or Sector(epsilon=math.pi / 4)
    if dev_tol is None:
        dev_tol = 0.05 if ratio_threshold <= 1e3 else 0.005
    w1 = omega1(fluid)
    w2 = omega2(fluid)
    span = math.pi - sector.epsilon
    angles = [0.0, 0.5 * span, -0.5 * span, span, -span]
    dev1 = 0.0
    dev2 = 0.0
    for scale in (1e-2, 1.0, 1e2):
        for ang in angles:
            # A-dominated probe: A = ratio * sqrt|lam|
            a = scale
            lam_mag = (a / ratio_threshold) ** 2
            lam = lam_mag * complex(math.cos(ang), math.sin(ang))
            m = assemble(fluid, SpectralPoint(lam=lam, xi=(a,)))
            dev1 = max(dev1, abs(m.det / (w1 * a ** 4) - 1.0))
            # lambda-dominated probe: sqrt|lam| = ratio * A
            lam_mag = scale * scale
            lam = lam_mag * complex(math.cos(ang), math.sin(ang))
            a = math.sqrt(lam_mag) / ratio_threshold
            m = assemble(fluid, SpectralPoint(lam=lam, xi=(a,)))
            dev2 = max(dev2, abs(m.det / (w2 * lam * lam) - 1.0))
    if max(dev1, dev2) > dev_tol:
        raise AsymptoticMismatch(
            f"regime deviations ({dev1:.3e}, {dev2:.3e}) exceed {dev_tol:.3e} "
            f"at ratio {ratio_threshold}"
        )
    return w1, w2, (dev1, dev2)
