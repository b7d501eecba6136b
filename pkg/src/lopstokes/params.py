"""Parameter records and admissibility checks.

The model couples a compressible phase on the upper half-space x_N > 0
(density rho_plus, shear viscosity mu_plus, second viscosity nu_plus) to an
incompressible phase on x_N < 0 (rho_minus, mu_minus), with surface tension
sigma on the flat interface x_N = 0.  Resolvent parameters live in the sector
|arg(lambda)| <= pi - epsilon, optionally truncated to |lambda| >= lambda
floor.  Tangential frequencies xi' never vanish; A = |xi'|.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import EqualDensities, NonPositiveParameter, OutOfSector

__all__ = ["FluidParams", "Sector", "SpectralPoint", "validate_params"]


@dataclass(frozen=True)
class FluidParams:
    """Physical constants of the two phases.

    sigma_plus/sigma_minus are the density-weighted surface-tension
    coefficients rho_pm * sigma / (rho_minus - rho_plus) that enter the
    normal-stress conditions; they may be negative when rho_minus < rho_plus.
    """

    rho_plus: float
    rho_minus: float
    mu_plus: float
    mu_minus: float
    nu_plus: float
    sigma: float = 1.0

    def __post_init__(self) -> None:
        validate_params(self)

    @property
    def sigma_plus(self) -> float:
        return self.rho_plus * self.sigma / (self.rho_minus - self.rho_plus)

    @property
    def sigma_minus(self) -> float:
        return self.rho_minus * self.sigma / (self.rho_minus - self.rho_plus)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        """(rho_plus, rho_minus, mu_plus, mu_minus, nu_plus) for the kernels."""
        return (self.rho_plus, self.rho_minus, self.mu_plus, self.mu_minus, self.nu_plus)


def validate_params(p: FluidParams) -> None:
    """Raise NonPositiveParameter / EqualDensities on inadmissible constants."""
    for name in ("rho_plus", "rho_minus", "mu_plus", "mu_minus", "nu_plus"):
        value = getattr(p, name)
        if not (value > 0.0) or not math.isfinite(value):
            raise NonPositiveParameter(f"{name} must be positive and finite, got {value!r}")
    if not (p.sigma >= 0.0) or not math.isfinite(p.sigma):
        raise NonPositiveParameter(f"sigma must be >= 0 and finite, got {p.sigma!r}")
    if p.rho_plus == p.rho_minus:
        raise EqualDensities(
            f"rho_plus == rho_minus == {p.rho_plus!r}: surface-tension weights are undefined"
        )


@dataclass(frozen=True)
class Sector:
    """Resolvent sector |arg(lambda)| <= pi - epsilon, |lambda| >= lambda_floor.

    epsilon is restricted to (0, pi/2]: the estimates degrade as epsilon -> 0
    and the model is never used beyond a right-half-plane-plus margin.
    """

    epsilon: float
    lambda_floor: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon <= math.pi / 2.0):
            raise NonPositiveParameter(
                f"sector epsilon must lie in (0, pi/2], got {self.epsilon!r}"
            )
        if not (self.lambda_floor >= 0.0):
            raise NonPositiveParameter(
                f"sector lambda_floor must be >= 0, got {self.lambda_floor!r}"
            )

    def contains(self, lam: complex) -> bool:
        lam = complex(lam)
        if lam == 0:
            return False
        if abs(lam) < self.lambda_floor:
            return False
        return abs(cmath.phase(lam)) <= math.pi - self.epsilon + 1e-15

    def require(self, lam: complex) -> None:
        if not self.contains(lam):
            raise OutOfSector(
                f"lambda={lam!r} outside sector(epsilon={self.epsilon}, "
                f"lambda_floor={self.lambda_floor})"
            )


@dataclass(frozen=True)
class SpectralPoint:
    """One resolvent/frequency point: lambda and the tangential frequency xi'.

    xi has length N-1 for space dimension N in {2, 3} and must be nonzero;
    a = |xi'| is cached at construction.
    """

    lam: complex
    xi: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.xi) not in (1, 2):
            raise NonPositiveParameter(
                f"xi must have 1 or 2 components (dim 2 or 3), got {len(self.xi)}"
            )
        if self.a == 0.0:
            raise NonPositiveParameter("xi' must be nonzero (A > 0 required)")
        if self.lam == 0:
            raise OutOfSector("lambda = 0 is excluded from the resolvent sector")

    @property
    def a(self) -> float:
        return math.hypot(*self.xi)

    @property
    def dim(self) -> int:
        return len(self.xi) + 1

    def scaled(self, s: float) -> "SpectralPoint":
        """Parabolic rescaling (lambda, xi') -> (s^2 lambda, s xi')."""
        if not (s > 0.0):
            raise NonPositiveParameter(f"scaling factor must be positive, got {s!r}")
        return SpectralPoint(self.lam * s * s, tuple(s * x for x in self.xi))
