"""Exception types raised by the library.

Every failure mode that callers are expected to catch has a named class here;
generic ValueError/TypeError are reserved for programming errors.
"""

__all__ = [
    "LopStokesError",
    "NonPositiveParameter",
    "EqualDensities",
    "OutOfSector",
    "WrongSign",
    "SingularDetL",
    "NonPositiveOmega",
    "AsymptoticMismatch",
    "HeightNotInvertible",
    "NoCutoffFound",
    "GridTooCoarse",
    "ZeroModeData",
    "QuadratureFailure",
    "EnvelopeUnbounded",
    "ConfigError",
]


class LopStokesError(Exception):
    """Base class for all library errors."""


class NonPositiveParameter(LopStokesError):
    """A physical parameter that must be positive is zero or negative."""


class EqualDensities(LopStokesError):
    """The two phase densities coincide; the derived surface-tension weights blow up."""


class OutOfSector(LopStokesError):
    """A resolvent parameter lies outside the admissible sector."""


class WrongSign(LopStokesError):
    """A quantity with a guaranteed sign (e.g. root real parts) violated it."""


class SingularDetL(LopStokesError):
    """The boundary-coupling determinant is numerically singular at the requested point."""


class NonPositiveOmega(LopStokesError):
    """A scanned lower-bound constant came out nonpositive."""


class AsymptoticMismatch(LopStokesError):
    """Determinant asymptotics disagree with the closed-form constants beyond tolerance."""


class HeightNotInvertible(LopStokesError):
    """lambda + K is too close to zero to invert the height equation at this point."""


class NoCutoffFound(LopStokesError):
    """No magnitude cutoff makes the height lower bound hold on the scanned grid."""


class GridTooCoarse(LopStokesError):
    """A scan/estimation grid is too small to produce a meaningful answer."""


class ZeroModeData(LopStokesError):
    """Boundary data carries a zero-frequency component beyond tolerance."""


class QuadratureFailure(LopStokesError):
    """An adaptive quadrature did not converge to the requested tolerance."""


class EnvelopeUnbounded(LopStokesError):
    """A decay-envelope estimate did not stabilize under refinement."""


class ConfigError(LopStokesError):
    """Run configuration file is malformed or contains unknown/invalid entries."""
