"""Exception types shared across the package.

The split matters for the CLI exit codes: input/usage problems
(:class:`InputError` subclasses) map to exit 2, numerical certificate
failures to exit 1.
"""

from __future__ import annotations


class JostbandError(Exception):
    """Base class for all package errors."""


class InputError(JostbandError, ValueError):
    """Malformed user input (files, dimensions, domains)."""


class DimensionError(InputError):
    """Matrix or window dimensions are inconsistent."""


class DomainError(InputError):
    """Spectral parameter outside the admissible set (z = 0, |z| > 1, ...)."""


class BandEdgeError(DomainError):
    """Request at z = +-1 where circle-only quantities are undefined.

    Callers wanting the threshold limits should use the band-edge module.
    """


class PotentialFormatError(InputError):
    """Potential document failed to parse or validate."""


class HermiticityError(PotentialFormatError):
    """A potential entry is not self-adjoint within tolerance."""

    def __init__(self, site: int, defect: float):
        self.site = site
        self.defect = defect
        super().__init__(f"V({site}) is not Hermitian: defect {defect:.3e}")


class SingularityError(JostbandError):
    """Matrix inversion refused because the input is numerically singular."""

    def __init__(self, sv_ratio: float, what: str = "matrix"):
        self.sv_ratio = sv_ratio
        super().__init__(
            f"{what} is numerically singular (sigma_min/sigma_max = {sv_ratio:.3e})"
        )


class TruncationError(JostbandError):
    """Finite window cannot control the interaction tail."""

    def __init__(self, message: str, tail: float = float("nan")):
        self.tail = tail
        super().__init__(message)


class ConsistencyError(JostbandError):
    """Two independent evaluations of the same quantity disagree."""


class AssumptionError(JostbandError):
    """A standing invertibility assumption fails; translating the origin may help."""


class TheoryViolationError(JostbandError):
    """A provably invertible block came out singular: upstream numerics failed."""
