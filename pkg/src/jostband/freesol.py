"""Closed-form solutions of the free equation u(n+1) + u(n-1) = E u(n).

The energy is parametrized as E = z + 1/z with z in the closed unit disk
minus the origin.  Building blocks:

* ``plane_wave``   u0(n) = z^n (scale by the identity for matrix solutions),
* ``linear_wave``  v0(n) = (+-1)^n n, completing the basis at E = +-2,
* ``s_free``       the solution with s(0) = 0, s(1) = 1,
* ``tau_free``     the solution with tau(0) = tau(1) = 1.

Near z = 1 the ratio form (z^n - z^-n)/(z - z^-1) of s cancels
catastrophically, so a geometric-sum form is used there instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

DISK_TOL = 1e-12

# Below this distance from z = 1, s_free switches to the cancellation-free sum.
STABLE_SUM_RADIUS = 1e-3


@dataclass(frozen=True)
class SpectralParameter:
    """z in the closed unit disk minus 0, with derived E = z + 1/z and nu."""

    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if z == 0:
            raise DomainError("spectral parameter z = 0 is excluded")
        if abs(z) > 1.0 + DISK_TOL:
            raise DomainError(f"|z| = {abs(z):.12f} lies outside the closed unit disk")
        object.__setattr__(self, "z", z)

    @cached_property
    def energy(self) -> complex:
        return self.z + 1.0 / self.z

    @cached_property
    def nu(self) -> complex:
        """nu = i / (z - 1/z); undefined at the band edges z = +-1."""
        if self.z * self.z == 1.0:
            raise DomainError("nu is undefined at z = +-1")
        return 1j / (self.z - 1.0 / self.z)

    @property
    def on_circle(self) -> bool:
        return abs(abs(self.z) - 1.0) <= DISK_TOL

    @property
    def at_band_edge(self) -> bool:
        return abs(self.z - 1.0) <= DISK_TOL or abs(self.z + 1.0) <= DISK_TOL


def validate_z(z: complex) -> complex:
    """Check z against the closed-disk domain, returning it as a plain complex."""
    return SpectralParameter(z).z


def energy_of(z: complex) -> complex:
    if z == 0:
        raise DomainError("z = 0 has no energy E = z + 1/z")
    return z + 1.0 / z


def nu_of(z: complex) -> complex:
    if z == 0 or z * z == 1.0:
        raise DomainError("nu = i/(z - 1/z) undefined at z in {0, 1, -1}")
    return 1j / (z - 1.0 / z)


def plane_wave(z: complex, n: int) -> complex:
    """u0(n) = z^n."""
    if z == 0:
        raise DomainError("plane wave undefined at z = 0")
    return complex(z) ** n


def linear_wave(sign: int, n: int) -> float:
    """v0(n) = (+-1)^n n, the linearly growing free solution at E = +-2."""
    if sign not in (1, -1):
        raise DomainError("linear_wave sign must be +1 or -1")
    return float((sign ** (n & 1)) * n)


def s_free(z: complex, n: int) -> complex:
    """Free solution with s(0) = 0, s(1) = 1 (odd in n).

    Evaluates (z^n - z^-n)/(z - z^-1) away from z^2 = 1, the geometric sum
    z/(z+1) * sum_{j=-n}^{n-1} z^j inside |z - 1| < 1e-3, and (+-1)^(n+1) n at
    z = +-1 exactly.  Accepts any z != 0 (callers may need 1/z evaluations).
    """
    z = complex(z)
    if z == 0:
        raise DomainError("s_free undefined at z = 0")
    if z == 1.0 or z == -1.0:
        sign = 1.0 if z == 1.0 else (-1.0) ** (n + 1)
        return complex(sign * n)
    if abs(z - 1.0) < STABLE_SUM_RADIUS or abs(z - 1.0) < STABLE_SUM_RADIUS * abs(z):
        return _s_free_sum(z, n)
    return (z**n - z**(-n)) / (z - 1.0 / z)


def _s_free_sum(z: complex, n: int) -> complex:
    if n == 0:
        return 0.0 + 0.0j
    m = abs(n)
    powers = z ** np.arange(-m, m)
    val = z / (z + 1.0) * complex(powers.sum())
    return val if n > 0 else -val


def tau_free(z: complex, n: int) -> complex:
    """Free solution with tau(0) = tau(1) = 1; the formula excludes z = -1."""
    z = complex(z)
    if z == 0:
        raise DomainError("tau_free undefined at z = 0")
    if z == -1.0:
        raise DomainError("tau_free is not defined at z = -1")
    return (z**n + z**(-n + 1)) / (z + 1.0)


def circle_point(theta: float) -> complex:
    return complex(np.exp(1j * theta))


def circle_grid(count: int, theta_min: float = 0.05,
                theta_max: float = np.pi - 0.05) -> list[complex]:
    """Evenly spaced unit-circle points e^{i theta}, avoiding the band edges."""
    if count < 1:
        return []
    return [circle_point(t) for t in np.linspace(theta_min, theta_max, count)]
