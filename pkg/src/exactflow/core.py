"""Shared flow types, gas laws and the streamline invariants.

Everything here is nondimensional. Types validate finiteness once, at
construction, and are immutable afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ExactFlowError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ExactFlowError, ValueError):
    """An argument lies outside the real domain of a formula."""


class SingularityError(DomainError):
    """A reduced system or field hits a coordinate/denominator singularity."""


class SingularSystemError(SingularityError):
    """The linear system for the derivatives is degenerate (sonic locus)."""


class BracketError(ExactFlowError, ValueError):
    """A root-finding bracket does not enclose a sign change."""


class StencilError(DomainError):
    """A finite-difference stencil touched a point where the field is undefined."""


class StagnationError(DomainError):
    """Velocity vanishes where a direction or density is required."""


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        _check_finite(x=self.x, y=self.y, z=self.z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))


@dataclass(frozen=True)
class FlowState:
    """Velocity, density and pressure at a single point."""

    u: float
    v: float
    w: float
    rho: float
    p: float

    def __post_init__(self):
        _check_finite(u=self.u, v=self.v, w=self.w, rho=self.rho, p=self.p)
        if not self.rho > 0:
            raise DomainError(f"density must be positive, got {self.rho!r}")

    @property
    def velocity(self):
        return (self.u, self.v, self.w)

    @property
    def speed_squared(self):
        return self.u * self.u + self.v * self.v + self.w * self.w

    def as_tuple(self):
        return (self.u, self.v, self.w, self.rho, self.p)


@dataclass(frozen=True)
class GasLaw:
    """Either a polytropic gas (``gamma``) or a Chaplygin gas ``p = -a/rho + b``."""

    kind: str
    gamma: float | None = None
    a: float | None = None
    b: float = 0.0

    def __post_init__(self):
        if self.kind == "polytropic":
            if self.gamma is None or not math.isfinite(self.gamma):
                raise DomainError("polytropic law needs a finite gamma")
            if not self.gamma > 1:
                raise DomainError(f"gamma must exceed 1, got {self.gamma!r}")
        elif self.kind == "chaplygin":
            if self.a is None or not math.isfinite(self.a) or not self.a > 0:
                raise DomainError(f"Chaplygin constant a must be positive, got {self.a!r}")
            _check_finite(b=self.b)
        else:
            raise DomainError(f"unknown gas law kind {self.kind!r}")

    @classmethod
    def polytropic(cls, gamma):
        return cls("polytropic", gamma=gamma)

    @classmethod
    def chaplygin(cls, a, b=0.0):
        return cls("chaplygin", a=a, b=b)

    def pressure(self, rho):
        """Pressure from density (Chaplygin law only)."""
        if self.kind != "chaplygin":
            raise DomainError("pressure(rho) is only defined for the Chaplygin law")
        return -self.a / rho + self.b


def sound_speed_squared(law, state):
    """c^2 = dp/drho: ``gamma p / rho`` (polytropic) or ``a / rho^2`` (Chaplygin)."""
    if law.kind == "polytropic":
        c2 = law.gamma * state.p / state.rho
    else:
        c2 = law.a / (state.rho * state.rho)
    if not math.isfinite(c2):
        raise DomainError("sound speed is not finite")
    return c2


def entropy_invariant(gamma, state):
    """p / rho^gamma, constant along streamlines of adiabatic flow."""
    if not state.rho > 0:
        raise DomainError("density must be positive")
    return state.p / state.rho**gamma


def bernoulli_invariant(gamma, state):
    """|u|^2/2 + gamma p / ((gamma - 1) rho)."""
    if gamma == 1:
        raise DomainError("gamma = 1 (isothermal) has no polytropic enthalpy")
    if not state.rho > 0:
        raise DomainError("density must be positive")
    return 0.5 * state.speed_squared + gamma * state.p / ((gamma - 1.0) * state.rho)


def rpow(base, exponent):
    """Real power. Negative bases are allowed only for integer exponents.

    Raises DomainError instead of returning complex or nan results, and for
    0 raised to a negative power.
    """
    if base > 0:
        return base**exponent
    if base == 0:
        if exponent > 0:
            return 0.0 * base
        raise DomainError(f"0 cannot be raised to exponent {exponent!r}")
    if float(exponent).is_integer():
        return base ** int(exponent)
    raise DomainError(f"negative base {base!r} with non-integer exponent {exponent!r}")
