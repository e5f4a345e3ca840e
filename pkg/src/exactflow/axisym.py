"""Self-similar axisymmetric vortical flows of a polytropic gas.

Two reductions of the stationary axisymmetric Euler system in (z, r):

``PZ`` (pressure independent of z), unknowns functions of r::

    u = z^(m+1) U(r),  v = z^m V(r),  rho = z^(-2m) Q(r),  p = P(r)

``PR`` (pressure independent of r), unknowns functions of z::

    u = r^m U(z),  v = r^(m+1) V(z),  rho = r^(-2m) Q(z),  p = P(z)

Each reduced system of four ODEs has three first integrals (c1, c2, c3).
With c3 = 0 the remaining equation has elementary solutions. Those
branches require c2/c1 < 0, i.e. negative pressure for positive density:
c3 is a scaled Bernoulli constant, which is positive whenever P/Q > 0.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .core import (
    DomainError,
    FlowState,
    SingularSystemError,
    SingularityError,
    rpow,
)
from .roots import bisect_secant, scan_bracket

PZ = "p_z_independent"
PR = "p_r_independent"


@dataclass(frozen=True)
class AxisymParams:
    m: float
    gamma: float
    c1: float = 1.0
    c2: float = -1.0
    c3: float = 0.0
    a: Optional[float] = None
    b: float = 0.0
    branch: str = PZ

    def __post_init__(self):
        for name in ("m", "gamma", "c1", "c2", "c3", "b"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.m == -1:
            raise DomainError("m = -1 is excluded (division by m + 1)")
        if not self.gamma > 1:
            raise DomainError("gamma must exceed 1")
        if self.c1 == 0:
            raise DomainError("c1 must be nonzero")
        if self.branch not in (PZ, PR):
            raise DomainError(f"unknown branch {self.branch!r}")

    @property
    def K(self):
        """Coefficient c2 gamma / (c1 (gamma - 1)) of the third integral."""
        return self.c2 * self.gamma / (self.c1 * (self.gamma - 1.0))


@dataclass(frozen=True)
class ReducedStateRZ:
    U: float
    V: float
    Q: float
    P: float

    def __post_init__(self):
        for name in ("U", "V", "Q", "P"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    def as_array(self):
        return np.array([self.U, self.V, self.Q, self.P])

    @classmethod
    def from_array(cls, y):
        return cls(*(float(v) for v in y))


def _state(state):
    if isinstance(state, ReducedStateRZ):
        return state.U, state.V, state.Q, state.P
    U, V, Q, P = state
    return U, V, Q, P


def _solve2(a11, a12, a21, a22, b1, b2, what):
    det = a11 * a22 - a12 * a21
    scale = max(abs(a11 * a22), abs(a12 * a21))
    if det == 0 or abs(det) <= 1e-14 * scale:
        raise SingularSystemError(f"{what}: derivative system is singular (sonic locus)")
    return (b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det


# ---------------------------------------------------------------- p_z branch

def rhs_pz_branch(params, state, r):
    """d(U, V, Q, P)/dr for the p_z-independent reduction."""
    U, V, Q, P = _state(state)
    m, g = params.m, params.gamma
    if r == 0:
        raise SingularityError("r = 0 is a singular point of the reduction")
    if V == 0:
        raise SingularityError("V = 0 is a singular point of the reduction")
    if not Q > 0:
        raise SingularityError("Q must stay positive")
    dU = -(1 + m) * U * U / V
    # V V' + P'/Q = -m V U ;  gamma P V' + V P' = -gamma P ((m+1) U + V/r)
    dV, dP = _solve2(V, 1.0 / Q, g * P, V,
                     -m * V * U, -g * P * ((m + 1) * U + V / r), "p_z branch")
    dQ = -((1 - m) * U * Q + Q * dV + V * Q / r) / V
    return np.array([dU, dV, dQ, dP])


def reduced_residuals_pz(params, state, dstate, r):
    """Left-hand sides of the four reduced p_z equations."""
    U, V, Q, P = _state(state)
    dU, dV, dQ, dP = _state(dstate)
    m, g = params.m, params.gamma
    return np.array([
        (1 - m) * U * Q + V * dQ + Q * dV + V * Q / r,
        (1 + m) * U * U + V * dU,
        m * V * U + V * dV + dP / Q,
        V * dP + g * P * ((m + 1) * U + dV + V / r),
    ])


def first_integrals_pz(params, state, r):
    """(c1, c2, c3) of the p_z reduction evaluated at one state."""
    U, V, Q, P = _state(state)
    m, g = params.m, params.gamma
    if not r > 0:
        raise DomainError("r must be positive")
    c1 = Q * V * r * rpow(U, (m - 1) / (m + 1))
    c2 = P * rpow(V * r / U, g)
    c3 = (0.5 * V * V * rpow(U, -2 * m / (m + 1))
          + c2 * g / (c1 * (g - 1)) * rpow(U / (V * r), g - 1))
    return c1, c2, c3


def third_integral_pz(params, U, dU, r):
    """Left side of the scalar U-equation minus c3 (zero on solutions)."""
    m, g = params.m, params.gamma
    if dU == 0:
        raise SingularityError("U' = 0")
    return ((1 + m) ** 2 / 2 * rpow(U, (2 * m + 4) / (m + 1)) / (dU * dU)
            + params.K * rpow(-dU / ((m + 1) * U * r), g - 1) - params.c3)


def _pz_exponents(params):
    g, m = params.gamma, params.m
    return 2 * g / (1 + g), -(m + 1) * (1 + g) / 2


def _pz_U_jet(params, a, r):
    beta, e = _pz_exponents(params)
    base = a * rpow(r, beta) + params.b
    if not base > 0:
        raise DomainError("a r^(2 gamma/(1+gamma)) + b must be positive")
    U = rpow(base, e)
    db = a * beta * rpow(r, beta - 1)
    ddb = a * beta * (beta - 1) * rpow(r, beta - 2)
    dU = e * rpow(base, e - 1) * db
    ddU = e * (e - 1) * rpow(base, e - 2) * db * db + e * rpow(base, e - 1) * ddb
    return U, dU, ddU


def solve_pz_amplitude(params, r_ref=1.0):
    """Constant ``a`` of the c3 = 0 closed form, by root finding in ``a``.

    Substitutes the ansatz into the scalar U-equation at ``r_ref`` and
    brackets the root on a logarithmic grid.
    """
    if params.c3 != 0:
        raise DomainError("the closed form requires c3 = 0")
    p0 = replace(params, c3=0.0)

    def F(a):
        U, dU, _ = _pz_U_jet(p0, a, r_ref)
        return third_integral_pz(p0, U, dU, r_ref)

    lo, hi = scan_bracket(F, np.logspace(-8, 8, 321))
    if lo == hi:
        return float(lo)
    return float(bisect_secant(F, lo, hi, tol=1e-15))


def pz_amplitude_formula(params):
    """Closed-form value of ``a``; independent check on :func:`solve_pz_amplitude`."""
    K, g = params.K, params.gamma
    if not K < 0:
        raise DomainError("c3 = 0 needs c2/c1 < 0")
    return (-1 / (2 * K)) ** (1 / (g + 1)) / g


@lru_cache(maxsize=256)
def _pz_amplitude(params):
    return params.a if params.a is not None else solve_pz_amplitude(params)


def closed_form_pz_jet(params, r):
    """(state, d state/dr) of the c3 = 0 closed form, both analytic."""
    m, g = params.m, params.gamma
    if not r > 0:
        raise DomainError("r must be positive")
    a = _pz_amplitude(params)
    U, dU, ddU = _pz_U_jet(params, a, r)
    if dU == 0:
        raise SingularityError("U' vanishes")
    V = -(m + 1) * U * U / dU
    dV = -(m + 1) * (2 * U * dU * dU - U * U * ddU) / (dU * dU)
    alpha = (1 - m) / (m + 1)
    Q = params.c1 * rpow(U, alpha) / (V * r)
    dQ = Q * (alpha * dU / U - dV / V - 1 / r)
    P = params.c2 * rpow(U / (V * r), g)
    dP = P * g * (dU / U - dV / V - 1 / r)
    return ReducedStateRZ(U, V, Q, P), ReducedStateRZ(dU, dV, dQ, dP)


def closed_form_pz(params, r):
    return closed_form_pz_jet(params, r)[0]


# ---------------------------------------------------------------- p_r branch

def rhs_pr_branch(params, state, z):
    """d(U, V, Q, P)/dz for the p_r-independent reduction."""
    U, V, Q, P = _state(state)
    m, g = params.m, params.gamma
    if U == 0:
        raise SingularityError("U = 0 is a singular point of the reduction")
    if not Q > 0:
        raise SingularityError("Q must stay positive")
    dV = -(m + 1) * V * V / U
    # Q U U' + P' = -m Q U V ;  gamma P U' + U P' = -gamma (m+2) P V
    dU, dP = _solve2(Q * U, 1.0, g * P, U,
                     -m * Q * U * V, -g * (m + 2) * P * V, "p_r branch")
    dQ = -((2 - m) * Q * V + Q * dU) / U
    return np.array([dU, dV, dQ, dP])


def reduced_residuals_pr(params, state, dstate, z=None):
    U, V, Q, P = _state(state)
    dU, dV, dQ, dP = _state(dstate)
    m, g = params.m, params.gamma
    return np.array([
        Q * dU + U * dQ + (2 - m) * Q * V,
        Q * (U * dU + m * V * U) + dP,
        U * dV + (m + 1) * V * V,
        U * dP + g * P * (dU + (m + 2) * V),
    ])


def first_integrals_pr(params, state, z=None):
    """(c1, c2, c3) of the p_r reduction.

    c1 = Q U V^(-(2-m)/(m+1)),  c2 = P (U / V^((m+2)/(m+1)))^gamma,
    c3 = U^2 V^(-2m/(m+1)) / 2 + K (V^((m+2)/(m+1)) / U)^(gamma-1).
    """
    U, V, Q, P = _state(state)
    m, g = params.m, params.gamma
    beta = (m + 2) / (m + 1)
    c1 = Q * U * rpow(V, -(2 - m) / (m + 1))
    s = U / rpow(V, beta)
    c2 = P * rpow(s, g)
    c3 = 0.5 * U * U * rpow(V, -2 * m / (m + 1)) + c2 * g / (c1 * (g - 1)) * rpow(1 / s, g - 1)
    return c1, c2, c3


def third_integral_pr(params, V, dV):
    """Scalar V-equation minus c3, zero on solutions of the p_r reduction::

        (m+1)^2/2 (V^((m+2)/(m+1)) / V')^2 + K (-V^(-m/(m+1)) V' / (m+1))^(gamma-1) = c3
    """
    m, g = params.m, params.gamma
    if dV == 0:
        raise SingularityError("V' = 0")
    first = (m + 1) ** 2 / 2 * (rpow(V, (m + 2) / (m + 1)) / dV) ** 2
    return first + params.K * rpow(-rpow(V, -m / (m + 1)) * dV / (m + 1), g - 1) - params.c3


def third_integral_pr_printed(params, V, dV):
    """Variant of the V-equation with inverted (m+1) factors.

    Kept for regression tests; it is not an integral of the system for m != 0.
    """
    m, g = params.m, params.gamma
    first = (rpow(V, (m + 2) / (m + 1)) / dV) ** 2 / (2 * (m + 1) ** 2)
    return first + params.K * rpow(-(m + 1) * rpow(V, -m / (m + 1)) * dV, g - 1) - params.c3


def pr_exponential_rate(params):
    """Rate k of the gamma = 3 solution ``V = b exp(k z)`` with c3 = 0.

    Real only when c1/c2 < 0; the decaying root is returned.
    """
    if params.gamma != 3:
        raise DomainError("the exponential branch needs gamma = 3")
    ratio = -params.c1 / (3 * params.c2)
    if not ratio > 0:
        raise DomainError("c3 = 0 with gamma = 3 needs c1/c2 < 0")
    return -(params.m + 1) * ratio ** 0.25


def pr_power_exponent(params):
    """Exponent of ``V = (a z + b)^e`` for gamma != 3: e = (m+1)(gamma+1)/(gamma-3)."""
    g = params.gamma
    if g == 3:
        raise DomainError("gamma = 3 has the exponential branch instead")
    return (params.m + 1) * (g + 1) / (g - 3)


def _pr_V_jet(params, z, a=None):
    m, g = params.m, params.gamma
    if g == 3:
        k = pr_exponential_rate(params)
        V = params.b * math.exp(k * z)
        return V, k * V, k * k * V
    e = pr_power_exponent(params)
    if a is None:
        a = _pr_amplitude(params)
    base = a * z + params.b
    if not base > 0:
        raise DomainError("a z + b must be positive")
    V = rpow(base, e)
    return V, a * e * rpow(base, e - 1), a * a * e * (e - 1) * rpow(base, e - 2)


def solve_pr_amplitude(params, z_ref=None):
    """Constant ``a`` of the gamma != 3 closed form by root finding."""
    if params.c3 != 0:
        raise DomainError("the closed form requires c3 = 0")
    e = pr_power_exponent(params)
    sign = 1.0 if e / (params.m + 1) < 0 else -1.0

    def F(mag):
        a = sign * mag
        zr = z_ref if z_ref is not None else (1 - params.b) / a
        V, dV, _ = _pr_V_jet(params, zr, a)
        return third_integral_pr(params, V, dV)

    lo, hi = scan_bracket(F, np.logspace(-8, 8, 321))
    mag = lo if lo == hi else bisect_secant(F, lo, hi, tol=1e-15)
    return sign * float(mag)


def pr_amplitude_formula(params):
    K, g, m = params.K, params.gamma, params.m
    if not K < 0:
        raise DomainError("c3 = 0 needs c2/c1 < 0")
    e = pr_power_exponent(params)
    t = (-1 / (2 * K)) ** (1 / (g + 1))
    return -(m + 1) * t / e


@lru_cache(maxsize=256)
def _pr_amplitude(params):
    return params.a if params.a is not None else solve_pr_amplitude(params)


def closed_form_pr_jet(params, z):
    """(state, d state/dz) of the c3 = 0 closed form of the p_r branch."""
    m, g = params.m, params.gamma
    V, dV, ddV = _pr_V_jet(params, z)
    if dV == 0:
        raise SingularityError("V' vanishes")
    U = -(m + 1) * V * V / dV
    dU = -(m + 1) * (2 * V * dV * dV - V * V * ddV) / (dV * dV)
    alpha = (2 - m) / (m + 1)
    beta = (m + 2) / (m + 1)
    Q = params.c1 * rpow(V, alpha) / U
    dQ = Q * (alpha * dV / V - dU / U)
    P = params.c2 * rpow(rpow(V, beta) / U, g)
    dP = P * g * (beta * dV / V - dU / U)
    return ReducedStateRZ(U, V, Q, P), ReducedStateRZ(dU, dV, dQ, dP)


def closed_form_pr(params, z):
    return closed_form_pr_jet(params, z)[0]


# ------------------------------------------------------ fields and streamlines

def reduced_rhs(params):
    """``f(s, y)`` for :func:`exactflow.odeint.integrate` on the params' branch."""
    rhs = rhs_pz_branch if params.branch == PZ else rhs_pr_branch
    return lambda s, y: rhs(params, y, s)


def first_integrals(params, state, s):
    if params.branch == PZ:
        return first_integrals_pz(params, state, s)
    return first_integrals_pr(params, state, s)


def closed_form(params, s):
    return closed_form_pz(params, s) if params.branch == PZ else closed_form_pr(params, s)


def physical_field_axisym(params, reduced: Callable, branch=None):
    """Field sampler ``(z, r) -> FlowState`` (w = 0) from a reduced solution.

    ``reduced`` maps the reduced variable (r for PZ, z for PR) to a
    :class:`ReducedStateRZ` or a (U, V, Q, P) sequence.
    """
    branch = branch or params.branch
    m = params.m

    def field(z, r):
        if not r > 0:
            raise SingularityError("the field is not defined on or across the axis r = 0")
        if branch == PZ:
            U, V, Q, P = _state(reduced(r))
            s = z
        else:
            U, V, Q, P = _state(reduced(z))
            s = r
        if branch == PZ:
            u, v = rpow(s, m + 1) * U, rpow(s, m) * V
        else:
            u, v = rpow(s, m) * U, rpow(s, m + 1) * V
        return FlowState(u, v, 0.0, rpow(s, -2 * m) * Q, P)

    return field


def closed_form_field(params):
    return physical_field_axisym(params, lambda s: closed_form(params, s))


def streamline_axisym(params, c, samples, reduced: Optional[Callable] = None, branch=None):
    """Closed-form streamline points ``(z, r)``.

    PZ: ``z = c U(r)^(-1/(m+1))`` over r samples.
    PR: ``r = c V(z)^(-1/(m+1))`` over z samples.
    """
    branch = branch or params.branch
    reduced = reduced or (lambda s: closed_form(params, s))
    e = -1 / (params.m + 1)
    pts = []
    for s in samples:
        U, V, _, _ = _state(reduced(s))
        if branch == PZ:
            pts.append((c * rpow(U, e), s))
        else:
            pts.append((s, c * rpow(V, e)))
    return np.array(pts)


def streamline_constant(params, z, r, reduced: Optional[Callable] = None, branch=None):
    """The constant c of the streamline through (z, r)."""
    branch = branch or params.branch
    reduced = reduced or (lambda s: closed_form(params, s))
    e = 1 / (params.m + 1)
    if branch == PZ:
        return z * rpow(_state(reduced(r))[0], e)
    return r * rpow(_state(reduced(z))[1], e)
