"""Three-dimensional self-similar vortical flows of a polytropic gas.

The reduced system couples five unknowns (U, V, W, Q, P) of z::

    (1-n) Q U + (1-m) Q V + (Q W)' = 0
    (1+n) U^2 + m U V + W U' = 0
    n U V + (1+m) V^2 + W V' = 0
    Q (n U W + m V W + W W') + P' = 0
    W P' + gamma P ((n+1) U + (m+1) V + W') = 0

This labelling of (m, n) goes with the physical representation::

    u = x^(n+1) y^m U,  v = x^n y^(m+1) V,  w = x^n y^m W,
    rho = x^(-2n) y^(-2m) Q,  p = P

i.e. ``n`` is the x-exponent and ``m`` the y-exponent. The first integrals
and the auxiliary variables below are written in the same labelling.

With S = U^(1/N), R = V^(1/N) (N = 1 + n + m) and::

    T = R^(n+1) S^(m+1) / W,  X = S^n R^(-n-1),  Y = R^m S^(-m-1)

one has X' = Y' = X Y T, hence Y = X + c4, and the third integral becomes a
scalar first-order equation for X::

    1 / (2 X'^2) + a (X' / (X (X + c4)))^(gamma-1) = c3 / 2,
    a = gamma c2 / (c1 (gamma - 1)).

For c3 = 0 it is ``X' = -A (X (X + c4))^((gamma-1)/(gamma+1))`` with
``|A|^(gamma+1) |2a| = 1``. The sign of A is the opposite of the sign of X'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
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


@dataclass(frozen=True)
class ThreeDParams:
    """Exponents, adiabatic index and integration constants.

    ``x_sign`` selects the sign of X' (-1: decaying X, the displayed
    branches; +1: growing X). For non-integer gamma only ``x_sign = +1``
    gives real pressure on the closed forms. ``rate`` overrides the derived
    A; the closed forms then no longer solve the c3 = 0 equation unless it
    matches.
    """

    m: float
    n: float
    gamma: float
    c1: float = 1.0
    c2: float = -1.0
    c3: float = 0.0
    c4: float = 0.0
    b: float = 0.0
    x_sign: int = -1
    rate: Optional[float] = None

    def __post_init__(self):
        for name in ("m", "n", "gamma", "c1", "c2", "c3", "c4", "b"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.n + self.m + 1 == 0:
            raise DomainError("n + m + 1 = 0 makes the auxiliary change of variables degenerate")
        if not self.gamma > 1:
            raise DomainError("gamma must exceed 1")
        if self.c1 == 0:
            raise DomainError("c1 must be nonzero")
        if self.x_sign not in (-1, 1):
            raise DomainError("x_sign must be -1 or +1")

    @property
    def a(self):
        return self.gamma * self.c2 / (self.c1 * (self.gamma - 1.0))

    @property
    def A(self):
        """Rate constant of the c3 = 0 equation for X on the chosen branch."""
        if self.rate is not None:
            return self.rate
        return x_equation_amplitude(self.a, self.gamma, self.x_sign)


def x_equation_amplitude(a, gamma, x_sign=-1):
    """Real A solving ``1/(2 A^2) + a (-A)^(gamma-1) = 0`` with sign(A) = -x_sign."""
    g1 = gamma - 1.0
    if x_sign > 0:
        parity = 1.0
    else:
        if not g1.is_integer():
            raise DomainError("decaying X (A > 0) needs integer gamma for real powers; use x_sign=+1")
        parity = -1.0 if int(g1) % 2 else 1.0
    target = -1.0 / (2.0 * a * parity)
    if not target > 0:
        raise DomainError(f"no real A for a = {a!r}, gamma = {gamma!r}, x_sign = {x_sign}")
    return -x_sign * target ** (1.0 / (gamma + 1.0))


@dataclass(frozen=True)
class ReducedState3D:
    U: float
    V: float
    W: float
    Q: float
    P: float

    def __post_init__(self):
        for name in ("U", "V", "W", "Q", "P"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    def as_array(self):
        return np.array([self.U, self.V, self.W, self.Q, self.P])

    @classmethod
    def from_array(cls, y):
        return cls(*(float(v) for v in y))


@dataclass(frozen=True)
class AuxVars:
    S: float
    R: float
    T: float
    X: float
    Y: float


def _state(state):
    if isinstance(state, ReducedState3D):
        return state.U, state.V, state.W, state.Q, state.P
    U, V, W, Q, P = state
    return U, V, W, Q, P


def rhs_3d(params, state, z=None, literal_e5=False):
    """d(U, V, W, Q, P)/dz.

    ``literal_e5`` drops the factor P from the energy equation
    (``W P' + gamma ((n+1) U + (m+1) V + W') = 0``). That form breaks the
    pressure integral and exists only to demonstrate the difference.
    """
    U, V, W, Q, P = _state(state)
    m, n, g = params.m, params.n, params.gamma
    if W == 0:
        raise SingularityError("W = 0 is a singular point of the reduction")
    if not Q > 0:
        raise SingularityError("Q must stay positive")
    dU = -((1 + n) * U * U + m * U * V) / W
    dV = -(n * U * V + (1 + m) * V * V) / W
    gp = g if literal_e5 else g * P
    # unknowns (Q', W', P'):
    #   W Q' + Q W'        = -(1-n) Q U - (1-m) Q V
    #          Q W W' + P' = -Q (n U W + m V W)
    #          gp W' + W P' = -gp ((n+1) U + (m+1) V)
    det = W * (Q * W * W - gp)
    scale = max(abs(W * Q * W * W), abs(W * gp))
    if det == 0 or abs(det) <= 1e-14 * scale:
        raise SingularSystemError("3D reduction: W^2 = gamma P / Q (sonic locus)")
    mat = np.array([[W, Q, 0.0], [0.0, Q * W, 1.0], [0.0, gp, W]])
    rhs = np.array([
        -(1 - n) * Q * U - (1 - m) * Q * V,
        -Q * (n * U * W + m * V * W),
        -gp * ((n + 1) * U + (m + 1) * V),
    ])
    dQ, dW, dP = np.linalg.solve(mat, rhs)
    return np.array([dU, dV, dW, dQ, dP])


def reduced_residuals_3d(params, state, dstate, literal_e5=False):
    U, V, W, Q, P = _state(state)
    dU, dV, dW, dQ, dP = _state(dstate)
    m, n, g = params.m, params.n, params.gamma
    gp = g if literal_e5 else g * P
    return np.array([
        (1 - n) * Q * U + (1 - m) * Q * V + Q * dW + W * dQ,
        (1 + n) * U * U + m * U * V + W * dU,
        n * U * V + (1 + m) * V * V + W * dV,
        Q * (n * U * W + m * V * W + W * dW) + dP,
        W * dP + gp * ((n + 1) * U + (m + 1) * V + dW),
    ])


def to_aux(state, m, n):
    U, V, W = _state(state)[:3]
    if not (U > 0 and V > 0):
        raise DomainError("U and V must be positive")
    if W == 0:
        raise SingularityError("W = 0")
    N = 1 + n + m
    if N == 0:
        raise DomainError("n + m + 1 = 0")
    S = U ** (1 / N)
    R = V ** (1 / N)
    T = R ** (n + 1) * S ** (m + 1) / W
    X = S**n * R ** (-n - 1)
    Y = R**m * S ** (-m - 1)
    return AuxVars(S, R, T, X, Y)


def _log_SR(X, Y, m, n):
    if not (X > 0 and Y > 0):
        raise DomainError("X and Y must be positive")
    det = -(n + m + 1)
    if det == 0:
        raise DomainError("n + m + 1 = 0: S, R cannot be recovered from X, Y")
    lx, ly = math.log(X), math.log(Y)
    return (m * lx + (n + 1) * ly) / det, (n * ly + (m + 1) * lx) / det


def from_aux(aux, m, n):
    """(U, V, W) from the auxiliary variables (X, Y, T); S and R are recomputed."""
    lS, lR = _log_SR(aux.X, aux.Y, m, n)
    N = 1 + n + m
    S, R = math.exp(lS), math.exp(lR)
    if aux.T == 0:
        raise SingularityError("T = 0")
    return S**N, R**N, R ** (n + 1) * S ** (m + 1) / aux.T


def first_integrals_3d(params, state, z=None):
    """(c1, c2, c3) at one state."""
    U, V, W, Q, P = _state(state)
    m, n, g = params.m, params.n, params.gamma
    aux = to_aux(state, m, n)
    S, R = aux.S, aux.R
    c1 = Q * W * R ** (2 * m - 1 - n) * S ** (2 * n - 1 - m)
    c2 = P * rpow(W * S ** (-1 - m) * R ** (-1 - n), g)
    c3 = (W * W * R ** (-2 * m) * S ** (-2 * n)
          + 2 * c2 * g / (c1 * (g - 1)) * rpow(aux.T, g - 1))
    return c1, c2, c3


def x_equation_residual(params, X, dX):
    """``1/(2 X'^2) + a (X'/(X(X+c4)))^(gamma-1) - c3/2``."""
    if dX == 0:
        raise SingularityError("X' = 0")
    Y = X + params.c4
    return 0.5 / (dX * dX) + params.a * rpow(dX / (X * Y), params.gamma - 1) - 0.5 * params.c3


def x_equation_rhs(X, params, x_sign=None):
    """X' as a function of X.

    For c3 = 0 the explicit root. Otherwise the real root of the scalar
    equation with the sign of ``x_sign`` (default ``params.x_sign``), the one
    nearest to X' = 0 when several exist.
    """
    x_sign = params.x_sign if x_sign is None else x_sign
    Y = X + params.c4
    if not (X > 0 and Y > 0):
        raise DomainError("X and X + c4 must be positive")
    if params.c3 == 0:
        A = x_equation_amplitude(params.a, params.gamma, x_sign)
        return -A * rpow(X * Y, (params.gamma - 1) / (params.gamma + 1))

    def F(mag):
        return x_equation_residual(params, X, x_sign * mag)

    lo, hi = scan_bracket(F, np.logspace(-12, 12, 961))
    mag = lo if lo == hi else bisect_secant(F, lo, hi, tol=1e-15)
    return x_sign * float(mag)


def closed_form_X_jet(params, z):
    """(X, X', X'') on the c3 = 0 closed-form branches.

    gamma = 3 (any c4): ``X = (2 e^s - c4)^2 / (8 e^s)``, ``s = -A z + b``.
    gamma != 3 (c4 = 0): ``X = (A (gamma-3)(z+b)/(gamma+1))^(-(gamma+1)/(gamma-3))``.
    """
    if params.c3 != 0:
        raise DomainError("closed forms exist only for c3 = 0")
    g, A, c4 = params.gamma, params.A, params.c4
    if g == 3:
        E = math.exp(-A * z + params.b)
        if not 4 * E * E > c4 * c4:
            raise DomainError("2 e^(-A z + b) must exceed |c4|")
        X = (2 * E - c4) ** 2 / (8 * E)
        dX = -A * (4 * E * E - c4 * c4) / (8 * E)
        ddX = A * A * (4 * E * E + c4 * c4) / (8 * E)
        return X, dX, ddX
    if c4 != 0:
        raise DomainError("for gamma != 3 a closed form is known only for c4 = 0")
    beta = A * (g - 3) / (g + 1)
    B = beta * (z + params.b)
    if not B > 0:
        raise DomainError("A (gamma-3)(z+b)/(gamma+1) must be positive")
    k = -(g + 1) / (g - 3)
    return B**k, k * beta * B ** (k - 1), k * (k - 1) * beta * beta * B ** (k - 2)


def closed_form_X(params, z):
    return closed_form_X_jet(params, z)[0]


def aux_jet_to_state(params, X, dX, ddX):
    """(state, d state/dz) from X and its first two derivatives, Y = X + c4."""
    m, n, g = params.m, params.n, params.gamma
    Y = X + params.c4
    dY = dX
    T = dX / (X * Y)
    if T == 0:
        raise SingularityError("T = 0")
    dT = ddX / (X * Y) - dX * (dX * Y + X * dY) / (X * Y) ** 2
    lS, lR = _log_SR(X, Y, m, n)
    det = -(n + m + 1)
    dlS = (m * dX / X + (n + 1) * dY / Y) / det
    dlR = (n * dY / Y + (m + 1) * dX / X) / det
    N = 1 + n + m
    S, R = math.exp(lS), math.exp(lR)
    U, V = S**N, R**N
    W = R ** (n + 1) * S ** (m + 1) / T
    Q = params.c1 * T * R ** (-2 * m) * S ** (-2 * n)
    P = params.c2 * rpow(T, g)
    dU = U * N * dlS
    dV = V * N * dlR
    dW = W * ((n + 1) * dlR + (m + 1) * dlS - dT / T)
    dQ = Q * (dT / T - 2 * m * dlR - 2 * n * dlS)
    dP = params.c2 * g * rpow(T, g - 1) * dT
    return ReducedState3D(U, V, W, Q, P), ReducedState3D(dU, dV, dW, dQ, dP)


def reconstruct_3d_jet(params, z):
    return aux_jet_to_state(params, *closed_form_X_jet(params, z))


def reconstruct_3d(params, z):
    """Reduced state of the closed-form solution at z."""
    return reconstruct_3d_jet(params, z)[0]


def printed_W_gamma_ne_3(params, z):
    """Alternative W expression for the gamma != 3 branch, (z (gamma-3)/(gamma+1)) U.

    Differs from the definition W = R^(n+1) S^(m+1) / T by the sign and by
    z versus z + b. Kept for a documenting test only.
    """
    g = params.gamma
    U = reconstruct_3d(params, z).U
    return z * (g - 3) / (g + 1) * U


def physical_field_3d(params, reduced: Callable):
    """Field sampler ``(x, y, z) -> FlowState`` from a reduced solution of z."""
    m, n = params.m, params.n

    def field(x, y, z):
        if not (x > 0 and y > 0):
            # integer exponents still allow the other quadrants through rpow
            if x == 0 or y == 0:
                raise SingularityError("the field is singular on the coordinate planes")
        U, V, W, Q, P = _state(reduced(z))
        xn, ym = rpow(x, n), rpow(y, m)
        return FlowState(
            x * xn * ym * U,
            xn * y * ym * V,
            xn * ym * W,
            rpow(x, -2 * n) * rpow(y, -2 * m) * Q,
            P,
        )

    return field


def closed_form_field(params):
    return physical_field_3d(params, lambda z: reconstruct_3d(params, z))


def streamlines_3d_parametric(gamma, a1, a2, a3, t, b=0.0):
    """Streamlines of the gamma != 3, c4 = 0 closed form.

    ``x = a1 e^t, y = a2 e^t, z + b = a3 e^(-t (gamma-3)/(gamma+1))``.
    """
    if gamma == -1:
        raise DomainError("gamma = -1")
    t = np.asarray(t, dtype=float)
    e = np.exp(t)
    return np.column_stack([a1 * e, a2 * e, a3 * np.exp(-t * (gamma - 3) / (gamma + 1)) - b])


def streamlines_3d_printed(gamma, a1, a2, a3, t):
    """Streamlines with the opposite exponent sign and no offset (regression only)."""
    t = np.asarray(t, dtype=float)
    e = np.exp(t)
    return np.column_stack([a1 * e, a2 * e, a3 * np.exp(t * (gamma - 3) / (gamma + 1))])


def reduced_rhs(params, literal_e5=False):
    return lambda z, y: rhs_3d(params, y, z, literal_e5=literal_e5)
