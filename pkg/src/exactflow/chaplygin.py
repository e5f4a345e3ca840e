"""Sonic potential flows of a Chaplygin gas.

The velocity potential satisfies the quasilinear equation

    (phi_y^2 + phi_z^2) phi_xx + (phi_x^2 + phi_z^2) phi_yy + (phi_x^2 + phi_y^2) phi_zz
        - 2 (phi_x phi_y phi_xy + phi_x phi_z phi_xz + phi_y phi_z phi_yz) = 0,

and every relation ``a(phi) x + b(phi) y + c(phi) z + d(phi) = 0`` defines a
solution implicitly. Level sets of ``phi`` are the planes of that relation.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath

from .core import (
    DomainError,
    FlowState,
    GasLaw,
    SingularityError,
    StagnationError,
    StencilError,
    BracketError,
)
from .roots import bisect_secant

DEFAULT_H = 1e-4
MP_DPS = 40

# mpmath's global context is shared state; each thread gets its own.
_local = threading.local()


def _mp_context():
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = MP_DPS
        _local.ctx = ctx
    return ctx


@dataclass(frozen=True)
class Poly:
    """Polynomial in one variable; ``coeffs`` in ascending order."""

    coeffs: tuple

    def __init__(self, coeffs):
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            coeffs = (0.0,)
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, t):
        acc = 0.0 * t
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def deriv(self):
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:] or [0.0])


@dataclass(frozen=True)
class ChaplyginFamily:
    """Coefficient functions of the implicit solution ``a x + b y + c z + d = 0``.

    Derivatives are optional; missing ones are replaced by central
    differences in phi.
    """

    coeff_a: Callable
    coeff_b: Callable
    coeff_c: Callable
    coeff_d: Callable
    deriv_a: Optional[Callable] = None
    deriv_b: Optional[Callable] = None
    deriv_c: Optional[Callable] = None
    deriv_d: Optional[Callable] = None

    @classmethod
    def from_polynomials(cls, a, b, c, d):
        polys = [Poly(p) for p in (a, b, c, d)]
        return cls(*polys, *[p.deriv() for p in polys])

    def coefficients(self, phi):
        vals = (self.coeff_a(phi), self.coeff_b(phi), self.coeff_c(phi), self.coeff_d(phi))
        for v in vals:
            if not _finite(v):
                raise DomainError(f"non-finite coefficient at phi={phi}")
        if vals[0] == 0 and vals[1] == 0 and vals[2] == 0:
            raise DomainError(f"(a, b, c) vanish together at phi={phi}")
        return vals

    def derivatives(self, phi):
        out = []
        for f, df in ((self.coeff_a, self.deriv_a), (self.coeff_b, self.deriv_b),
                      (self.coeff_c, self.deriv_c), (self.coeff_d, self.deriv_d)):
            if df is not None:
                out.append(df(phi))
            else:
                step = 1e-6 * (1 + abs(phi))
                out.append((f(phi + step) - f(phi - step)) / (2 * step))
        return tuple(out)

    def relation(self, phi, x, y, z):
        a, b, c, d = self.coefficients(phi)
        return a * x + b * y + c * z + d

    def relation_dphi(self, phi, x, y, z):
        da, db, dc, dd = self.derivatives(phi)
        return da * x + db * y + dc * z + dd


def _finite(value):
    try:
        return math.isfinite(value)
    except (TypeError, OverflowError):
        return False


def _is_mp(value):
    return isinstance(value, mpmath.ctx_mp_python._mpf)


def solve_potential_implicit(family, pt, bracket, tol=1e-12):
    """The potential at ``pt`` defined by the implicit family, searched in ``bracket``.

    When several characteristic planes pass through the point, the caller's
    bracket decides which one is returned.
    """
    x, y, z = pt
    lo, hi = bracket
    if _is_mp(x):
        ctx = x.context
        lo, hi = ctx.mpf(lo), ctx.mpf(hi)
        tol = ctx.mpf(10) ** (-(ctx.dps - 6))
    return bisect_secant(lambda t: family.relation(t, x, y, z), lo, hi, tol=tol)


@dataclass(frozen=True)
class RationalPotential:
    """phi = f((k1 x + k2 y + k3 z + k4) / (n1 x + n2 y + n3 z + n4))."""

    k: tuple
    n: tuple
    f: Callable = lambda s: s
    df: Optional[Callable] = None

    def __post_init__(self):
        if len(self.k) != 4 or len(self.n) != 4:
            raise DomainError("k and n need four constants each")
        if all(c == 0 for c in self.n):
            raise DomainError("the denominator constants cannot all vanish")

    def ratio(self, x, y, z):
        k, n = self.k, self.n
        den = n[0] * x + n[1] * y + n[2] * z + n[3]
        if den == 0:
            raise SingularityError("rational potential denominator vanishes")
        return (k[0] * x + k[1] * y + k[2] * z + k[3]) / den, den

    def gradient(self, x, y, z):
        if self.df is None:
            raise DomainError("no analytic derivative of f supplied")
        s, den = self.ratio(x, y, z)
        fp = self.df(s)
        return tuple(fp * (self.k[i] - s * self.n[i]) / den for i in range(3))


def rational_potential_value(rp, pt):
    s, _ = rp.ratio(*pt)
    return rp.f(s)


@dataclass(frozen=True)
class PotentialSampler:
    """A potential ``(x, y, z) -> phi`` with an optional exact gradient.

    ``mp_safe`` marks functions built from plain arithmetic, which can be
    evaluated on mpmath numbers for extended-precision second differences.
    """

    func: Callable
    grad: Optional[Callable] = None
    mp_safe: bool = False
    name: str = field(default="potential", compare=False)

    @property
    def analytic_gradient(self):
        return self.grad is not None

    def __call__(self, x, y, z):
        return self.func(x, y, z)


def implicit_sampler(family, bracket, tol=1e-12):
    def func(x, y, z):
        return solve_potential_implicit(family, (x, y, z), bracket, tol=tol)

    def grad(x, y, z):
        phi = func(x, y, z)
        a, b, c, _ = family.coefficients(phi)
        gp = family.relation_dphi(phi, x, y, z)
        if gp == 0:
            raise SingularityError("d/dphi of the implicit relation vanishes")
        return (-a / gp, -b / gp, -c / gp)

    return PotentialSampler(func, grad, mp_safe=True, name="chaplygin-implicit")


def rational_sampler(rp, mp_safe=True):
    def func(x, y, z):
        return rational_potential_value(rp, (x, y, z))

    grad = None if rp.df is None else rp.gradient
    return PotentialSampler(func, grad, mp_safe=mp_safe, name="chaplygin-rational")


def _eval(sampler, x, y, z):
    try:
        value = sampler(x, y, z)
    except (DomainError, BracketError, ZeroDivisionError, ValueError) as exc:
        raise StencilError(f"potential undefined at ({x}, {y}, {z}): {exc}") from exc
    if not _finite(value):
        raise StencilError(f"potential not finite at ({x}, {y}, {z})")
    return value


def gradient(sampler, pt, h=DEFAULT_H):
    """Velocity = grad(phi); exact if the sampler has one, else central differences."""
    x, y, z = (float(c) for c in pt)
    if sampler.analytic_gradient:
        try:
            return tuple(float(g) for g in sampler.grad(x, y, z))
        except (DomainError, BracketError, ZeroDivisionError) as exc:
            raise StencilError(str(exc)) from exc
    if not h > 0:
        raise DomainError("stencil spacing must be positive")
    base = (x, y, z)
    out = []
    for i in range(3):
        p = list(base)
        m = list(base)
        p[i] += h
        m[i] -= h
        # actual (rounded) spacing
        out.append((_eval(sampler, *p) - _eval(sampler, *m)) / (p[i] - m[i]))
    return tuple(out)


def chaplygin_state(grad_phi, law):
    """Flow state of a sonic Chaplygin flow with velocity ``grad_phi``.

    The sonic condition ``|grad phi|^2 = a / rho^2`` fixes the density.
    """
    if law.kind != "chaplygin":
        raise DomainError("chaplygin_state needs a Chaplygin gas law")
    u, v, w = (float(c) for c in grad_phi)
    speed = math.sqrt(u * u + v * v + w * w)
    if speed == 0:
        raise StagnationError("density is undefined at a stagnation point of a sonic flow")
    rho = math.sqrt(law.a) / speed
    return FlowState(u, v, w, rho, -law.a / rho + law.b)


def chaplygin_field(sampler, law, h=DEFAULT_H):
    """Field sampler ``(x, y, z) -> FlowState`` for a potential."""

    def field_(x, y, z):
        return chaplygin_state(gradient(sampler, (x, y, z), h), law)

    return field_


def _second_differences(sampler, pt, h, use_mp):
    if use_mp:
        ctx = _mp_context()
        x, y, z = (ctx.mpf(float(c)) for c in pt)
        d = _stencil(sampler, (x, y, z), ctx.mpf(h))
        return tuple(float(v) for v in d)
    x, y, z = (float(c) for c in pt)
    return _stencil(sampler, (x, y, z), h)


def _stencil(sampler, base, h):
    def at(dx=0, dy=0, dz=0):
        return _eval(sampler, base[0] + dx * h, base[1] + dy * h, base[2] + dz * h)

    f0 = at()
    fp = [at(*e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    fm = [at(*e) for e in ((-1, 0, 0), (0, -1, 0), (0, 0, -1))]
    first = [(fp[i] - fm[i]) / (2 * h) for i in range(3)]
    second = [(fp[i] - 2 * f0 + fm[i]) / (h * h) for i in range(3)]

    def cross(i, j):
        e = [0, 0, 0]

        def shifted(si, sj):
            e2 = list(e)
            e2[i], e2[j] = si, sj
            return at(*e2)

        return (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * h * h)

    mixed = [cross(0, 1), cross(0, 2), cross(1, 2)]
    return (*first, *second, *mixed)


def potential_terms(sampler, pt, h=DEFAULT_H, extended=None):
    """The six constituent terms of the potential equation at ``pt``."""
    if not h > 0:
        raise DomainError("stencil spacing must be positive")
    if extended is None:
        extended = sampler.mp_safe
    px, py, pz, pxx, pyy, pzz, pxy, pxz, pyz = _second_differences(sampler, pt, h, extended)
    if px == 0 and py == 0 and pz == 0:
        raise StagnationError("potential equation degenerates where grad(phi) = 0")
    return (
        (py * py + pz * pz) * pxx,
        (px * px + pz * pz) * pyy,
        (px * px + py * py) * pzz,
        -2 * px * py * pxy,
        -2 * px * pz * pxz,
        -2 * py * pz * pyz,
    )


def potential_residual(sampler, pt, h=DEFAULT_H, normalized=False, extended=None):
    """Signed residual of the potential equation by central differences.

    With ``normalized`` the residual is divided by the largest constituent
    term. ``extended`` evaluates the stencil in 40-digit arithmetic; it
    defaults to ``sampler.mp_safe`` because second differences at h = 1e-4
    lose about eight digits to cancellation in double precision.
    """
    terms = potential_terms(sampler, pt, h, extended)
    res = math.fsum(terms)
    if not normalized:
        return res
    scale = max(abs(t) for t in terms)
    return 0.0 if scale == 0 else res / scale


def characteristic_residual(phi, cap_phi, pt, h=DEFAULT_H):
    """Sum of squared 2x2 minors of (grad phi, grad Phi); zero iff parallel."""
    gx, gy, gz = gradient(phi, pt, h)
    cx, cy, cz = gradient(cap_phi, pt, h)
    return (gx * cy - gy * cx) ** 2 + (gx * cz - gz * cx) ** 2 + (gy * cz - gz * cy) ** 2


def polynomial_family(a: Sequence[float], b: Sequence[float], c: Sequence[float], d: Sequence[float]):
    """Shorthand for :meth:`ChaplyginFamily.from_polynomials`."""
    return ChaplyginFamily.from_polynomials(a, b, c, d)
