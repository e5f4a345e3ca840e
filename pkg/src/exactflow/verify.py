"""Finite-difference substitution of field samplers into the Euler equations."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    DomainError,
    FlowState,
    GasLaw,
    StencilError,
    bernoulli_invariant,
    entropy_invariant,
    sound_speed_squared,
)

EQUATIONS_3D = ("continuity", "momentum_x", "momentum_y", "momentum_z", "energy")
EQUATIONS_AXISYM = ("continuity", "momentum_z", "momentum_r", "energy")
DEFAULT_HS = (1e-2, 1e-3, 1e-4)
SATURATION_FLOOR = 1e2 * np.finfo(float).eps


@dataclass(frozen=True)
class ResidualReport:
    """Residuals of one equation system at one point.

    ``normalized[i]`` is ``magnitudes[i]`` divided by the largest constituent
    term of equation i (0 when all terms vanish).
    """

    names: tuple
    residuals: np.ndarray
    magnitudes: np.ndarray
    normalized: np.ndarray
    h: float
    point: tuple

    def __post_init__(self):
        if not np.all(np.isfinite(self.magnitudes)):
            raise StencilError("non-finite residual")

    @property
    def max(self):
        return float(np.max(self.magnitudes))

    @property
    def max_normalized(self):
        return float(np.max(self.normalized))

    def as_dict(self):
        return {
            "point": list(self.point),
            "h": self.h,
            "residuals": dict(zip(self.names, map(float, self.residuals))),
            "normalized": dict(zip(self.names, map(float, self.normalized))),
        }


def _report(names, term_lists, h, pt):
    res, mags, norm = [], [], []
    for terms in term_lists:
        r = math.fsum(terms)
        scale = max(abs(t) for t in terms)
        res.append(r)
        mags.append(abs(r))
        norm.append(0.0 if scale == 0 else abs(r) / scale)
    return ResidualReport(tuple(names), np.array(res), np.array(mags), np.array(norm),
                          float(h), tuple(float(c) for c in pt))


def _sample(field, coords):
    try:
        s = field(*coords)
    except (DomainError, ZeroDivisionError) as exc:
        raise StencilError(f"field undefined at {tuple(coords)}: {exc}") from exc
    if not isinstance(s, FlowState):
        s = FlowState(*s)
    return s


def _stencil(field, pt, h):
    """Centre state and central first differences of (u, v, w, rho, p)."""
    if not h > 0:
        raise DomainError("stencil spacing must be positive")
    pt = [float(c) for c in pt]
    centre = np.array(_sample(field, pt).as_tuple())
    grads = []
    for i in range(len(pt)):
        p, m = list(pt), list(pt)
        p[i] += h
        m[i] -= h
        fp = np.array(_sample(field, p).as_tuple())
        fm = np.array(_sample(field, m).as_tuple())
        grads.append((fp - fm) / (p[i] - m[i]))
    # grads[i][k]: d(quantity k)/d(coordinate i)
    return centre, np.array(grads)


def _energy_factor(gamma, law, state_vec):
    if law is None or law.kind == "polytropic":
        g = gamma if law is None else law.gamma
        return g * state_vec[4]
    state = FlowState(*state_vec)
    return state.rho * sound_speed_squared(law, state)


def euler_residual_3d(field: Callable, pt, h=1e-3, gamma=1.4, law: Optional[GasLaw] = None):
    """Stationary Euler residuals of ``field(x, y, z) -> FlowState`` at ``pt``.

    The energy equation is ``u . grad p + rho c^2 div u = 0``; with no ``law``
    the gas is polytropic with index ``gamma`` (rho c^2 = gamma p).
    """
    (u, v, w, rho, p), g = _stencil(field, pt, h)
    vel = (u, v, w)
    div = g[0][0] + g[1][1] + g[2][2]
    k = _energy_factor(gamma, law, (u, v, w, rho, p))
    terms = [
        [u * g[0][3], v * g[1][3], w * g[2][3], rho * g[0][0], rho * g[1][1], rho * g[2][2]],
    ]
    for comp in range(3):
        terms.append([rho * vel[i] * g[i][comp] for i in range(3)] + [g[comp][4]])
    terms.append([u * g[0][4], v * g[1][4], w * g[2][4], k * g[0][0], k * g[1][1], k * g[2][2]])
    return _report(EQUATIONS_3D, terms, h, pt)


def euler_residual_axisym(field: Callable, pt, h=1e-3, gamma=1.4, law: Optional[GasLaw] = None):
    """Residuals of the axisymmetric system at ``pt = (z, r)``.

    ``field(z, r)`` returns a FlowState with u axial, v radial (w ignored).
    """
    z, r = (float(c) for c in pt)
    if not r > h:
        raise StencilError("the stencil would touch the axis (need r > h)")
    (u, v, _, rho, p), g = _stencil(field, (z, r), h)
    gz, gr = g
    k = _energy_factor(gamma, law, (u, v, 0.0, rho, p))
    terms = [
        [u * gz[3], v * gr[3], rho * gz[0], rho * gr[1], rho * v / r],
        [rho * u * gz[0], rho * v * gr[0], gz[4]],
        [rho * u * gz[1], rho * v * gr[1], gr[4]],
        [u * gz[4], v * gr[4], k * gz[0], k * gr[1], k * v / r],
    ]
    return _report(EQUATIONS_AXISYM, terms, h, (z, r))


@dataclass(frozen=True)
class ConvergenceResult:
    """Observed order of a residual sequence.

    ``saturated`` means fewer than two residuals were above the round-off
    floor, so no slope is reported (``order`` is None).
    """

    order: Optional[float]
    saturated: bool
    hs: tuple
    residuals: tuple

    def within(self, lo=1.8, hi=2.2, allow_saturated=True):
        if self.saturated:
            return allow_saturated
        return lo <= self.order <= hi


def _scalar(value):
    if isinstance(value, ResidualReport):
        return value.max_normalized
    return abs(float(value))


def convergence_order(evaluator: Callable, pt, hs: Sequence[float] = DEFAULT_HS,
                      floor=SATURATION_FLOOR):
    """Least-squares slope of log|residual| against log h.

    ``evaluator(pt, h)`` returns a number or a :class:`ResidualReport` (its
    largest normalized residual is used). Residuals at or below ``floor``
    carry no truncation information and are left out of the fit.
    """
    hs = tuple(float(h) for h in hs)
    if len(hs) < 3:
        raise DomainError("need at least three spacings")
    ratios = [hs[i + 1] / hs[i] for i in range(len(hs) - 1)]
    if not all(math.isclose(q, ratios[0], rel_tol=1e-9) for q in ratios) or ratios[0] in (0.0, 1.0):
        raise DomainError("spacings must form a geometric sequence")
    vals = tuple(_scalar(evaluator(pt, h)) for h in hs)
    keep = [(h, v) for h, v in zip(hs, vals) if v > floor]
    if len(keep) < 2:
        return ConvergenceResult(None, True, hs, vals)
    x = np.log([h for h, _ in keep])
    y = np.log([v for _, v in keep])
    slope = float(np.polyfit(x, y, 1)[0])
    return ConvergenceResult(slope, False, hs, vals)


def invariants_along_curve(field: Callable, curve, gamma):
    """Max relative deviation of (p/rho^gamma, Bernoulli) from their means on the curve."""
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise DomainError("curve must be a non-empty (N, dim) array")
    i1, i2 = [], []
    for pt in pts:
        s = field(*pt)
        i1.append(entropy_invariant(gamma, s))
        i2.append(bernoulli_invariant(gamma, s))

    def drift(vals):
        vals = np.array(vals)
        mean = float(np.mean(vals))
        dev = float(np.max(np.abs(vals - mean)))
        if mean == 0:
            return dev
        return dev / abs(mean)

    return drift(i1), drift(i2)


def perturb_pressure(field: Callable, eps=0.1, axis=0):
    """Negative control: multiply p by ``1 + eps * coordinate[axis]``."""

    def perturbed(*coords):
        s = field(*coords)
        return replace(s, p=s.p * (1 + eps * coords[axis]))

    return perturbed
