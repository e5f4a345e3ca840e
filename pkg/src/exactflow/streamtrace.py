"""Numerical streamlines of field samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DomainError, FlowState, StagnationError
from .odeint import DOMAIN_EXIT, integrate

STAGNATION = "stagnation"
STAGNATION_SPEED = 1e-12


@dataclass(frozen=True)
class StreamCurve:
    """Points of a traced streamline.

    ``points`` has shape (N, 3) for 3D fields and (N, 2) for axisymmetric
    ``(z, r)`` fields. ``parameter`` is arclength when traced normalized,
    pseudo-time otherwise.
    """

    parameter: np.ndarray
    points: np.ndarray
    reason: str
    message: str = ""

    def __len__(self):
        return len(self.parameter)


def _velocity(field, pt):
    s = field(*pt)
    if not isinstance(s, FlowState):
        s = FlowState(*s)
    vel = s.velocity
    return np.array(vel[: len(pt)], dtype=float)


def trace(field: Callable, seed, span=(0.0, 1.0), step=1e-3, normalize=True,
          adaptive=False, rtol=1e-10, atol=1e-12):
    """Integrate dX/dt = velocity(X) from ``seed``.

    A 3-component seed traces (u, v, w) in (x, y, z); a 2-component seed
    traces (u, v) in the (z, r) plane of an axisymmetric field. With
    ``normalize`` the unit tangent is integrated, so the parameter is
    arclength. Tracing stops at stagnation or where the field is undefined.
    """
    seed = np.asarray(seed, dtype=float)
    if seed.shape not in ((2,), (3,)):
        raise DomainError("seed must have 2 or 3 coordinates")
    v0 = _velocity(field, seed)
    if np.linalg.norm(v0) < STAGNATION_SPEED:
        raise StagnationError(f"seed {tuple(seed)} is a stagnation point")

    def rhs(t, y):
        v = _velocity(field, y)
        speed = math.sqrt(float(v @ v))
        if speed < STAGNATION_SPEED:
            raise StagnationError("stagnation point reached")
        return v / speed if normalize else v

    traj = integrate(rhs, seed, span, step=step, adaptive=adaptive, rtol=rtol, atol=atol)
    reason = traj.reason
    if reason == DOMAIN_EXIT and "stagnation" in traj.message:
        reason = STAGNATION
    return StreamCurve(traj.t, traj.y, reason, traj.message)


def align_by_coordinate(curve_points, reference: Callable, axis=0):
    """Largest distance from traced points to ``reference(coordinate)``.

    ``reference`` maps the value of coordinate ``axis`` to the full point of
    the reference curve. This removes the parameterization difference
    between a traced curve and a closed-form one.
    """
    pts = np.asarray(curve_points, dtype=float)
    return max(float(np.linalg.norm(p - np.asarray(reference(p[axis]), dtype=float))) for p in pts)
