"""Explicit Runge-Kutta integration with invariant monitoring.

Fixed-step classic RK4, or adaptive RK4 with step-doubling error control.
Singular right-hand sides end the integration with a labelled reason
instead of an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .core import DomainError, SingularityError

REACHED_END = "reached_end"
SINGULARITY = "singularity"
NON_FINITE = "non_finite"
STEP_UNDERFLOW = "step_underflow"
DOMAIN_EXIT = "domain_exit"


@dataclass
class InvariantMonitor:
    """Tracks the maximum relative drift of labelled scalar invariants.

    ``functions`` maps a label to ``f(t, y)``. Drift is measured against the
    value at the first sample, relative to ``max(|f0|, floor)``.
    """

    functions: dict
    floor: float = 1e-300
    reference: dict = field(default_factory=dict)
    drift: dict = field(default_factory=dict)

    def reset(self):
        self.reference.clear()
        self.drift.clear()

    def observe(self, t, y):
        for label, f in self.functions.items():
            value = f(t, y)
            if label not in self.reference:
                self.reference[label] = value
                self.drift[label] = 0.0
                continue
            ref = self.reference[label]
            d = abs(value - ref) / max(abs(ref), self.floor)
            if d > self.drift[label]:
                self.drift[label] = d

    @property
    def max_drift(self):
        return max(self.drift.values(), default=0.0)


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    reason: str
    dy: Optional[np.ndarray] = None
    monitor: Optional[InvariantMonitor] = None
    message: str = ""

    @property
    def end(self):
        return self.t[-1], self.y[-1]

    def interpolant(self):
        """Piecewise cubic Hermite interpolant through the stored states."""
        if self.dy is None:
            raise ValueError("trajectory has no stored derivatives")
        t, y, dy = self.t, self.y, self.dy
        if t[0] > t[-1]:
            t, y, dy = t[::-1], y[::-1], dy[::-1]
        return CubicHermiteSpline(t, y, dy, axis=0)


def rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


class _Stop(Exception):
    def __init__(self, reason, message=""):
        super().__init__(message)
        self.reason = reason
        self.message = message


def _guard(rhs):
    def wrapped(t, y):
        try:
            d = np.asarray(rhs(t, y), dtype=float)
        except SingularityError as exc:
            raise _Stop(SINGULARITY, str(exc)) from exc
        except (DomainError, ZeroDivisionError) as exc:
            raise _Stop(DOMAIN_EXIT, str(exc)) from exc
        if not np.all(np.isfinite(d)):
            raise _Stop(NON_FINITE, "right-hand side is not finite")
        return d

    return wrapped


def _checked_step(rhs, t, y, h):
    y1 = rk4_step(rhs, t, y, h)
    if not np.all(np.isfinite(y1)):
        raise _Stop(NON_FINITE, "state is not finite")
    return y1


def integrate(rhs: Callable, y0, span, step=1e-3, adaptive=False, rtol=1e-10,
              atol=1e-12, monitor: Optional[InvariantMonitor] = None,
              stop: Optional[Callable] = None, max_steps=1_000_000):
    """Integrate ``y' = rhs(t, y)`` over ``span = (t0, t1)``.

    ``step`` is the fixed step, or the initial step in adaptive mode. A
    failing step is retried with halved steps so the trajectory ends as close
    as possible to a singular point. ``stop(t, y)`` may return a reason string
    to end the integration early; that state is kept.
    """
    t0, t1 = (float(s) for s in span)
    if t0 == t1:
        raise ValueError("integration span is degenerate")
    direction = 1.0 if t1 > t0 else -1.0
    length = abs(t1 - t0)
    h = min(abs(step), length) * direction
    h_min = 1e-14 * length
    f = _guard(rhs)

    y = np.array(y0, dtype=float)
    ts, ys, dys = [t0], [y.copy()], []
    if monitor is not None:
        monitor.reset()
        monitor.observe(t0, y)
    t = t0
    reason, message = REACHED_END, ""
    try:
        dys.append(f(t, y))
        if stop is not None:
            r = stop(t, y)
            if r:
                reason = r
                raise _Stop(r)
        for _ in range(max_steps):
            remaining = t1 - t
            if abs(remaining) <= 1e-15 * length:
                break
            if abs(h) > abs(remaining):
                h = remaining
            try:
                if adaptive:
                    y_new, h_used, h_next = _adaptive_step(f, t, y, h, rtol, atol, h_min)
                else:
                    y_new, h_used, h_next = _checked_step(f, t, y, h), h, h
            except _Stop as exc:
                y_new, h_used = _bisect_failure(f, t, y, h, h_min, adaptive, exc)
                if y_new is None:
                    reason, message = exc.reason, exc.message
                    break
                h_next = h_used
                t_new = t + h_used
                d_new = f(t_new, y_new)
                t, y = t_new, y_new
                ts.append(t); ys.append(y.copy()); dys.append(d_new)
                if monitor is not None:
                    monitor.observe(t, y)
                reason, message = exc.reason, exc.message
                break
            t_new = t + h_used
            if abs(t1 - t_new) <= 1e-15 * length:
                t_new = t1
            d_new = f(t_new, y_new)
            t, y = t_new, y_new
            ts.append(t); ys.append(y.copy()); dys.append(d_new)
            if monitor is not None:
                monitor.observe(t, y)
            if stop is not None:
                r = stop(t, y)
                if r:
                    reason = r
                    break
            h = h_next
        else:
            reason = STEP_UNDERFLOW
            message = "maximum number of steps reached"
    except _Stop as exc:
        reason, message = exc.reason, exc.message
    except _StepUnderflow as exc:
        reason, message = STEP_UNDERFLOW, str(exc)

    dy = np.array(dys) if len(dys) == len(ts) else None
    return Trajectory(np.array(ts), np.array(ys), reason, dy, monitor, message)


class _StepUnderflow(Exception):
    pass


def _adaptive_step(f, t, y, h, rtol, atol, h_min):
    while True:
        if abs(h) < h_min:
            raise _StepUnderflow(f"step fell below {h_min:g} at t = {t:g}")
        y_full = _checked_step(f, t, y, h)
        y_half = _checked_step(f, t, y, h / 2)
        y_two = _checked_step(f, t + h / 2, y_half, h / 2)
        err = np.abs(y_two - y_full) / 15.0
        tol = rtol * np.maximum(np.abs(y_two), np.abs(y)) + atol
        ratio = float(np.max(err / tol))
        if ratio <= 1.0:
            grow = 2.0 if ratio == 0 else min(2.0, 0.9 * ratio ** (-0.2))
            # local extrapolation
            return y_two + (y_two - y_full) / 15.0, h, h * max(1.0, grow)
        h = h / 2


def _bisect_failure(f, t, y, h, h_min, adaptive, first_exc):
    """Largest halved step that still succeeds, or (None, None)."""
    trial = h / 2
    while abs(trial) >= max(h_min, 1e-9 * abs(h)):
        try:
            return _checked_step(f, t, y, trial), trial
        except _Stop:
            trial = trial / 2
    return None, None


@dataclass
class DenseSolution:
    """Fixed-step RK4 solution evaluated anywhere in its range.

    A value between nodes is one RK4 step from the node below it. Unlike a
    spline, that is accurate to the integrator's own order and smooth enough
    for finite differences of the result.
    """

    rhs: Callable
    t: np.ndarray
    y: np.ndarray
    reason: str

    @property
    def span(self):
        return float(self.t[0]), float(self.t[-1])

    def __call__(self, s):
        s = float(s)
        lo, hi = self.span
        if not lo <= s <= hi:
            raise DomainError(f"{s} lies outside the integrated range [{lo}, {hi}]")
        i = int(np.searchsorted(self.t, s, side="right")) - 1
        i = min(max(i, 0), len(self.t) - 1)
        ds = s - self.t[i]
        if ds == 0:
            return self.y[i].copy()
        return rk4_step(self.rhs, self.t[i], self.y[i], ds)


def dense_solution(rhs: Callable, t0, y0, lo, hi, step=1e-3):
    """Integrate from ``t0`` both ways to cover ``[lo, hi]`` at fixed step.

    If either direction stops early the covered range shrinks accordingly;
    evaluation outside it raises DomainError.
    """
    if not lo <= t0 <= hi:
        raise DomainError("t0 must lie in [lo, hi]")
    parts_t, parts_y, reasons = [], [], []
    if t0 > lo:
        back = integrate(rhs, y0, (t0, lo), step=step)
        parts_t.append(back.t[::-1][:-1])
        parts_y.append(back.y[::-1][:-1])
        reasons.append(back.reason)
    if hi > t0:
        fwd = integrate(rhs, y0, (t0, hi), step=step)
        parts_t.append(fwd.t)
        parts_y.append(fwd.y)
        reasons.append(fwd.reason)
    else:
        parts_t.append(np.array([t0]))
        parts_y.append(np.array([y0], dtype=float))
    reason = next((r for r in reasons if r != REACHED_END), REACHED_END)
    return DenseSolution(rhs, np.concatenate(parts_t), np.concatenate(parts_y), reason)
