"""Bracketed scalar root finding.

The solver only uses arithmetic and comparisons, so it runs unchanged on
floats and on ``mpmath.mpf`` values (used for extended-precision stencils).
"""

from __future__ import annotations

import math

from .core import BracketError, DomainError


def _finite(value):
    try:
        return math.isfinite(value)
    except (TypeError, OverflowError):
        return False


def bisect_secant(f, lo, hi, tol=1e-12, maxiter=200):
    """Root of ``f`` on ``[lo, hi]`` by a safeguarded secant/bisection hybrid.

    Every iterate stays inside the current sign-change bracket. A secant
    (regula falsi with Illinois damping) proposal is used when it falls inside
    the bracket, otherwise the midpoint. Iteration stops when
    ``|f(x)| <= tol * (1 + |slope| * |hi - lo|)`` with ``slope`` the bracket
    secant slope, when the bracket stops shrinking, or when ``f(x) == 0``.

    Deterministic for a fixed bracket.
    """
    if not lo < hi:
        lo, hi = hi, lo
    flo, fhi = f(lo), f(hi)
    if not (_finite(flo) and _finite(fhi)):
        raise DomainError("function is not finite at the bracket ends")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f = {flo}, {fhi}")

    width0 = hi - lo
    scale = 1 + abs((fhi - flo) / width0) * width0
    best_x, best_f = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
    side = 0
    for _ in range(maxiter):
        x = hi - fhi * (hi - lo) / (fhi - flo)
        mid = lo + (hi - lo) / 2
        if not (lo < x < hi):
            x = mid
        fx = f(x)
        if not _finite(fx):
            raise DomainError(f"function is not finite at {x}")
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
        if fx == 0 or abs(fx) <= tol * scale:
            return x
        old_width = hi - lo
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
            if side == -1:
                fhi = fhi / 2
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo = flo / 2
            side = 1
        if hi - lo >= old_width:
            break
        # a stalled secant still bisects next round
        if hi - lo > 0.5 * old_width:
            m = lo + (hi - lo) / 2
            fm = f(m)
            if not _finite(fm):
                raise DomainError(f"function is not finite at {m}")
            if abs(fm) < abs(best_f):
                best_x, best_f = m, fm
            if fm == 0 or abs(fm) <= tol * scale:
                return m
            if (fm > 0) == (flo > 0):
                lo, flo = m, fm
            else:
                hi, fhi = m, fm
            side = 0
        if not lo < hi:
            break
    return best_x


def scan_bracket(f, points):
    """First adjacent pair in ``points`` where ``f`` changes sign.

    Points where ``f`` raises DomainError are skipped.
    """
    prev = None
    for x in points:
        try:
            fx = f(x)
        except DomainError:
            prev = None
            continue
        if not _finite(fx):
            prev = None
            continue
        if fx == 0:
            return x, x
        if prev is not None and (prev[1] > 0) != (fx > 0):
            return prev[0], x
        prev = (x, fx)
    raise BracketError("no sign change found on the scan grid")
