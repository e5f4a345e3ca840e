"""Run configuration: JSON document -> validated families, grids and tolerances."""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import axisym, chaplygin, threed
from .core import BracketError, DomainError, ExactFlowError, GasLaw
from .odeint import dense_solution
from .verify import perturb_pressure

FAMILIES = ("chaplygin-implicit", "chaplygin-rational", "axisym-pz", "axisym-pr", "threed")


class ConfigError(ExactFlowError, ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class Grid:
    bounds: tuple
    resolution: tuple

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def spacing(self):
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.bounds, self.resolution))

    @property
    def origin(self):
        return tuple(lo for lo, _ in self.bounds)

    def axis(self, i):
        lo, hi = self.bounds[i]
        return np.linspace(lo, hi, self.resolution[i])

    def points(self):
        """Grid points with the first coordinate fastest and the last slowest."""
        axes = [self.axis(i) for i in range(self.dim)]
        return [tuple(float(c) for c in reversed(p)) for p in itertools.product(*reversed(axes))]


@dataclass(frozen=True)
class VerifySpec:
    hs: tuple = (1e-2, 1e-3, 1e-4)
    slope_range: tuple = (1.8, 2.2)
    max_points: int = 8
    integral_drift_tol: float = 1e-8
    track_tol: float = 1e-8
    streamline_tol: float = 1e-6
    sonic_tol: float = 1e-12
    seeds: int = 2
    trace_length: float = 0.5


@dataclass(frozen=True)
class TraceSpec:
    span: tuple = (0.0, 1.0)
    step: float = 1e-3
    normalize: bool = True


@dataclass
class Family:
    """A configured solution family with everything the commands need."""

    name: str
    coord_names: tuple
    field: Callable
    law: GasLaw
    params: object = None
    sampler: Optional[chaplygin.PotentialSampler] = None
    reduced_axis: Optional[int] = None
    reduced: Optional[Callable] = None
    closed_form: Optional[Callable] = None
    rhs_factory: Optional[Callable] = None
    first_integrals: Optional[Callable] = None
    streamline_error: Optional[Callable] = None

    @property
    def dim(self):
        return len(self.coord_names)

    @property
    def gamma(self):
        return self.law.gamma

    @property
    def is_potential(self):
        return self.sampler is not None


@dataclass
class RunConfig:
    family: str
    params: dict
    grid: Grid
    verify: VerifySpec = field(default_factory=VerifySpec)
    trace: TraceSpec = field(default_factory=TraceSpec)
    seeds: list = field(default_factory=list)
    negative_control: bool = False
    document: dict = field(default_factory=dict)

    @property
    def sha256(self):
        canon = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _num(d, key, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing parameter {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"parameter {key!r} must be a finite number")
    return float(v)


def _coeffs(v, what):
    if not isinstance(v, list) or not v or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c) for c in v):
        raise ConfigError(f"{what} must be a non-empty list of finite numbers")
    return [float(c) for c in v]


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


def parse_config(doc):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    fam = doc.get("family")
    if fam not in FAMILIES:
        raise ConfigError(f"family must be one of {list(FAMILIES)}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    dim = 2 if fam.startswith("axisym") else 3
    grid = _parse_grid(doc.get("grid"), dim)
    ver = doc.get("verify", {})
    if not isinstance(ver, dict):
        raise ConfigError("verify must be an object")
    vs = VerifySpec()
    hs = tuple(_coeffs(ver["hs"], "verify.hs")) if "hs" in ver else vs.hs
    if len(hs) < 3 or any(h <= 0 for h in hs):
        raise ConfigError("verify.hs needs at least three positive spacings")
    sr = tuple(_coeffs(ver["slope_range"], "verify.slope_range")) if "slope_range" in ver else vs.slope_range
    if len(sr) != 2 or sr[0] > sr[1]:
        raise ConfigError("verify.slope_range must be [lo, hi]")
    vs = VerifySpec(
        hs=hs,
        slope_range=sr,
        max_points=int(_num(ver, "max_points", vs.max_points)),
        integral_drift_tol=_num(ver, "integral_drift_tol", vs.integral_drift_tol),
        track_tol=_num(ver, "track_tol", vs.track_tol),
        streamline_tol=_num(ver, "streamline_tol", vs.streamline_tol),
        sonic_tol=_num(ver, "sonic_tol", vs.sonic_tol),
        seeds=int(_num(ver, "seeds", vs.seeds)),
        trace_length=_num(ver, "trace_length", vs.trace_length),
    )
    if vs.max_points < 1 or vs.seeds < 0 or vs.trace_length <= 0:
        raise ConfigError("verify.max_points >= 1, verify.seeds >= 0 and verify.trace_length > 0 required")
    tr = doc.get("trace", {})
    if not isinstance(tr, dict):
        raise ConfigError("trace must be an object")
    span = tuple(_coeffs(tr["span"], "trace.span")) if "span" in tr else (0.0, 1.0)
    if len(span) != 2 or span[0] == span[1]:
        raise ConfigError("trace.span must be two distinct numbers")
    ts = TraceSpec(span, _num(tr, "step", 1e-3), bool(tr.get("normalize", True)))
    if not ts.step > 0:
        raise ConfigError("trace.step must be positive")
    seeds = parse_seeds(doc.get("seeds", []), dim)
    neg = doc.get("negative_control", False)
    if not isinstance(neg, bool):
        raise ConfigError("negative_control must be true or false")
    return RunConfig(fam, params, grid, vs, ts, seeds, neg, doc)


def parse_seeds(seeds, dim):
    if not isinstance(seeds, list):
        raise ConfigError("seeds must be a list of points")
    out = []
    for s in seeds:
        pt = _coeffs(s, "seed")
        if len(pt) != dim:
            raise ConfigError(f"each seed needs {dim} coordinates")
        out.append(tuple(pt))
    return out


def _parse_grid(g, dim):
    if not isinstance(g, dict):
        raise ConfigError("grid must be an object with bounds and resolution")
    bounds = g.get("bounds")
    if not isinstance(bounds, list) or len(bounds) != dim:
        raise ConfigError(f"grid.bounds needs {dim} [lo, hi] pairs")
    bb = []
    for b in bounds:
        if not isinstance(b, list) or len(b) != 2:
            raise ConfigError("each grid bound must be [lo, hi]")
        lo, hi = _coeffs(b, "grid bound")
        if not lo < hi:
            raise ConfigError("each grid bound must be [lo, hi] with lo < hi")
        bb.append((lo, hi))
    res = g.get("resolution")
    if isinstance(res, int) and not isinstance(res, bool):
        res = [res] * dim
    if (not isinstance(res, list) or len(res) != dim
            or not all(isinstance(n, int) and not isinstance(n, bool) for n in res)):
        raise ConfigError(f"grid.resolution must be an integer or {dim} integers")
    if any(n < 2 for n in res):
        raise ConfigError("grid resolution must be at least 2 along every axis")
    return Grid(tuple(bb), tuple(res))


# families ------------------------------------------------------------------

def build_family(cfg: RunConfig, literal_e5=False) -> Family:
    """Construct the field of ``cfg`` (perturbed when it is a negative control)."""
    try:
        fam = _BUILDERS[cfg.family](cfg)
    except ConfigError:
        raise
    except (DomainError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid {cfg.family} parameters: {exc}") from exc
    if literal_e5:
        if cfg.family != "threed":
            raise ConfigError("--debug-literal-e5 applies to the threed family only")
        fam.rhs_factory = lambda: threed.reduced_rhs(fam.params, literal_e5=True)
    if cfg.negative_control:
        fam = _negative(fam)
    return fam


def _gas(params):
    g = params.get("gas", {"a": 1.0, "b": 0.0})
    if not isinstance(g, dict):
        raise ConfigError("gas must be an object with a and b")
    return GasLaw.chaplygin(_num(g, "a", 1.0), _num(g, "b", 0.0))


def _potential_family(cfg, sampler):
    law = _gas(cfg.params)
    return Family(cfg.family, ("x", "y", "z"), chaplygin.chaplygin_field(sampler, law), law,
                  sampler=sampler)


def _build_implicit(cfg):
    p = cfg.params
    co = p.get("coefficients")
    if not isinstance(co, dict):
        raise ConfigError("chaplygin-implicit needs coefficients {a, b, c, d} as polynomial lists")
    fam = chaplygin.polynomial_family(*(_coeffs(co.get(k), f"coefficients.{k}") for k in "abcd"))
    br = _coeffs(p.get("bracket"), "bracket")
    if len(br) != 2 or not br[0] < br[1]:
        raise ConfigError("bracket must be [lo, hi] with lo < hi")
    return _potential_family(cfg, chaplygin.implicit_sampler(fam, tuple(br)))


def _build_rational(cfg):
    p = cfg.params
    k = _coeffs(p.get("k"), "k")
    n = _coeffs(p.get("n"), "n")
    if "f" in p:
        f = chaplygin.Poly(_coeffs(p["f"], "f"))
        rp = chaplygin.RationalPotential(tuple(k), tuple(n), f, f.deriv())
    else:
        rp = chaplygin.RationalPotential(tuple(k), tuple(n), lambda s: s, lambda s: 1.0)
    return _potential_family(cfg, chaplygin.rational_sampler(rp))


def _initial(p):
    init = p.get("initial")
    if init is None:
        return None
    if not isinstance(init, dict):
        raise ConfigError("initial must be {s0, state}")
    return _num(init, "s0", required=True), _coeffs(init.get("state"), "initial.state")


def _reduced_solution(cfg, rhs, init, axis, size):
    lo, hi = cfg.grid.bounds[axis]
    margin = max(cfg.verify.hs) * 2
    lo, hi = min(lo - margin, init[0]), max(hi + margin, init[0])
    if len(init[1]) != size:
        raise ConfigError(f"initial.state needs {size} values")
    return dense_solution(rhs, init[0], np.array(init[1]), lo, hi, step=1e-3)


def _build_axisym(cfg):
    p = cfg.params
    branch = axisym.PZ if cfg.family == "axisym-pz" else axisym.PR
    params = axisym.AxisymParams(
        m=_num(p, "m", required=True), gamma=_num(p, "gamma", required=True),
        c1=_num(p, "c1", 1.0), c2=_num(p, "c2", -1.0), c3=_num(p, "c3", 0.0),
        a=_num(p, "a"), b=_num(p, "b", 0.0), branch=branch)
    axis = 1 if branch == axisym.PZ else 0
    init = _initial(p)
    closed = None
    if init is None:
        if params.c3 != 0:
            raise ConfigError("c3 != 0 has no closed form; supply initial {s0, state}")
        closed = lambda s: axisym.closed_form(params, s).as_array()
        try:
            closed(cfg.grid.bounds[axis][0])
        except BracketError as exc:
            raise ConfigError(f"no amplitude for these parameters: {exc}") from exc
        reduced = closed
    else:
        reduced = _reduced_solution(cfg, axisym.reduced_rhs(params), init, axis, 4)
    fld = axisym.physical_field_axisym(params, reduced)

    def stream_err(curve):
        cs = [axisym.streamline_constant(params, z, r, reduced) for z, r in curve]
        return float(np.ptp(cs) / max(abs(cs[0]), 1e-300))

    return Family(cfg.family, ("z", "r"), fld, GasLaw.polytropic(params.gamma), params,
                  reduced_axis=axis, reduced=reduced, closed_form=closed,
                  rhs_factory=lambda: axisym.reduced_rhs(params),
                  first_integrals=lambda s, y: axisym.first_integrals(params, y, s),
                  streamline_error=stream_err)


def _build_threed(cfg):
    p = cfg.params
    x_sign = p.get("x_sign", -1)
    if x_sign not in (-1, 1):
        raise ConfigError("x_sign must be -1 or 1")
    params = threed.ThreeDParams(
        m=_num(p, "m", required=True), n=_num(p, "n", required=True),
        gamma=_num(p, "gamma", required=True), c1=_num(p, "c1", 1.0), c2=_num(p, "c2", -1.0),
        c3=_num(p, "c3", 0.0), c4=_num(p, "c4", 0.0), b=_num(p, "b", 0.0),
        x_sign=int(x_sign), rate=_num(p, "A"))
    init = _initial(p)
    closed = None
    if init is None:
        if params.c3 != 0:
            raise ConfigError("c3 != 0 has no closed form; supply initial {s0, state}")
        closed = lambda s: threed.reconstruct_3d(params, s).as_array()
        closed(cfg.grid.bounds[2][0])
        reduced = closed
    else:
        reduced = _reduced_solution(cfg, threed.reduced_rhs(params), init, 2, 5)
    fld = threed.physical_field_3d(params, reduced)
    stream_err = None
    if closed is not None and params.gamma != 3 and params.c4 == 0:
        def stream_err(curve):
            x0, y0, z0 = curve[0]

            def ref(x):
                t = math.log(x / x0)
                return threed.streamlines_3d_parametric(
                    params.gamma, x0, y0, z0 + params.b, [t], b=params.b)[0]

            return max(float(np.linalg.norm(np.asarray(c) - ref(c[0]))) for c in curve)

    return Family(cfg.family, ("x", "y", "z"), fld, GasLaw.polytropic(params.gamma), params,
                  reduced_axis=2, reduced=reduced, closed_form=closed,
                  rhs_factory=lambda: threed.reduced_rhs(params),
                  first_integrals=lambda s, y: threed.first_integrals_3d(params, y, s),
                  streamline_error=stream_err)


_BUILDERS = {
    "chaplygin-implicit": _build_implicit,
    "chaplygin-rational": _build_rational,
    "axisym-pz": _build_axisym,
    "axisym-pr": _build_axisym,
    "threed": _build_threed,
}


def _negative(fam: Family) -> Family:
    if fam.is_potential:
        base = fam.sampler

        def func(x, y, z):
            return base(x, y, z) + 0.1 * x * x

        sampler = chaplygin.PotentialSampler(func, None, base.mp_safe, base.name + "+0.1x^2")
        fam.sampler = sampler
        fam.field = chaplygin.chaplygin_field(sampler, fam.law)
        return fam
    fam.field = perturb_pressure(fam.field, 0.1, axis=0)
    fam.streamline_error = None
    return fam
