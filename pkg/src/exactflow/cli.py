"""``exactflow`` command line: sample, verify and trace configured flows.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error
(with a JSON object on standard error).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from . import __version__, chaplygin, export
from .config import ConfigError, Family, RunConfig, build_family, load_config, parse_seeds
from .core import DomainError, ExactFlowError, FlowState, StagnationError, sound_speed_squared
from .odeint import REACHED_END, InvariantMonitor, integrate
from .streamtrace import trace
from .verify import (
    convergence_order,
    euler_residual_3d,
    euler_residual_axisym,
    invariants_along_curve,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FIELD_COLUMNS = ("u", "v", "w", "rho", "p")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="exactflow", description="Sample, verify and trace exact gas-dynamics solutions.")
    p.add_argument("--version", action="version", version=f"exactflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("sample", "sample a field on a grid"),
                        ("verify", "run the verification suite"),
                        ("trace", "trace streamlines from seeds")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="JSON run configuration")
        s.add_argument("--out", help="output path (default: standard output)")
        s.add_argument("--format", choices=("csv", "vtk", "json"), default=None)
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--debug-literal-e5", action="store_true",
                       help="use the P-free energy equation in reduced integrations (threed only)")
        if name == "trace":
            s.add_argument("--seeds", help="seed points: JSON list or CSV rows")
    return p


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _as_state(s):
    return s if isinstance(s, FlowState) else FlowState(*s)


# sample ---------------------------------------------------------------------

def sample_rows(fam: Family, cfg: RunConfig, threads=1):
    def one(pt):
        try:
            s = _as_state(fam.field(*pt))
        except (ExactFlowError, ZeroDivisionError, ValueError) as exc:
            raise ConfigError(f"field undefined at grid point {list(pt)}: {exc}") from exc
        return (*pt, *s.as_tuple())

    return _map(one, cfg.grid.points(), threads)


def cmd_sample(cfg, fam, fmt, threads):
    rows = sample_rows(fam, cfg, threads)
    cols = (*fam.coord_names, *FIELD_COLUMNS)
    fmt = fmt or "csv"
    if fmt == "csv":
        text = export.fields_csv(cols, rows)
    elif fmt == "json":
        text = export.fields_json(cols, rows)
    else:
        text = export.fields_vtk(f"exactflow {cfg.family}", cfg.grid.resolution, cfg.grid.origin,
                                 cfg.grid.spacing, rows, fam.dim)
    return text, {"rows": len(rows)}, EXIT_OK


# verify ---------------------------------------------------------------------

def _verification_points(cfg):
    pts = cfg.grid.points()
    k = min(cfg.verify.max_points, len(pts))
    idx = sorted(set(int(round(i)) for i in np.linspace(0, len(pts) - 1, k)))
    return [pts[i] for i in idx]


def _residual_check(fam, cfg, pt):
    vs = cfg.verify
    entry = {"point": list(pt)}
    try:
        if fam.is_potential:
            ev = lambda q, h: chaplygin.potential_residual(fam.sampler, q, h, normalized=True)
        elif fam.dim == 3:
            ev = lambda q, h: euler_residual_3d(fam.field, q, h, fam.gamma)
        else:
            ev = lambda q, h: euler_residual_axisym(fam.field, q, h, fam.gamma)
        res = convergence_order(ev, pt, vs.hs)
    except (ExactFlowError, ZeroDivisionError) as exc:
        entry.update(status="error", message=str(exc), passed=False)
        return entry
    entry.update(slope=res.order, saturated=res.saturated, residuals=list(res.residuals),
                 passed=res.within(*vs.slope_range))
    if fam.is_potential:
        try:
            s = _as_state(fam.field(*pt))
            c2 = sound_speed_squared(fam.law, s)
            dev = abs(s.speed_squared - c2) / c2
        except ExactFlowError as exc:
            entry.update(status="error", message=str(exc), passed=False)
            return entry
        entry["sonic_deviation"] = dev
        entry["passed"] = entry["passed"] and dev <= vs.sonic_tol
    return entry


def _integral_check(fam, cfg):
    lo = cfg.grid.bounds[fam.reduced_axis][0]
    y0 = np.asarray(fam.reduced(lo), dtype=float)
    c0 = fam.first_integrals(lo, y0)
    scale = max(abs(c) for c in c0)
    labels = ("c1", "c2", "c3")
    mon = InvariantMonitor({lab: (lambda t, y, i=i: fam.first_integrals(t, y)[i]) for i, lab in enumerate(labels)})
    traj = integrate(fam.rhs_factory(), y0, (lo, lo + 1.0), step=1e-3, monitor=mon)
    # drift of each integral relative to the largest of the three at the start
    drift = {lab: mon.drift[lab] * max(abs(mon.reference[lab]), mon.floor) / scale for lab in labels}
    out = {"span": [lo, lo + 1.0], "reason": traj.reason, "drift": drift}
    ok = traj.reason == REACHED_END and max(drift.values()) <= cfg.verify.integral_drift_tol
    if fam.closed_form is not None:
        err = 0.0
        for t, y in zip(traj.t, traj.y):
            ref = np.asarray(fam.closed_form(t), dtype=float)
            err = max(err, float(np.max(np.abs(y - ref)) / np.max(np.abs(ref))))
        out["closed_form_deviation"] = err
        ok = ok and err <= cfg.verify.track_tol
    out["passed"] = bool(ok)
    return out


def _streamline_check(fam, cfg, seed):
    vs = cfg.verify
    entry = {"seed": list(seed)}
    try:
        curve = trace(fam.field, seed, (0.0, vs.trace_length), step=1e-3)
    except ExactFlowError as exc:
        entry.update(status="error", message=str(exc), passed=False)
        return entry
    entry["reason"] = curve.reason
    entry["samples"] = len(curve)
    if len(curve) < 10:
        entry.update(passed=False, message="curve too short")
        return entry
    try:
        d1, d2 = invariants_along_curve(fam.field, curve.points, fam.gamma)
    except ExactFlowError as exc:
        entry.update(status="error", message=str(exc), passed=False)
        return entry
    entry["entropy_drift"], entry["bernoulli_drift"] = d1, d2
    ok = max(d1, d2) <= vs.streamline_tol
    if fam.streamline_error is not None:
        e = fam.streamline_error(curve.points)
        entry["closed_form_error"] = e
        ok = ok and e <= vs.streamline_tol
    entry["passed"] = bool(ok)
    return entry


def cmd_verify(cfg, fam, fmt, threads, literal_e5=False):
    if fmt not in (None, "json"):
        raise ConfigError("verify writes JSON only")
    pts = _verification_points(cfg)
    report = {
        "family": cfg.family,
        "negative_control": cfg.negative_control,
        "literal_e5": literal_e5,
        "residuals": _map(lambda p: _residual_check(fam, cfg, p), pts, threads),
    }
    if fam.rhs_factory is not None:
        report["integrals"] = _integral_check(fam, cfg)
    if not fam.is_potential and cfg.verify.seeds:
        seeds = _interior(pts, cfg.verify.seeds)
        report["streamlines"] = _map(lambda s: _streamline_check(fam, cfg, s), seeds, threads)
    checks = [e["passed"] for e in report["residuals"]]
    if "integrals" in report:
        checks.append(report["integrals"]["passed"])
    checks += [e["passed"] for e in report.get("streamlines", [])]
    report["passed"] = all(checks)
    text = json.dumps(_clean(report), indent=1, sort_keys=True) + "\n"
    return text, {"passed": report["passed"]}, EXIT_OK if report["passed"] else EXIT_FAIL


def _interior(pts, k):
    # skip the first point (a grid corner) when there is a choice
    cand = pts[1:-1] or pts
    idx = sorted(set(int(round(i)) for i in np.linspace(0, len(cand) - 1, min(k, len(cand)))))
    return [cand[i] for i in idx]


def _clean(obj):
    """Replace non-finite floats so the report stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# trace ----------------------------------------------------------------------

def read_seeds(path, dim):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read seeds: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = []
        for row in csv.reader(text.splitlines()):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                data.append([float(c) for c in row])
            except ValueError:
                if data:
                    raise ConfigError(f"bad seed row {row}")
                # header
    return parse_seeds(data, dim)


def cmd_trace(cfg, fam, fmt, threads, seeds):
    if fmt not in (None, "csv", "json"):
        raise ConfigError("trace writes csv or json")
    if not seeds:
        raise ConfigError("no seeds given (config 'seeds' or --seeds)")
    ts = cfg.trace

    def one(seed):
        try:
            c = trace(fam.field, seed, ts.span, ts.step, normalize=ts.normalize)
            return c, {"seed": list(seed), "status": c.reason, "samples": len(c)}
        except StagnationError as exc:
            return None, {"seed": list(seed), "status": "stagnation_at_seed", "message": str(exc), "samples": 0}
        except ExactFlowError as exc:
            return None, {"seed": list(seed), "status": "invalid_seed", "message": str(exc), "samples": 0}

    results = _map(one, seeds, threads)
    cols = ("curve_id", "parameter", *fam.coord_names)
    rows = []
    for cid, (curve, _) in enumerate(results):
        if curve is None:
            continue
        for t, p in zip(curve.parameter, curve.points):
            rows.append((cid, float(t), *(float(c) for c in p)))
    text = export.fields_json(cols, rows) if fmt == "json" else export.fields_csv(cols, rows)
    return text, {"curves": [dict(info, curve_id=i) for i, (_, info) in enumerate(results)]}, EXIT_OK


# entry point ----------------------------------------------------------------

def _fail(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return EXIT_USAGE


def _write(path, text, meta):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)
    with open(path + ".meta.json", "w") as fh:
        fh.write(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def main(argv: Optional[list] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc))
    if args.threads < 1:
        return _fail("usage", "--threads must be at least 1")
    try:
        cfg = load_config(args.config)
        fam = build_family(cfg, literal_e5=args.debug_literal_e5)
        if args.command == "sample":
            text, extra, code = cmd_sample(cfg, fam, args.format, args.threads)
        elif args.command == "verify":
            text, extra, code = cmd_verify(cfg, fam, args.format, args.threads, args.debug_literal_e5)
        else:
            seeds = read_seeds(args.seeds, fam.dim) if args.seeds else cfg.seeds
            text, extra, code = cmd_trace(cfg, fam, args.format, args.threads, seeds)
    except ConfigError as exc:
        return _fail("config", str(exc))
    except DomainError as exc:
        return _fail("config", str(exc))
    meta = {"version": __version__, "command": args.command, "family": cfg.family,
            "config_sha256": cfg.sha256, "format": args.format, **extra}
    try:
        _write(args.out, text, _clean(meta))
    except OSError as exc:
        return _fail("io", str(exc))
    return code


if __name__ == "__main__":
    sys.exit(main())
