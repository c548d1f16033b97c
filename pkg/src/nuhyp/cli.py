"""Command-line entry point: ``nuhyp <subcommand> ...``.

Exit status is 0 when every configured check passes, 1 when a check fails,
and 2 on usage, input or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import pliss
from .cocycle import (cf_constant, domination_check, finite_time_exponents, orbit_from_json, oseledets_frame,
                      periodic_exponents, periodic_frame)
from .config import load_config
from .errors import ParameterError, PreconditionError
from .experiments import RUNNERS, dumps, result_to_dict, run_experiment, write_result
from .manifolds import (BlowupSystem, Budgets, TorusLinearSystem, intersection_classes, make_saddle)
from .systems.blowup import blowup_fixed_points
from .systems.catmap import CatMap
from .wstar import make_family, measure_from_csv, measure_from_json, wstar_report


class InputError(Exception):
    pass


def read_sequence(path, exact: bool = False) -> list:
    """Numbers from a CSV file, one or more per row; ``#`` starts a comment."""
    conv = Fraction if exact else float
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or not cells[0] or cells[0].startswith("#"):
                continue
            for cell in cells:
                if not cell:
                    continue
                try:
                    values.append(conv(cell))
                except (ValueError, ZeroDivisionError):
                    raise InputError(f"{path}:{lineno}: cannot parse {cell!r} as a number") from None
    if not values:
        raise InputError(f"{path}: no values")
    return values


def _emit(obj, output):
    text = dumps(obj) + "\n"
    if output:
        Path(output).write_text(text)
    sys.stdout.write(text)


def cmd_pliss(args) -> int:
    values = read_sequence(args.file, args.exact)
    c1 = Fraction(args.c1) if args.exact else float(args.c1)
    report = {"n": len(values), "c1": c1}
    if args.periodic:
        seq = pliss.PeriodicSequence.of(values, args.A)
        times = pliss.ultimate_pliss_times(seq, c1, args.tie_tol)
        report["ultimate_times"] = times
        oracle = pliss.ultimate_pliss_times_bruteforce(seq, c1) if args.verify else None
    else:
        times = pliss.pliss_times(values, c1, args.tie_tol)
        report["pliss_times"] = times
        oracle = pliss.pliss_times_bruteforce(values, c1, args.tie_tol) if args.verify else None
    report["count"] = len(times)
    if args.c2 is not None:
        A = args.A if args.A is not None else max(abs(v) for v in values)
        theta = pliss.pliss_theta(A, c1, Fraction(args.c2) if args.exact else float(args.c2))
        report["theta"] = theta
        report["theta_n"] = theta * len(values)
    status = 0
    if args.verify:
        match = oracle == times
        report["oracle"] = "match" if match else "mismatch"
        status = 0 if match else 1
    _emit(report, args.output)
    return status


def cmd_exponents(args) -> int:
    orbit = orbit_from_json(Path(args.file).read_text())
    report = {"dim": orbit.dim, "steps": orbit.n_steps, "period": orbit.period}
    cf = cf_constant(orbit)
    report["Cf"] = cf.value
    if orbit.periodic:
        report["exponents"] = periodic_exponents(orbit).tolist()
        frame_orbit, frame = orbit, (periodic_frame(orbit) if orbit.dim == 2 else None)
    else:
        report["finite_time_exponents"] = finite_time_exponents(orbit).tolist()
        frame_orbit, frame = (oseledets_frame(orbit, warmup=args.warmup)
                              if orbit.dim == 2 and orbit.n_steps > 2 * args.warmup else (None, None))
    if frame is not None and args.domination:
        report["domination_N"] = domination_check(frame_orbit, frame, args.domination)
    _emit(report, args.output)
    return 0


def _load_measure(path, space):
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return measure_from_json(text)
    return measure_from_csv(text, space)


def cmd_measure_dist(args) -> int:
    mu = _load_measure(args.mu, args.space)
    nu = _load_measure(args.nu, args.space)
    params = {} if args.K is None else {"K": args.K}
    fam = make_family(args.family, **params)
    rep = wstar_report(mu, nu, fam)
    _emit({"family": args.family, "K": rep.K, "distance": rep.value, "tail_bound": rep.tail_bound}, args.output)
    return 0


def cmd_classes(args) -> int:
    saddles_in = json.loads(Path(args.saddles).read_text()) if args.saddles else []
    m = CatMap(tuple(map(tuple, json.loads(args.matrix))))
    budgets = Budgets(args.budget, args.tol, args.h_max, args.h_min, args.angle_min)
    if args.system == "catmap":
        system = TorusLinearSystem(m)
        saddles = [make_saddle(system, s["point"], int(s.get("period", 1)), s.get("label", ""))
                   for s in saddles_in]
    else:
        system = BlowupSystem(m)
        p1, p2 = blowup_fixed_points(m)
        named = {"p1": p1.slope, "p2": p2.slope}
        saddles = []
        for s in saddles_in:
            key = s if isinstance(s, str) else s.get("point")
            if key not in named:
                raise InputError(f"blow-up saddles are 'p1' or 'p2', got {key!r}")
            saddles.append(make_saddle(system, [0.0, float(np.arctan(named[key]))], 1, key))
    part = intersection_classes(system, saddles, budgets)
    out = part.to_dict()
    out["budgets"] = {"arclength": args.budget, "angle_min": args.angle_min}
    _emit(out, args.output)
    return 0


def _short(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.6g" % v
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def cmd_experiment(args) -> int:
    cfg = load_config(args.config, args.set or ())
    res = run_experiment(args.name, cfg, args.workers)
    outdir = args.output or cfg["output"]
    written = write_result(res, outdir, cfg)
    for c in res.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {res.name}.{c.name}: value={_short(c.value)} "
              f"threshold={_short(c.threshold)}")
    print(f"wrote {', '.join(str(p) for p in written)}")
    if args.verify:
        print(dumps(result_to_dict(res)["checks"]))
    return 0 if res.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nuhyp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pliss", help="Pliss times of a sequence in a CSV file")
    p.add_argument("file")
    p.add_argument("--c1", required=True)
    p.add_argument("--c2")
    p.add_argument("--A", type=float)
    p.add_argument("--periodic", action="store_true", help="treat the file as one period")
    p.add_argument("--exact", action="store_true", help="parse values as exact rationals")
    p.add_argument("--tie-tol", type=float, default=0.0)
    p.add_argument("--verify", action="store_true", help="cross-check with the brute-force oracle")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_pliss)

    p = sub.add_parser("exponents", help="exponents and domination of an orbit JSON dump")
    p.add_argument("file")
    p.add_argument("--domination", type=int, default=20, metavar="N_MAX")
    p.add_argument("--warmup", type=int, default=200)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("measure-dist", help="truncated weak* distance between two measure files")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--family", default="torus")
    p.add_argument("--K", type=int)
    p.add_argument("--space", default="torus")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_measure_dist)

    p = sub.add_parser("classes", help="intersection classes of a list of saddles")
    p.add_argument("--system", choices=["catmap", "blowup"], default="catmap")
    p.add_argument("--saddles", help="JSON list of saddles; omitted means none")
    p.add_argument("--matrix", default="[[2, 1], [1, 1]]")
    p.add_argument("--budget", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--h-max", type=float, default=0.05)
    p.add_argument("--h-min", type=float, default=1e-9)
    p.add_argument("--angle-min", type=float, default=1e-3)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("experiment", help="run a reproduction experiment")
    p.add_argument("name", choices=sorted(RUNNERS))
    p.add_argument("--config", "-c")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
    p.add_argument("--output", "-o", help="output directory")
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--verify", action="store_true", help="print the full check records")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParameterError, PreconditionError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
