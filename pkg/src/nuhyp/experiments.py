"""Reproducible experiments on the example systems.

Each runner takes a validated config dict (see :mod:`nuhyp.config`) and
returns an :class:`ExperimentResult`: tables with column units, a list of
threshold checks, and a flat summary.  :func:`write_result` turns one into
CSV files plus a deterministic JSON summary.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cocycle import (domination_check, finite_time_exponents, oseledets_frame, periodic_frame)
from .manifolds import (BlowupSystem, Budgets, ProximityPoint, TorusLinearSystem, homoclinically_related,
                        intersection_classes, make_saddle, proximity_intersection_test, _CurveCache)
from .systems.blowup import (blowup_fixed_points, blowup_lift_orbit, chart_formula)
from .systems.catmap import CatMap, cat_orbit, cat_periodic_orbits, matrix_order_mod
from .systems.figure8 import (Figure8System, drift_bound, figure8_time1, hamiltonian, level_curve_measure,
                              level_curve_orbit, saddle_measure, SADDLES)
from .wstar import make_family, wstar_distance


@dataclass
class Table:
    columns: list  # (name, unit)
    rows: list
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in sorted(self.meta.items()):
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{n} [{u}]" if u else n for n, u in self.columns])
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


@dataclass
class Check:
    name: str
    passed: bool
    value: object
    threshold: object
    note: str = ""


@dataclass
class ExperimentResult:
    name: str
    tables: dict
    checks: list
    summary: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    return v


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed to 17 significant digits, keys in insertion order."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None:
        return "true" if obj is True else "false" if obj is False else "null"
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return "%.17g" % x
    if isinstance(obj, (np.integer, int)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{dumps(str(k))}: {dumps(v, indent, _level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [inner + dumps(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _pmap(fn, items, workers: int):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# cat map


def _orbit_rows(args):
    matrix, q = args
    m = CatMap(tuple(map(tuple, matrix)))
    ref = np.array([-m.log_lambda, m.log_lambda])
    order = matrix_order_mod(m, q)
    rows = []
    for r in cat_periodic_orbits(m, q):
        err = float(np.max(np.abs(r.exponents - ref)))
        rows.append((q, str(r.representative[0]), str(r.representative[1]), r.period,
                     float(r.exponents[0]), float(r.exponents[1]), err, order % r.period == 0))
    return rows


def catmap_saddles(m: CatMap, q_max: int, system=None) -> list:
    """One saddle per periodic orbit with denominator ``<= q_max``."""
    system = system or TorusLinearSystem(m)
    seen, out = set(), []
    for q in range(1, q_max + 1):
        for r in cat_periodic_orbits(m, q):
            key = frozenset(r.points)
            if key in seen:
                continue
            seen.add(key)
            p = [float(r.representative[0]), float(r.representative[1])]
            s = make_saddle(system, p, r.period, label=f"({r.representative[0]},{r.representative[1]})")
            out.append((s, r))
    return out


def run_catmap(cfg: dict, workers: int = 0) -> ExperimentResult:
    c = cfg["catmap"]
    m = CatMap(tuple(map(tuple, c["matrix"])))
    chunks = _pmap(_orbit_rows, [(c["matrix"], q) for q in range(1, c["q_max"] + 1)], workers)
    rows = [row for chunk in chunks for row in chunk]
    exp_err = max(r[6] for r in rows)
    counts_ok = all(sum(r[3] for r in rows if r[0] == q) == q * q for q in range(1, c["q_max"] + 1))
    orders_ok = all(r[7] for r in rows)
    exponents = Table([("q", ""), ("x", "rational"), ("y", "rational"), ("period", "steps"),
                       ("exponent_min", "1/step"), ("exponent_max", "1/step"), ("abs_error", "1/step"),
                       ("period_divides_order", "")], rows, {"log_lambda": m.log_lambda})

    b = cfg["budgets"]
    budgets = Budgets(b["arclength"], b["tol"], b["h_max"], b["h_min"], b["angle_min"])
    system = TorusLinearSystem(m)
    pairs = catmap_saddles(m, c["classes_q_max"], system)
    saddles = [s for s, _ in pairs]
    part = intersection_classes(system, saddles, budgets)
    s_dir, u_dir = m.eigendirections()
    analytic = math.acos(abs(float(s_dir @ u_dir)))
    angles = [cr["angle"] for e in part.evidence if e["via"] == "direct"
              for v in e["crossings"].values() for cr in v]
    angle_err = max((abs(a - analytic) for a in angles), default=math.inf)

    # proximity predictions against grown manifolds
    cache = _CurveCache(system, budgets)
    size = c["delta"]
    pred_rows, confirmed, predicted = [], 0, 0
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            d = min(system.distance(np.array([float(a[0]), float(a[1])]), np.array([float(b_[0]), float(b_[1])]))
                    for a in pairs[i][1].points for b_ in pairs[j][1].points)
            x = ProximityPoint((0.0, 0.0), size, size)
            y = ProximityPoint((d, 0.0), size, size)
            pred = proximity_intersection_test(x, y, c["eta"], c["delta"])
            rel = homoclinically_related(system, saddles[i], saddles[j], budgets, cache).related if pred else None
            predicted += pred
            confirmed += bool(rel)
            pred_rows.append((saddles[i].label, saddles[j].label, d, pred, "" if rel is None else rel))
    proximity = Table([("saddle_a", ""), ("saddle_b", ""), ("orbit_distance", "torus"),
                       ("predicted", ""), ("confirmed", "")], pred_rows, {"eta": c["eta"], "delta": c["delta"]})

    rep = pairs[min(3, len(pairs) - 1)][1] if pairs else cat_periodic_orbits(m, 2)[-1]
    dom = domination_check(rep.segment, periodic_frame(rep.segment), c["domination_N_max"])

    classes = part.classes()
    checks = [
        Check("exponents", exp_err <= c["exponent_tol"], exp_err, c["exponent_tol"]),
        Check("orbit_counts", counts_ok and orders_ok, counts_ok and orders_ok, True,
              "sum of periods = q^2 and each period divides the matrix order mod q"),
        Check("single_class", len(classes) == 1, len(classes), 1),
        Check("crossing_angle", angle_err <= c["angle_tol"], angle_err, c["angle_tol"],
              "max |crossing angle - eigendirection angle|"),
        Check("proximity_confirmed", confirmed == predicted, f"{confirmed}/{predicted}", "all",
              "every positive proximity prediction confirmed by grown manifolds"),
        Check("domination_N", dom == 1, dom, 1),
    ]
    summary = {"log_lambda": m.log_lambda, "orbits": len(rows), "saddles": len(saddles),
               "classes": classes, "eigendirection_angle": analytic, "domination_N": dom,
               "partition": part.to_dict()}
    return ExperimentResult("catmap", {"exponents": exponents, "proximity": proximity}, checks, summary)


# ---------------------------------------------------------------------------
# blow-up


def orbit_through(m: CatMap, q: int):
    """The periodic orbit of ``(1/q, 0)``."""
    return cat_orbit(m, (Fraction(1, q), Fraction(0)))


def _blowup_row(args):
    matrix, q, radius = args
    m = CatMap(tuple(map(tuple, matrix)))
    lifted = blowup_lift_orbit(m, orbit_through(m, q), radius)
    occ = lifted.occupation
    return (q, lifted.segment.period, occ.count_p1, occ.count_p2, occ.ratio,
            float(lifted.exponents[0]), float(lifted.exponents[1]))


def conjugacy_residual(m: CatMap, n: int, seed: int) -> float:
    """Max distance between ``pi(chart formula)`` and ``A pi`` over random chart points."""
    rng = np.random.default_rng(seed)
    A = m.as_array()
    worst = 0.0
    for chart in (1, 2):
        r = rng.uniform(-0.2, 0.2, n // 2)
        s = rng.uniform(-1.0, 1.0, n // 2)
        for ri, si in zip(r, s):
            out = chart_formula(m, chart, (ri, si))
            if chart == 1:
                img, xy = np.array([out[0], out[1] * out[0]]), np.array([ri, si * ri])
            else:
                img, xy = np.array([out[1] * out[0], out[0]]), np.array([si * ri, ri])
            d = img - A @ xy
            d -= np.round(d)
            worst = max(worst, float(np.max(np.abs(d))))
    return worst


def run_blowup(cfg: dict, workers: int = 0) -> ExperimentResult:
    c = cfg["blowup"]
    m = CatMap(tuple(map(tuple, c["matrix"])))
    lam = abs(m.lam)
    p1, p2 = blowup_fixed_points(m)
    roots = sorted([(-1 + math.sqrt(5)) / 2, (-1 - math.sqrt(5)) / 2]) if c["matrix"] == [[2, 1], [1, 1]] else None
    slopes = sorted([p1.slope, p2.slope])
    slope_err = max(abs(a - b) for a, b in zip(slopes, roots)) if roots else 0.0
    pair_err = max(abs(p1.eigenvalues[0] - lam), abs(p1.eigenvalues[1] - lam**-2),
                   abs(p2.eigenvalues[0] - 1 / lam), abs(p2.eigenvalues[1] - lam**2))
    eig_err = max(p1.eigen_error, p2.eigen_error)
    conj = conjugacy_residual(m, c["conjugacy_points"], cfg["seed"])

    rows = _pmap(_blowup_row, [(c["matrix"], q, c["radius"]) for q in c["qs"]], workers)
    occupancy = Table([("q", ""), ("period", "steps"), ("visits_p1", "count"), ("visits_p2", "count"),
                       ("ratio_p1_p2", ""), ("exponent_min", "1/step"), ("exponent_max", "1/step")],
                      rows, {"radius": c["radius"], "metric": "chart distance to the fixed slope"})
    ratios = [r[4] for r in rows]
    last = ratios[-1]
    in_range = last is not None and c["ratio_min"] <= last <= c["ratio_max"]
    devs = [abs(r - 1) if r is not None else math.inf for r in ratios]
    monotone = all(b <= a for a, b in zip(devs, devs[1:]))
    exp_err = max(max(abs(r[5] + m.log_lambda), abs(r[6] - m.log_lambda)) for r in rows)

    system = BlowupSystem(m)
    s1 = make_saddle(system, [0.0, math.atan(p1.slope)], label="p1")
    s2 = make_saddle(system, [0.0, math.atan(p2.slope)], label="p2")
    b = cfg["budgets"]
    budgets = Budgets(c["arclength"], b["tol"], b["h_max"], b["h_min"], c["angle_min"])
    part = intersection_classes(system, [s1, s2], budgets)
    classes = part.classes()
    reason = next((e.get("reason") for e in part.evidence if e["pair"] == [0, 1]), "")

    checks = [
        Check("fixed_slopes", slope_err <= c["slope_tol"], slope_err, c["slope_tol"]),
        Check("eigen_pairs", pair_err <= c["eigen_tol"] and eig_err <= c["eigen_tol"], max(pair_err, eig_err),
              c["eigen_tol"], "closed form vs (lam, lam^-2), (1/lam, lam^2) and vs finite differences"),
        Check("conjugacy", conj <= c["conjugacy_tol"], conj, c["conjugacy_tol"]),
        Check("ratio_largest_q", in_range, last, [c["ratio_min"], c["ratio_max"]]),
        Check("ratio_deviation_nonincreasing", monotone, devs, "non-increasing in q"),
        Check("lifted_exponents", exp_err <= c["exponent_tol"], exp_err, c["exponent_tol"]),
        Check("two_classes", len(classes) == 2, len(classes), 2, reason),
    ]
    summary = {"lambda": lam, "slopes": slopes, "p1_eigenvalues": list(p1.eigenvalues),
               "p2_eigenvalues": list(p2.eigenvalues), "ratios": ratios, "classes": classes,
               "relation": reason, "partition": part.to_dict()}
    return ExperimentResult("blowup", {"occupancy": occupancy}, checks, summary)


# ---------------------------------------------------------------------------
# figure-8


def _figure8_row(args):
    M, T, eps, family, K = args
    s = Figure8System(M)
    orbit = level_curve_orbit(s, eps, T)
    mu = level_curve_measure(s, eps, T, orbit)
    fam = make_family(family) if K is None else make_family(family, K=K)
    D = wstar_distance(mu, saddle_measure(), fam)
    H = hamiltonian(orbit.points)
    slope = float(np.polyfit(np.arange(len(H), dtype=float), H, 1)[0])
    near = np.min([np.hypot(((orbit.points[:, 0] - sx + 0.5) % 1) - 0.5, orbit.points[:, 1] - sy)
                   for sx, sy in SADDLES], axis=0)
    return (eps, D, float(np.max(np.abs(H - (1 - eps)))), slope, float(np.mean(near < 0.1)))


def symplectic_defect(s: Figure8System, n: int, y_range, seed: int) -> float:
    """Max ``|det J - 1|`` over random points, the determinant evaluated exactly from the stored entries."""
    rng = np.random.default_rng(seed)
    P = np.column_stack([rng.random(n), rng.uniform(y_range[0], y_range[1], n)])
    worst = 0.0
    for p in P:
        a, b, c, d = (Fraction(float(v)) for v in figure8_time1(s, p).jacobian.ravel())
        worst = max(worst, abs(float(a * d - b * c) - 1.0))
    return worst


def run_figure8(cfg: dict, workers: int = 0) -> ExperimentResult:
    c = cfg["figure8"]
    M, T = int(c["M"]), int(c["T"])
    rows = _pmap(_figure8_row, [(M, T, e, c["family"], c["K"]) for e in c["eps"]], workers)
    table = Table([("eps", ""), ("distance", "weak*"), ("max_energy_offset", "H"), ("energy_slope", "H per unit time"),
                   ("fraction_within_0.1_of_saddles", "")], rows,
                  {"family": c["family"], "K": c["K"], "M": M, "T": T, "drift_bound": drift_bound(M)})
    Ds = [r[1] for r in rows]
    decreasing = all(b < a for a, b in zip(Ds, Ds[1:]))
    slope = max(abs(r[3]) for r in rows)

    s = Figure8System(M)
    orbit = level_curve_orbit(s, c["exponent_eps"], T)
    ftle = float(np.max(np.abs(finite_time_exponents(orbit))))
    trimmed, frame = oseledets_frame(orbit, warmup=c["warmup"])
    dom = domination_check(trimmed, frame, c["domination_N_max"], sample=c["domination_sample"])
    det = symplectic_defect(s, c["symplectic_points"], c["y_range"], cfg["seed"])

    checks = [
        Check("distance_decreasing", decreasing, Ds, "strictly decreasing in eps order"),
        Check("distance_smallest_eps", Ds[-1] < c["distance_max"], Ds[-1], c["distance_max"]),
        Check("trajectory_exponent", ftle < c["exponent_max"], ftle, c["exponent_max"]),
        Check("energy_drift", slope < c["drift_max"], slope, c["drift_max"], "fitted secular slope of H"),
        Check("symplectic_det", det <= c["det_tol"], det, c["det_tol"]),
        Check("no_domination", dom is None, dom, None),
    ]
    summary = {"distances": Ds, "trajectory_exponent": ftle, "energy_slope": slope, "det_defect": det,
               "domination_N": dom, "drift_bound": drift_bound(M)}
    return ExperimentResult("figure8", {"distances": table}, checks, summary)


RUNNERS = {"catmap": run_catmap, "blowup": run_blowup, "figure8": run_figure8}


def run_experiment(name: str, cfg: dict, workers: int = 0) -> ExperimentResult:
    return RUNNERS[name](cfg, workers)


def result_to_dict(res: ExperimentResult, cfg: dict | None = None) -> dict:
    out = {
        "experiment": res.name,
        "passed": res.passed,
        "checks": [{"name": c.name, "passed": c.passed, "value": c.value, "threshold": c.threshold,
                    "note": c.note} for c in res.checks],
        "summary": res.summary,
    }
    if cfg is not None:
        out["config"] = {"seed": cfg["seed"], res.name: cfg.get(res.name, {}), "budgets": cfg["budgets"]}
    return out


def write_result(res: ExperimentResult, outdir, cfg: dict | None = None) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in res.tables.items():
        path = outdir / f"{res.name}_{name}.csv"
        path.write_text(table.to_csv())
        written.append(path)
    path = outdir / f"{res.name}_summary.json"
    path.write_text(dumps(result_to_dict(res, cfg)) + "\n")
    written.append(path)
    return written
