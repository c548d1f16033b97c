"""Atomic probability measures and a truncated weak* distance between them.

The distance between two measures is computed against an ordered family of
bounded test functions ``phi_1, ..., phi_K``::

    D_K(mu, nu) = sum_n |int phi_n dmu - int phi_n dnu| / (2**n * ||phi_n||_inf)

Each term is at most ``2**(1-n)``, so dropping every ``n > K`` changes the
full series by at most ``2**(1-K)``; :func:`wstar_report` carries that bound.
Distances are relative to the family, so families are built by name through
:func:`make_family`.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, PreconditionError

WEIGHT_TOL = 1e-12
SPACES = ("torus", "cylinder", "blowup", "plane")


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Finite weighted sum of point masses.

    ``points`` has shape ``(n, d)``.  On the torus coordinates are reduced to
    ``[0, 1)``; on the cylinder only the first one is.  Blow-up points are
    stored as ``(x, y, cos 2t, sin 2t)`` with ``(x, y)`` the centred torus
    coordinates and ``t`` the direction angle of the point seen from the
    blown-up fixed point.
    """

    points: np.ndarray
    weights: np.ndarray
    space: str = "plane"

    def __post_init__(self):
        if self.space not in SPACES:
            raise ParameterError(f"unknown phase space {self.space!r}")
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.shape[0] != w.shape[0]:
            raise PreconditionError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        if w.size == 0:
            raise PreconditionError("a measure needs at least one atom")
        if np.any(w < 0):
            raise PreconditionError("weights must be nonnegative")
        if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
            raise PreconditionError(f"weights sum to {math.fsum(w)!r}, not 1")
        if self.space == "torus":
            pts = np.mod(pts, 1.0)
            pts[pts >= 1.0] = 0.0
        elif self.space == "cylinder":
            pts = pts.copy()
            pts[:, 0] = np.mod(pts[:, 0], 1.0)
            pts[pts[:, 0] >= 1.0, 0] = 0.0
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, point, space="plane"):
        return cls(np.atleast_2d(point), [1.0], space)

    @classmethod
    def uniform(cls, points, space="plane"):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = pts.shape[0]
        return cls(pts, np.full(n, 1.0 / n), space)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ConvexWeights:
    s: tuple

    def __post_init__(self):
        s = tuple(float(x) for x in self.s)
        if not s:
            raise PreconditionError("empty weight vector")
        if any(x < 0 or x > 1 for x in s):
            raise PreconditionError(f"weights must lie in [0, 1], got {s}")
        if abs(math.fsum(s) - 1.0) > WEIGHT_TOL:
            raise PreconditionError(f"weights sum to {math.fsum(s)!r}, not 1")
        object.__setattr__(self, "s", s)

    def __len__(self):
        return len(self.s)

    def __iter__(self):
        return iter(self.s)


@dataclass(frozen=True, eq=False)
class TestFunctionFamily:
    """Ordered test functions with their sup norms.

    Each function maps an ``(n, d)`` array of points to ``n`` values.
    """

    __test__ = False  # not a pytest class

    functions: tuple
    sup_norms: np.ndarray
    name: str = "custom"
    labels: tuple = field(default=())
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        norms = np.asarray(self.sup_norms, dtype=float)
        if len(self.functions) != norms.size:
            raise PreconditionError("one sup norm per function is required")
        if np.any(norms <= 0):
            raise PreconditionError("sup norms must be positive")
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "sup_norms", norms)

    @property
    def truncation_K(self) -> int:
        return len(self.functions)

    def truncated(self, K: int) -> "TestFunctionFamily":
        if not 1 <= K <= self.truncation_K:
            raise ParameterError(f"K must lie in 1..{self.truncation_K}")
        return TestFunctionFamily(self.functions[:K], self.sup_norms[:K], self.name,
                                  self.labels[:K], dict(self.params, K=K))

    def integrals(self, mu: EmpiricalMeasure) -> np.ndarray:
        return np.array([integrate(mu, phi) for phi in self.functions])

    def coefficients(self) -> np.ndarray:
        n = np.arange(1, self.truncation_K + 1)
        return 1.0 / (2.0**n * self.sup_norms)


def integrate(mu: EmpiricalMeasure, phi: Callable) -> float:
    """Weighted sum ``sum_i w_i phi(x_i)``."""
    vals = np.asarray(phi(mu.points), dtype=float).reshape(-1)
    return math.fsum(mu.weights * vals)


def wstar_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure, family: TestFunctionFamily) -> float:
    """Truncated weak* distance ``D_K``; see the module docstring."""
    if family.truncation_K == 0:
        raise ParameterError("empty test-function family")
    if mu.space != nu.space or mu.dim != nu.dim:
        raise PreconditionError("measures live on different phase spaces")
    diff = np.abs(family.integrals(mu) - family.integrals(nu))
    return math.fsum(family.coefficients() * diff)


@dataclass(frozen=True)
class DistanceReport:
    value: float
    K: int
    tail_bound: float
    family: str


def wstar_report(mu, nu, family: TestFunctionFamily) -> DistanceReport:
    K = family.truncation_K
    return DistanceReport(wstar_distance(mu, nu, family), K, 2.0 ** (1 - K), family.name)


def convex_combine(measures: Sequence[EmpiricalMeasure], s) -> EmpiricalMeasure:
    """``sum_j s_j mu_j`` as a single atomic measure (zero-weight atoms dropped)."""
    if not isinstance(s, ConvexWeights):
        s = ConvexWeights(tuple(s))
    if len(measures) != len(s):
        raise PreconditionError(f"{len(measures)} measures but {len(s)} weights")
    spaces = {(m.space, m.dim) for m in measures}
    if len(spaces) != 1:
        raise PreconditionError("measures live on different phase spaces")
    pts, wts = [], []
    for m, sj in zip(measures, s):
        if sj == 0:
            continue
        pts.append(m.points)
        wts.append(sj * m.weights)
    w = np.concatenate(wts)
    keep = w > 0
    # renormalize away the last-ulp drift of the scaled weights
    w = w[keep] / math.fsum(w[keep])
    return EmpiricalMeasure(np.concatenate(pts)[keep], w, measures[0].space)


def barycentric_grid(k: int, m: int) -> np.ndarray:
    """All weight vectors in the simplex with denominator ``m``, shape ``(N, k)``."""
    rows = [c for c in itertools.product(range(m + 1), repeat=k - 1) if sum(c) <= m]
    grid = np.array([list(c) + [m - sum(c)] for c in rows], dtype=float)
    return grid / m


def distance_to_simplex(nu: EmpiricalMeasure, vertices: Sequence[EmpiricalMeasure],
                        family: TestFunctionFamily, grid_m: int):
    """Grid minimum of ``D_K(nu, sum_j s_j mu_j)`` over barycentric weights.

    Integrals are linear in ``s``, so each vertex is integrated once.  The
    value can only decrease when ``grid_m`` is replaced by a multiple of it.
    """
    if not vertices:
        raise PreconditionError("empty vertex list")
    if grid_m < 1:
        raise ParameterError("grid_m must be >= 1")
    target = family.integrals(nu)
    V = np.stack([family.integrals(mu) for mu in vertices], axis=1)  # (K, k)
    grid = barycentric_grid(len(vertices), grid_m)
    dist = np.abs(target[None, :] - grid @ V.T) @ family.coefficients()
    best = int(np.argmin(dist))
    s = grid[best]
    return float(dist[best]), ConvexWeights(tuple(s))


def simplex_lipschitz(vertices: Sequence[EmpiricalMeasure], family: TestFunctionFamily) -> float:
    """Lipschitz constant of ``s -> D_K(nu, sum s_j mu_j)`` w.r.t. the l1 norm."""
    V = np.stack([family.integrals(mu) for mu in vertices], axis=1)
    return float(family.coefficients() @ np.max(np.abs(V), axis=1))


# ---------------------------------------------------------------------------
# test-function families


def _fourier_frequencies(max_freq: int):
    """Half-plane representatives ``(k1, k2) != 0`` ordered by ``|k1|+|k2|``."""
    rng = range(-max_freq, max_freq + 1)
    freqs = [(a, b) for a in rng for b in rng if (a > 0) or (a == 0 and b > 0)]
    return sorted(freqs, key=lambda k: (abs(k[0]) + abs(k[1]), k))


def _mode(kind, k1, k2):
    trig = np.cos if kind == "cos" else np.sin

    def phi(pts):
        return trig(2 * np.pi * (k1 * pts[:, 0] + k2 * pts[:, 1]))

    return phi


def torus_family(max_freq: int = 3, K: int | None = None) -> TestFunctionFamily:
    """Real Fourier modes on the 2-torus with ``|k1|, |k2| <= max_freq``.

    Each frequency pair contributes ``cos`` then ``sin``; every mode has sup
    norm exactly 1.  ``max_freq = 3`` gives ``K = 48``.
    """
    funcs, labels = [], []
    for k1, k2 in _fourier_frequencies(max_freq):
        for kind in ("cos", "sin"):
            funcs.append(_mode(kind, k1, k2))
            labels.append(f"{kind}({k1},{k2})")
    fam = TestFunctionFamily(tuple(funcs), np.ones(len(funcs)), "torus", tuple(labels),
                             {"max_freq": max_freq})
    return fam if K is None else fam.truncated(K)


def _estimate_sup(phi, x_range, y_range, grid=400, safety=1.05) -> float:
    xs = np.linspace(*x_range, grid)
    ys = np.linspace(*y_range, grid)
    X, Y = np.meshgrid(xs, ys)
    vals = phi(np.column_stack([X.ravel(), Y.ravel()]))
    return safety * float(np.max(np.abs(vals)))


def cylinder_family(max_freq: int = 3, max_degree: int = 2, window: float = 1.0,
                    y_range=(-3.0, 3.0), K: int | None = None) -> TestFunctionFamily:
    """Functions on ``S^1 x R``: x-modes times Gaussian-windowed monomials in y.

    The factors are ``1, cos(2 pi k x), sin(2 pi k x)`` for ``k <= max_freq``
    and ``y**j * exp(-y**2 / (2 window**2))`` for ``j <= max_degree``,
    ordered by ``k + j``.  Sup norms come from a 400 x 400 grid over
    ``[0, 1] x y_range`` inflated by 5%.
    """
    xmodes = [(0, "one")] + [(k, kind) for k in range(1, max_freq + 1) for kind in ("cos", "sin")]
    combos = sorted(((k, kind, j) for k, kind in xmodes for j in range(max_degree + 1)),
                    key=lambda t: (t[0] + t[2], t[0], t[2], t[1]))
    funcs, norms, labels = [], [], []
    for k, kind, j in combos:
        def phi(pts, k=k, kind=kind, j=j):
            x, y = pts[:, 0], pts[:, 1]
            if kind == "one":
                fx = np.ones_like(x)
            else:
                fx = (np.cos if kind == "cos" else np.sin)(2 * np.pi * k * x)
            return fx * y**j * np.exp(-(y**2) / (2 * window**2))
        funcs.append(phi)
        norms.append(_estimate_sup(phi, (0.0, 1.0), y_range))
        labels.append(f"{kind}{k}*y^{j}")
    fam = TestFunctionFamily(tuple(funcs), np.array(norms), "cylinder", tuple(labels),
                             {"max_freq": max_freq, "max_degree": max_degree, "window": window})
    return fam if K is None else fam.truncated(K)


def blowup_family(max_freq: int = 3, dir_modes: int = 2, window: float = 0.1,
                  K: int | None = None) -> TestFunctionFamily:
    """Functions on the blown-up torus in ``(x, y, cos 2t, sin 2t)`` coordinates.

    The torus modes of :func:`torus_family` (functions of the projection)
    followed by direction modes ``cos(2 k t)``, ``sin(2 k t)`` multiplied by
    ``exp(-r**2 / (2 window**2))``, where ``r`` is the centred distance to the
    blown-up point.  The window makes the direction modes continuous across
    the torus seams up to ``exp(-1 / (8 window**2))``.
    """
    base = torus_family(max_freq)
    funcs, labels = list(base.functions), list(base.labels)
    norms = list(base.sup_norms)
    for k in range(1, dir_modes + 1):
        for kind in ("cos", "sin"):
            def phi(pts, k=k, kind=kind):
                r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
                ang = np.arctan2(pts[:, 3], pts[:, 2])  # = 2t
                trig = np.cos if kind == "cos" else np.sin
                return trig(k * ang) * np.exp(-r2 / (2 * window**2))
            funcs.append(phi)
            norms.append(1.0)
            labels.append(f"dir-{kind}{k}")
    fam = TestFunctionFamily(tuple(funcs), np.array(norms), "blowup", tuple(labels),
                             {"max_freq": max_freq, "dir_modes": dir_modes, "window": window})
    return fam if K is None else fam.truncated(K)


_FAMILIES = {"torus": torus_family, "cylinder": cylinder_family, "blowup": blowup_family}


def make_family(name: str, **params) -> TestFunctionFamily:
    """Build a named family (``torus``, ``cylinder`` or ``blowup``)."""
    try:
        factory = _FAMILIES[name]
    except KeyError:
        raise ParameterError(f"unknown test-function family {name!r}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# serialization


def measure_to_csv(mu: EmpiricalMeasure) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["weight"] + [f"x{i}" for i in range(mu.dim)])
    for wt, pt in zip(mu.weights, mu.points):
        w.writerow([repr(float(wt))] + [repr(float(c)) for c in pt])
    return buf.getvalue()


def measure_from_csv(text: str, space: str = "plane") -> EmpiricalMeasure:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not rows[0] or rows[0][0].strip() != "weight":
        raise PreconditionError("measure CSV must start with a 'weight,...' header")
    wts, pts = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise PreconditionError(f"line {lineno}: {exc}") from None
        wts.append(vals[0])
        pts.append(vals[1:])
    return EmpiricalMeasure(np.array(pts), np.array(wts), space)


def measure_to_json(mu: EmpiricalMeasure) -> str:
    return json.dumps({"space": mu.space, "weights": mu.weights.tolist(),
                       "points": mu.points.tolist()})


def measure_from_json(text: str) -> EmpiricalMeasure:
    data = json.loads(text)
    return EmpiricalMeasure(np.array(data["points"], dtype=float),
                            np.array(data["weights"], dtype=float), data.get("space", "plane"))
