"""Hyperbolic toral automorphisms and their rational periodic orbits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..cocycle import OrbitSegment, periodic_exponents
from ..errors import ParameterError
from ..wstar import EmpiricalMeasure


@dataclass(frozen=True)
class CatMap:
    """Integer matrix ``[[a, b], [c, d]]`` with determinant 1 and ``|trace| > 2``."""

    matrix: tuple = ((2, 1), (1, 1))

    def __post_init__(self):
        try:
            (a, b), (c, d) = self.matrix
        except (TypeError, ValueError):
            raise ParameterError("matrix must be 2x2") from None
        if any(int(v) != v for v in (a, b, c, d)):
            raise ParameterError("matrix entries must be integers")
        mat = ((int(a), int(b)), (int(c), int(d)))
        object.__setattr__(self, "matrix", mat)
        if mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0] != 1:
            raise ParameterError("determinant must be exactly 1")
        if self.trace ** 2 <= 4:
            raise ParameterError("need |trace| > 2 for a hyperbolic matrix")

    @property
    def trace(self) -> int:
        return self.matrix[0][0] + self.matrix[1][1]

    @property
    def lam(self) -> float:
        """Eigenvalue of largest modulus (negative when the trace is)."""
        t = self.trace
        return (t + math.copysign(math.sqrt(t * t - 4), t)) / 2

    @property
    def log_lambda(self) -> float:
        return math.log(abs(self.lam))

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    def eigendirections(self):
        """Unit vectors ``(stable, unstable)``."""
        vals, vecs = np.linalg.eig(self.as_array())
        order = np.argsort(np.abs(vals))
        out = []
        for k in order:
            v = vecs[:, k] / np.linalg.norm(vecs[:, k])
            out.append(v if v[0] > 0 or (v[0] == 0 and v[1] > 0) else -v)
        return out[0], out[1]


def _frac_mod1(q: Fraction) -> Fraction:
    return q - math.floor(q)


def cat_apply(m: CatMap, x):
    """``A x mod 1``.

    Rational input (ints or ``Fraction``) is handled exactly and returns a
    tuple of ``Fraction``; float input may be a single point or an ``(n, 2)``
    array.
    """
    (a, b), (c, d) = m.matrix
    if isinstance(x, (tuple, list)) and len(x) == 2 and all(isinstance(v, (int, Fraction)) for v in x):
        x0, x1 = Fraction(x[0]), Fraction(x[1])
        return (_frac_mod1(a * x0 + b * x1), _frac_mod1(c * x0 + d * x1))
    arr = np.asarray(x, dtype=float)
    out = np.mod(arr @ m.as_array().T, 1.0)
    out[out >= 1.0] = 0.0
    return out


def cat_step(m: CatMap):
    """``x -> (f(x), df(x))`` for building orbit segments."""
    A = m.as_array()
    return lambda x: (cat_apply(m, x), A)


def matrix_order_mod(m: CatMap, q: int) -> int:
    """Multiplicative order of the matrix in ``GL(2, Z/q)``."""
    if q < 1:
        raise ParameterError("q must be >= 1")
    (a, b), (c, d) = m.matrix
    P = ((a % q, b % q), (c % q, d % q))
    ident = ((1 % q, 0), (0, 1 % q))
    k = 1
    while P != ident:
        (p, r), (s, t) = P
        P = (((a * p + b * s) % q, (a * r + b * t) % q), ((c * p + d * s) % q, (c * r + d * t) % q))
        k += 1
    return k


@dataclass(frozen=True, eq=False)
class PeriodicOrbitRecord:
    representative: tuple
    period: int
    exponents: np.ndarray
    measure: EmpiricalMeasure
    points: tuple = ()
    segment: OrbitSegment | None = None


def _cat_segment(m: CatMap, pts_exact) -> OrbitSegment:
    pts = np.array([[float(p[0]), float(p[1])] for p in pts_exact + [pts_exact[0]]])
    jac = np.repeat(m.as_array()[None], len(pts_exact), axis=0)
    return OrbitSegment(pts, jac, period=len(pts_exact))


def cat_orbit(m: CatMap, x0) -> PeriodicOrbitRecord:
    """Exact periodic orbit through a rational point.

    Floats are read by their shortest decimal form, so ``0.2`` means ``1/5``.
    """
    start = tuple(_frac_mod1(Fraction(repr(c)) if isinstance(c, float) else Fraction(c)) for c in x0[:2])
    pts = [start]
    x = cat_apply(m, start)
    while x != start:
        pts.append(x)
        x = cat_apply(m, x)
    seg = _cat_segment(m, pts)
    mu = EmpiricalMeasure.uniform([[float(p[0]), float(p[1])] for p in pts], "torus")
    return PeriodicOrbitRecord(start, len(pts), periodic_exponents(seg), mu, tuple(pts), seg)


def cat_periodic_orbits(m: CatMap, q: int) -> list:
    """All orbits of the grid ``(i/q, j/q)``, ordered by their smallest point.

    The grid is invariant and the action on it is a permutation, so the
    orbits partition the ``q**2`` points.
    """
    if int(q) != q or q < 1:
        raise ParameterError("q must be a positive integer")
    q = int(q)
    (a, b), (c, d) = m.matrix
    seen = np.zeros((q, q), dtype=bool)
    records = []
    for i in range(q):
        for j in range(q):
            if seen[i, j]:
                continue
            cyc = []
            u, v = i, j
            while not seen[u, v]:
                seen[u, v] = True
                cyc.append((u, v))
                u, v = (a * u + b * v) % q, (c * u + d * v) % q
            pts = [(Fraction(u, q), Fraction(v, q)) for u, v in cyc]
            seg = _cat_segment(m, pts)
            mu = EmpiricalMeasure.uniform([[u / q, v / q] for u, v in cyc], "torus")
            records.append(PeriodicOrbitRecord(pts[0], len(pts), periodic_exponents(seg), mu, tuple(pts), seg))
    return records
