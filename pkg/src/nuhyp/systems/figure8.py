"""Time-1 map of the flow of ``H(x, y) = y**2 - cos(4 pi x)``.

The flow is integrated with kick-drift-kick leapfrog, which is symplectic, so
the Jacobian of the discrete map (propagated through the same kicks and
drifts) has determinant 1 up to rounding.  The map conserves a modified
energy ``H + O(h**2)`` rather than ``H`` itself; :func:`drift_bound` gives the
resulting bound on ``|H(f(p)) - H(p)|``.

Saddles sit at ``(1/4, 0)`` and ``(3/4, 0)``, centres at ``(0, 0)`` and
``(1/2, 0)``.  Levels ``H = 1 - eps`` inside the eye around ``x = 1/2`` are
closed curves that spend longer and longer near the saddles as ``eps -> 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numba import njit
from scipy.optimize import brentq

from ..cocycle import OrbitSegment
from ..errors import ParameterError
from ..wstar import EmpiricalMeasure

FOUR_PI = 4.0 * math.pi
SADDLES = ((0.25, 0.0), (0.75, 0.0))
CENTRES = ((0.0, 0.0), (0.5, 0.0))
SADDLE_RATE = math.sqrt(32.0) * math.pi  # eigenvalues of [[0, 2], [16 pi^2, 0]]


@njit(cache=True)
def _two_prod(a, b):
    p = a * b
    t = 134217729.0 * a
    ah = t - (t - a)
    al = a - ah
    t = 134217729.0 * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True)
def _axpy_dd(xh, xl, k, yh, yl):
    """``x + k * y`` in double-double arithmetic."""
    p, pe = _two_prod(k, yh)
    pe += k * yl
    s = xh + p
    bb = s - xh
    se = (xh - (s - bb)) + (p - bb)
    se += xl + pe
    hi = s + se
    return hi, se - (hi - s)


@njit(cache=True)
def _leapfrog(x, y, M, direction):
    """One unit of time (``direction=-1``: backwards) with its Jacobian.

    Every kick and drift is a shear with determinant exactly 1, whatever
    its rounded coefficient, so the product is accumulated in double-double
    to keep the determinant of the returned matrix at 1 up to final rounding.
    """
    h = direction / M
    a, al, b, bl = 1.0, 0.0, 0.0, 0.0  # first row
    c, cl, d, dl = 0.0, 0.0, 1.0, 0.0  # second row
    for _ in range(M):
        # half kick: y -= (h/2) * 4 pi sin(4 pi x)
        k = -0.5 * h * FOUR_PI * FOUR_PI * math.cos(FOUR_PI * x)
        y -= 0.5 * h * FOUR_PI * math.sin(FOUR_PI * x)
        c, cl = _axpy_dd(c, cl, k, a, al)
        d, dl = _axpy_dd(d, dl, k, b, bl)
        # drift: x += 2 h y
        x += 2.0 * h * y
        a, al = _axpy_dd(a, al, 2.0 * h, c, cl)
        b, bl = _axpy_dd(b, bl, 2.0 * h, d, dl)
        k = -0.5 * h * FOUR_PI * FOUR_PI * math.cos(FOUR_PI * x)
        y -= 0.5 * h * FOUR_PI * math.sin(FOUR_PI * x)
        c, cl = _axpy_dd(c, cl, k, a, al)
        d, dl = _axpy_dd(d, dl, k, b, bl)
    return x, y, a, b, c, d


@njit(cache=True)
def _trajectory(x, y, M, T):
    pts = np.empty((T + 1, 2))
    jac = np.empty((T, 2, 2))
    pts[0, 0], pts[0, 1] = x, y
    for t in range(T):
        x, y, a, b, c, d = _leapfrog(x, y, M, 1.0)
        pts[t + 1, 0], pts[t + 1, 1] = x, y
        jac[t, 0, 0], jac[t, 0, 1], jac[t, 1, 0], jac[t, 1, 1] = a, b, c, d
    return pts, jac


def hamiltonian(p) -> np.ndarray | float:
    p = np.asarray(p, dtype=float)
    return p[..., 1] ** 2 - np.cos(FOUR_PI * p[..., 0])


@dataclass(frozen=True)
class Figure8System:
    """``M`` leapfrog substeps per unit time.

    ``perturbation`` is an optional hook ``p -> (delta, d_delta)`` applied
    after the flow, so the map becomes ``p -> g(p) + delta(g(p))``.  No
    particular perturbation is built in.
    """

    M: int = 64
    perturbation: Callable | None = None

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ParameterError("M must be a positive integer")

    @property
    def h(self) -> float:
        return 1.0 / self.M


def drift_bound(M: int) -> float:
    """A priori bound on ``|H(f(p)) - H(p)|`` over the band ``H <= 1``.

    Leapfrog conserves ``H + h**2 G`` to fourth order with
    ``|G| <= (|dT|**2 |d2V| / 12 + |dV|**2 |d2T| / 24)`` for ``T = y**2`` and
    ``V = -cos(4 pi x)``.  With ``y**2 <= 2`` this gives
    ``|dT|**2 <= 8``, ``|d2V| <= 16 pi**2``, ``|dV|**2 <= 16 pi**2``,
    ``|d2T| = 2``; the bound is twice the resulting ``h**2 |G|``.
    """
    g = 8.0 * 16 * math.pi**2 / 12 + 16 * math.pi**2 * 2.0 / 24
    return 2.0 * g / M**2


class Time1Step(NamedTuple):
    point: np.ndarray
    jacobian: np.ndarray


def figure8_time1(s: Figure8System, p, inverse: bool = False) -> Time1Step:
    """Image of ``p`` under the time-1 map (or its inverse) and the Jacobian."""
    x, y, a, b, c, d = _leapfrog(float(p[0]), float(p[1]), int(s.M), -1.0 if inverse else 1.0)
    pt = np.array([x, y])
    J = np.array([[a, b], [c, d]])
    if s.perturbation is not None and not inverse:
        delta, d_delta = s.perturbation(pt)
        J = (np.eye(2) + np.asarray(d_delta)) @ J
        pt = pt + np.asarray(delta)
    return Time1Step(pt, J)


def energy_change(s: Figure8System, p) -> float:
    return float(hamiltonian(figure8_time1(s, p).point) - hamiltonian(p))


def level_start(eps: float) -> np.ndarray:
    """Point of ``{H = 1 - eps}`` with ``y = 0`` and ``1/4 < x < 1/2``."""
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    x = brentq(lambda t: -math.cos(FOUR_PI * t) - (1 - eps), 0.25, 0.5, xtol=1e-15)
    return np.array([x, 0.0])


def level_curve_orbit(s: Figure8System, eps: float, T: int) -> OrbitSegment:
    """``T`` steps of the time-1 map from :func:`level_start`."""
    if int(T) != T or T < 1:
        raise ParameterError("T must be a positive integer")
    x0 = level_start(eps)
    if s.perturbation is None:
        pts, jac = _trajectory(x0[0], x0[1], int(s.M), int(T))
        return OrbitSegment(pts, jac)
    return OrbitSegment.from_map(lambda p: figure8_time1(s, p), x0, int(T))


def level_curve_measure(s: Figure8System, eps: float, T: int, orbit: OrbitSegment | None = None) -> EmpiricalMeasure:
    """Uniform measure on the first ``T`` points of the level-curve trajectory."""
    orbit = orbit if orbit is not None else level_curve_orbit(s, eps, T)
    return EmpiricalMeasure.uniform(orbit.points[:T], "cylinder")


def saddle_measure() -> EmpiricalMeasure:
    """Half the mass at each saddle."""
    return EmpiricalMeasure(np.array(SADDLES), [0.5, 0.5], "cylinder")


def leapfrog_saddle_rate(M: int) -> float:
    """Exact time-1 expansion rate of the discretized linearization at a saddle."""
    hw = SADDLE_RATE / M
    # one KDK step of x'' = w^2 x has trace 2 + (h w)^2
    return M * math.acosh(1 + hw * hw / 2)


@njit(cache=True)
def _flow_points(P, M, direction):
    out = np.empty_like(P)
    for i in range(P.shape[0]):
        x, y, _, _, _, _ = _leapfrog(P[i, 0], P[i, 1], M, direction)
        out[i, 0], out[i, 1] = x, y
    return out


def figure8_points(s: Figure8System, P, inverse: bool = False) -> np.ndarray:
    """Time-1 map (or inverse) applied to each row of ``P``; no perturbation."""
    P = np.ascontiguousarray(np.atleast_2d(P), dtype=float)
    return _flow_points(P, int(s.M), -1.0 if inverse else 1.0)
