"""The cat map blown up at its fixed point.

The fixed point ``(0, 0)`` is replaced by the circle of lines through it.
Near that circle two affine charts are used::

    chart 1:  (x, u)  with  y = u x      (u = slope of the line)
    chart 2:  (y, v)  with  x = v y

and a point is kept in chart 1 when ``|u| <= 1``.  For ``A = [[a, b], [c, d]]``
the lift reads ``(x, u) -> (x (a + b u), (c + d u) / (a + b u))`` in chart 1
and ``(y, v) -> (y (c v + d), (a v + b) / (c v + d))`` in chart 2; on the
circle itself (``x = 0``) only the Moebius action on slopes survives.

Torus points are stored by their centred coordinates in ``[-1/2, 1/2]`` so
that points close to the blown-up point keep full relative precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..cocycle import OrbitSegment, periodic_exponents
from ..errors import PreconditionError
from .catmap import CatMap, PeriodicOrbitRecord

NEAR = 0.25  # torus points with max(|x|, |y|) below this get chart coordinates
CHART_METRIC = "sqrt(r**2 + (s - s_fix)**2) in the chart (r, s) holding the fixed slope s_fix"


def _centre(t: float) -> float:
    return t - round(t)


@dataclass(frozen=True)
class BlowupPoint:
    """A torus point other than the origin, or a slope on the exceptional circle.

    ``chart == 0`` marks a torus point with centred coordinates ``(x, y)``;
    ``chart`` 1 or 2 marks an exceptional point with slope ``coord`` (``u``
    or ``v``), always stored with ``|coord| <= 1``.
    """

    x: float = 0.0
    y: float = 0.0
    chart: int = 0
    coord: float = 0.0

    @classmethod
    def torus(cls, x: float, y: float) -> "BlowupPoint":
        cx, cy = _centre(float(x)), _centre(float(y))
        if cx == 0 and cy == 0:
            raise PreconditionError("(0, 0) is blown up; give a slope instead")
        return cls(cx, cy, 0, 0.0)

    @classmethod
    def exceptional(cls, coord: float, chart: int = 1) -> "BlowupPoint":
        if chart not in (1, 2):
            raise PreconditionError("chart must be 1 or 2")
        coord = float(coord)
        if math.isinf(coord):
            return cls(0.0, 0.0, 3 - chart, 0.0)
        if abs(coord) > 1:
            return cls(0.0, 0.0, 3 - chart, 1.0 / coord)
        return cls(0.0, 0.0, chart, coord)

    @property
    def on_fiber(self) -> bool:
        return self.chart != 0

    @property
    def canonical_chart(self) -> int:
        if self.on_fiber:
            return self.chart
        return 1 if abs(self.y) <= abs(self.x) else 2

    def projection(self) -> np.ndarray:
        """Image in ``[0, 1)**2`` under the blow-down map."""
        if self.on_fiber:
            return np.zeros(2)
        p = np.mod([self.x, self.y], 1.0)
        p[p >= 1.0] = 0.0
        return p

    def angle(self) -> float:
        """Direction of the point seen from the origin, in ``[0, pi)``."""
        if self.on_fiber:
            t = math.atan(self.coord) if self.chart == 1 else math.atan2(1.0, self.coord)
        else:
            t = math.atan2(self.y, self.x)
        return t % math.pi

    def chart_coords(self, chart: int) -> np.ndarray:
        """Coordinates in blow-up chart 1 ``(x, u)`` or 2 ``(y, v)``."""
        if self.on_fiber:
            if chart == self.chart:
                return np.array([0.0, self.coord])
            if self.coord == 0:
                raise PreconditionError("slope at infinity in the requested chart")
            return np.array([0.0, 1.0 / self.coord])
        if chart == 1:
            if self.x == 0:
                raise PreconditionError("point outside chart 1")
            return np.array([self.x, self.y / self.x])
        if self.y == 0:
            raise PreconditionError("point outside chart 2")
        return np.array([self.y, self.x / self.y])

    @classmethod
    def from_chart(cls, chart: int, coords) -> "BlowupPoint":
        r, s = float(coords[0]), float(coords[1])
        if r == 0:
            return cls.exceptional(s, chart)
        return cls.torus(r, r * s) if chart == 1 else cls.torus(r * s, r)

    def local(self) -> tuple:
        """``(chart, coords)``: chart coordinates near the circle, else torus ones."""
        if not self.on_fiber and max(abs(self.x), abs(self.y)) >= NEAR:
            return 0, np.array([self.x, self.y])
        c = self.canonical_chart
        return c, self.chart_coords(c)

    def measure_coords(self) -> np.ndarray:
        t = self.angle()
        return np.array([self.x, self.y, math.cos(2 * t), math.sin(2 * t)])


def chart_formula(m: CatMap, chart: int, coords) -> np.ndarray:
    """The lift written in one chart, with no chart switching."""
    (a, b), (c, d) = m.matrix
    r, s = float(coords[0]), float(coords[1])
    if chart == 1:
        den = a + b * s
        return np.array([r * den, (c + d * s) / den])
    den = c * s + d
    return np.array([r * den, (a * s + b) / den])


def blowup_apply(m: CatMap, p: BlowupPoint) -> BlowupPoint:
    """Lift of the cat map; slopes on the circle move by the Moebius map."""
    (a, b), (c, d) = m.matrix
    if p.on_fiber:
        dx, dy = (1.0, p.coord) if p.chart == 1 else (p.coord, 1.0)
        wx, wy = a * dx + b * dy, c * dx + d * dy
        if abs(wy) <= abs(wx):
            return BlowupPoint.exceptional(wy / wx, 1)
        return BlowupPoint.exceptional(wx / wy, 2)
    return BlowupPoint.torus(a * p.x + b * p.y, c * p.x + d * p.y)


def _to_local_inverse(chart: int, coords) -> np.ndarray:
    """``d(x, y) / d(local)``."""
    r, s = coords
    if chart == 0:
        return np.eye(2)
    if chart == 1:
        return np.array([[1.0, 0.0], [s, r]])
    return np.array([[s, r], [1.0, 0.0]])


def _to_local(chart: int, point: BlowupPoint) -> np.ndarray:
    """``d(local) / d(x, y)`` at a torus point."""
    x, y = point.x, point.y
    if chart == 0:
        return np.eye(2)
    if chart == 1:
        return np.array([[1.0, 0.0], [-y / x**2, 1.0 / x]])
    return np.array([[0.0, 1.0], [1.0 / y, -x / y**2]])


class BlowupStep(NamedTuple):
    image: BlowupPoint
    jacobian: np.ndarray
    chart_in: int
    chart_out: int


def blowup_jacobian(m: CatMap, p: BlowupPoint, image: BlowupPoint | None = None) -> BlowupStep:
    """Derivative of the lift in the local coordinates of ``p`` and its image.

    Passing ``image`` (the same point, computed elsewhere) pins the output
    chart to that point's choice, which keeps consecutive steps of a stored
    orbit consistent when rounding puts a point on a chart boundary.
    """
    (a, b), (c, d) = m.matrix
    q = blowup_apply(m, p) if image is None else image
    ci, xi = p.local()
    co, _ = q.local()
    if p.on_fiber:
        s = p.coord
        if p.chart == 1:
            mu = a + b * s
            J = np.diag([mu, 1 / mu**2]) if co == 1 else np.diag([c + d * s, -1 / (c + d * s) ** 2])
        else:
            nu = c * s + d
            J = np.diag([nu, 1 / nu**2]) if co == 2 else np.diag([a * s + b, -1 / (a * s + b) ** 2])
        return BlowupStep(q, J, ci, co)
    J = _to_local(co, q) @ m.as_array() @ _to_local_inverse(ci, xi)
    return BlowupStep(q, J, ci, co)


def numerical_chart_jacobian(m: CatMap, chart: int, coords, h: float = 1e-4) -> np.ndarray:
    """Five-point differences of ``blowup_apply`` read in a single chart."""
    base = np.asarray(coords, dtype=float)

    def f(z):
        return blowup_apply(m, BlowupPoint.from_chart(chart, z)).chart_coords(chart)

    J = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        J[:, k] = (8 * (f(base + e) - f(base - e)) - (f(base + 2 * e) - f(base - 2 * e))) / (12 * h)
    return J


class BlowupFixedPoint(NamedTuple):
    point: BlowupPoint
    eigenvalues: tuple  # (along the x-line, along the circle)
    slope: float
    numerical_jacobian: np.ndarray
    eigen_error: float


def fixed_slopes(m: CatMap) -> tuple:
    """Roots of ``b u**2 + (a - d) u - c = 0``, the eigen-slopes of the matrix."""
    (a, b), (c, d) = m.matrix
    disc = math.sqrt((a - d) ** 2 + 4 * b * c)
    return ((d - a) - disc) / (2 * b), ((d - a) + disc) / (2 * b)


def blowup_fixed_points(m: CatMap) -> tuple:
    """``(p1, p2)``: the unstable-slope point and the stable-slope point.

    At the slope ``u`` with ``A (1, u) = mu (1, u)`` the lift has derivative
    ``diag(mu, mu**-2)`` in chart coordinates, giving ``(lam, lam**-2)`` at
    ``p1`` and ``(1/lam, lam**2)`` at ``p2``.  Each pair is compared with a
    finite-difference Jacobian of :func:`blowup_apply`.
    """
    (a, b), (c, d) = m.matrix
    out = {}
    for u in fixed_slopes(m):
        mu = a + b * u
        pt = BlowupPoint.exceptional(u, 1)
        num = numerical_chart_jacobian(m, pt.chart, pt.chart_coords(pt.chart))
        pair = (mu, 1 / mu**2)
        num_eigs = np.sort_complex(np.linalg.eigvals(num))
        err = float(np.max(np.abs(num_eigs - np.sort_complex(np.array(pair, dtype=complex)))))
        key = "p1" if abs(mu) > 1 else "p2"
        out[key] = BlowupFixedPoint(pt, pair, u, num, err)
    return out["p1"], out["p2"]


class OccupationSummary(NamedTuple):
    radius: float
    count_p1: int
    count_p2: int
    ratio: float | None
    metric: str


class LiftedOrbit(NamedTuple):
    points: tuple
    segment: OrbitSegment
    exponents: np.ndarray
    occupation: OccupationSummary


def chart_distance(p: BlowupPoint, fixed: BlowupPoint) -> float:
    """Distance to an exceptional point measured in that point's chart."""
    chart = fixed.chart
    try:
        r, s = p.chart_coords(chart)
    except PreconditionError:
        return math.inf
    return math.hypot(r, s - fixed.coord)


def occupation_counts(m: CatMap, points, radius: float) -> OccupationSummary:
    p1, p2 = blowup_fixed_points(m)
    n1 = sum(chart_distance(p, p1.point) <= radius for p in points)
    n2 = sum(chart_distance(p, p2.point) <= radius for p in points)
    return OccupationSummary(radius, int(n1), int(n2), n1 / n2 if n2 else None, CHART_METRIC)


def blowup_lift_orbit(m: CatMap, orbit: PeriodicOrbitRecord, radius: float = 0.1) -> LiftedOrbit:
    """Lift a periodic torus orbit that avoids the origin."""
    pts = []
    for xy in orbit.points:
        if xy[0] % 1 == 0 and xy[1] % 1 == 0:
            raise PreconditionError("the orbit passes through the blown-up point")
        pts.append(BlowupPoint.torus(float(xy[0]), float(xy[1])))
    coords, jacs = [], []
    for k, p in enumerate(pts):
        step = blowup_jacobian(m, p, pts[(k + 1) % len(pts)])
        coords.append(p.local()[1])
        jacs.append(step.jacobian)
    coords.append(coords[0])
    seg = OrbitSegment(np.array(coords), np.array(jacs), period=len(pts))
    return LiftedOrbit(tuple(pts), seg, periodic_exponents(seg), occupation_counts(m, pts, radius))
