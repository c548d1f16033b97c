"""Stable and unstable curves of planar saddles, crossings, and intersection classes.

Curves are grown in *growth coordinates*: a covering space on which the map
is a smooth planar map (the plane over the torus, the strip over the
cylinder, polar coordinates ``(r, t)`` over the blown-up torus).  Crossings
are then looked for in *canonical coordinates*, a small atlas of patches on
the actual phase space; each point carries a patch id and segments that
change patch or jump across a seam are ignored.

Growth follows the usual fundamental-domain scheme.  The seed segment
``s(t) = x0 + sign * delta * mu**(t - 1) * v`` for ``t`` in ``[0, 1]`` spans
one fundamental domain of the linearization (``mu`` is the expanding
multiplier of the map being iterated); the ``k``-th domain is the image of
the seed under ``k`` iterates, and new points are always produced by
iterating a seed parameter, never by interpolation.  Replacing the true
local manifold by its tangent line costs ``O(delta**2)`` in position.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParameterError, PreconditionError
from .systems.blowup import NEAR, BlowupPoint
from .systems.catmap import CatMap
from .systems.figure8 import Figure8System, figure8_points, figure8_time1

TURN_MAX = 0.2
SEAM_JUMP = 0.5
MAX_POINTS = 400_000
PARAM_RESOLUTION = 1e-13


# ---------------------------------------------------------------------------
# systems seen by the manifold code


class PlanarSystem:
    """Interface: a diffeomorphism in growth coordinates plus an atlas."""

    name = "plane"
    seam_jump = math.inf  # canonical coordinates have no seams

    def forward(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, p) -> np.ndarray:
        raise NotImplementedError

    def lattice_shift(self, delta: np.ndarray) -> np.ndarray:
        """Deck translation closest to ``delta`` (zero when there is none)."""
        return np.zeros(2)

    def canonical(self, P: np.ndarray):
        """``(patch ids, coordinates)`` for each row of ``P``."""
        P = np.atleast_2d(P)
        return np.zeros(len(P), dtype=int), P.copy()

    def distance(self, p, q) -> float:
        return float(np.hypot(*(np.asarray(p, float) - np.asarray(q, float))))


class LinearPlaneSystem(PlanarSystem):
    name = "linear"

    def __init__(self, matrix):
        self.A = np.asarray(matrix, dtype=float)
        self.Ainv = np.linalg.inv(self.A)

    def forward(self, P):
        return np.atleast_2d(P) @ self.A.T

    def inverse(self, P):
        return np.atleast_2d(P) @ self.Ainv.T

    def jacobian(self, p):
        return self.A


class TorusLinearSystem(LinearPlaneSystem):
    """A cat map acting on the plane; the torus is the quotient by ``Z**2``."""

    name = "catmap"

    seam_jump = SEAM_JUMP

    def __init__(self, m: CatMap):
        super().__init__(m.as_array())
        self.catmap = m

    def lattice_shift(self, delta):
        return np.round(delta)

    def canonical(self, P):
        C = np.mod(np.atleast_2d(P), 1.0)
        C[C >= 1.0] = 0.0
        return np.zeros(len(C), dtype=int), C

    def distance(self, p, q):
        d = np.asarray(p, float) - np.asarray(q, float)
        d -= np.round(d)
        return float(np.hypot(*d))


class Figure8Flow(PlanarSystem):
    """Time-1 figure-8 map on the strip ``R x R`` covering the cylinder."""

    name = "figure8"

    seam_jump = SEAM_JUMP

    def __init__(self, s: Figure8System):
        self.s = s

    def forward(self, P):
        if self.s.perturbation is None:
            return figure8_points(self.s, P)
        return np.array([figure8_time1(self.s, p).point for p in np.atleast_2d(P)])

    def inverse(self, P):
        if self.s.perturbation is not None:
            raise PreconditionError("the inverse of a perturbed map is not available")
        return figure8_points(self.s, P, inverse=True)

    def jacobian(self, p):
        return figure8_time1(self.s, p).jacobian

    def lattice_shift(self, delta):
        return np.array([np.round(delta[0]), 0.0])

    def canonical(self, P):
        C = np.atleast_2d(P).copy()
        C[:, 0] = np.mod(C[:, 0], 1.0)
        return np.zeros(len(C), dtype=int), C

    def distance(self, p, q):
        d = np.asarray(p, float) - np.asarray(q, float)
        d[0] -= np.round(d[0])
        return float(np.hypot(*d))


class BlowupSystem(PlanarSystem):
    """The blown-up cat map in polar growth coordinates ``(r, t)``.

    ``(r, t)`` stands for the plane point ``r (cos t, sin t)`` and, at
    ``r = 0``, for the direction ``t`` on the exceptional circle; it covers
    the plane blown up at the origin.  The map is
    ``(r, t) -> (r |A e_t|, t + angle(e_t, A e_t))``.  Canonical patches:
    0 is the torus away from the origin, 1 and 2 are the blow-up charts
    ``(x, u)`` and ``(y, v)`` within ``NEAR`` of it.
    """

    name = "blowup"

    seam_jump = SEAM_JUMP

    def __init__(self, m: CatMap):
        self.catmap = m
        self.A = m.as_array()
        self.Ainv = np.linalg.inv(self.A)

    @staticmethod
    def _apply(M, P):
        P = np.atleast_2d(P)
        r, t = P[:, 0], P[:, 1]
        e = np.stack([np.cos(t), np.sin(t)], axis=1)
        w = e @ M.T
        cross = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]
        dot = np.sum(e * w, axis=1)
        return np.stack([r * np.hypot(w[:, 0], w[:, 1]), t + np.arctan2(cross, dot)], axis=1)

    def forward(self, P):
        return self._apply(self.A, P)

    def inverse(self, P):
        return self._apply(self.Ainv, P)

    def jacobian(self, p):
        r, t = float(p[0]), float(p[1])
        e = np.array([math.cos(t), math.sin(t)])
        de = np.array([-math.sin(t), math.cos(t)])
        w, dw = self.A @ e, self.A @ de
        n = math.hypot(*w)
        det = float(np.linalg.det(self.A))
        return np.array([[n, r * float(w @ dw) / n], [0.0, det / n**2]])

    def points(self, P) -> list:
        """:class:`BlowupPoint` for each row of growth coordinates."""
        out = []
        for r, t in np.atleast_2d(P):
            c, s = math.cos(t), math.sin(t)
            if r != 0:
                out.append(BlowupPoint.torus(r * c, r * s))
            elif abs(s) <= abs(c):
                out.append(BlowupPoint.exceptional(s / c, 1))
            else:
                out.append(BlowupPoint.exceptional(c / s, 2))
        return out

    def canonical(self, P):
        P = np.atleast_2d(P)
        r, t = P[:, 0], P[:, 1]
        c, s = np.cos(t), np.sin(t)
        X, Y = r * c, r * s
        xc, yc = X - np.round(X), Y - np.round(Y)
        patch = np.zeros(len(P), dtype=int)
        C = np.empty((len(P), 2))
        near = np.maximum(np.abs(xc), np.abs(yc)) < NEAR
        fiber = r == 0
        # slope representation: chart 1 when |slope| <= 1
        on1 = np.where(fiber, np.abs(s) <= np.abs(c), np.abs(yc) <= np.abs(xc))
        with np.errstate(divide="ignore", invalid="ignore"):
            u_fib, v_fib = s / c, c / s
            u_pt, v_pt = yc / xc, xc / yc
        m1 = (near | fiber) & on1
        m2 = (near | fiber) & ~on1
        patch[m1], patch[m2] = 1, 2
        C[m1, 0] = np.where(fiber[m1], 0.0, xc[m1])
        C[m1, 1] = np.where(fiber[m1], u_fib[m1], u_pt[m1])
        C[m2, 0] = np.where(fiber[m2], 0.0, yc[m2])
        C[m2, 1] = np.where(fiber[m2], v_fib[m2], v_pt[m2])
        far = patch == 0
        C[far, 0], C[far, 1] = np.mod(X[far], 1.0), np.mod(Y[far], 1.0)
        return patch, C

    def distance(self, p, q):
        pp, cp = self.canonical(p)
        pq, cq = self.canonical(q)
        if pp[0] != pq[0]:
            return math.inf
        d = cp[0] - cq[0]
        if pp[0] == 0:
            d -= np.round(d)
        return float(np.hypot(*d))


# ---------------------------------------------------------------------------
# saddles


@dataclass(frozen=True, eq=False)
class SaddleRecord:
    """A hyperbolic periodic point of a planar system, in growth coordinates.

    ``shift`` is the deck translation with ``f^period(point) = point + shift``
    in the covering space, so ``p -> f^period(p) - shift`` fixes ``point``.
    """

    point: np.ndarray
    period: int
    eigenvalues: tuple  # (stable, unstable)
    eigenvectors: tuple  # unit vectors, same order
    shift: np.ndarray = field(default_factory=lambda: np.zeros(2))
    label: str = ""
    residual: float = 0.0

    @property
    def s_index(self) -> int:
        return 1


def return_map(system: PlanarSystem, saddle: SaddleRecord, inverse: bool = False):
    """``f^period - shift`` (or its inverse) as a batch map."""
    def fwd(P):
        for _ in range(saddle.period):
            P = system.forward(P)
        return P - saddle.shift

    def inv(P):
        P = np.atleast_2d(P) + saddle.shift
        for _ in range(saddle.period):
            P = system.inverse(P)
        return P

    return inv if inverse else fwd


def make_saddle(system: PlanarSystem, point, period: int = 1, label: str = "",
                tol: float = 1e-9) -> SaddleRecord:
    """Build and verify a saddle record from a periodic point.

    The return Jacobian is the product of the one-step Jacobians along the
    orbit; the eigenpair residual ``|J v - lam v| / |J|`` must be below
    ``tol`` and the eigenvalues must satisfy ``|stable| < 1 < |unstable|``.
    """
    x0 = np.asarray(point, dtype=float)
    x = x0[None]
    J = np.eye(2)
    for _ in range(period):
        J = system.jacobian(x[0]) @ J
        x = system.forward(x)
    shift = system.lattice_shift(x[0] - x0)
    if system.distance(x[0], x0) > 1e-8:
        raise PreconditionError(f"point does not return after {period} steps")
    # eigenvalues from trace and det: robust for large multipliers
    tr, det = np.trace(J), np.linalg.det(J)
    disc = tr * tr - 4 * det
    if disc <= 0:
        raise PreconditionError("return map is not hyperbolic (complex or repeated eigenvalues)")
    big = (tr + math.copysign(math.sqrt(disc), tr)) / 2
    small = det / big
    if not abs(small) < 1 < abs(big):
        raise PreconditionError("return map is not of saddle type")
    vecs, res = [], 0.0
    for lam in (small, big):
        M = J - lam * np.eye(2)
        # null vector of the 2x2 singular matrix: orthogonal to its largest row
        row = M[np.argmax(np.linalg.norm(M, axis=1))]
        v = np.array([-row[1], row[0]])
        v /= np.linalg.norm(v)
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = -v
        res = max(res, float(np.linalg.norm(J @ v - lam * v) / np.linalg.norm(J)))
        vecs.append(v)
    if res > tol:
        raise PreconditionError(f"eigenpair residual {res:.3g} exceeds {tol}")
    return SaddleRecord(x0, period, (small, big), tuple(vecs), shift, label, res)


# ---------------------------------------------------------------------------
# growth


@dataclass(frozen=True, eq=False)
class ManifoldCurve:
    """One branch of a stable or unstable curve as an ordered polyline.

    ``points`` are growth coordinates starting at the saddle.  ``partial``
    flags a curve that stopped before its budget for lack of resolution;
    ``converged`` flags one that runs into a point (typically another
    saddle) before using its budget.
    """

    kind: str  # "stable" | "unstable"
    sign: int
    points: np.ndarray
    arclength: float
    saddle: SaddleRecord
    system: PlanarSystem
    partial: bool = False
    converged: bool = False
    reason: str = ""
    h_min: float = 0.0

    @property
    def branch(self) -> tuple:
        return self.kind, self.sign

    def canonical(self):
        return self.system.canonical(self.points)


def _turn_angles(P):
    d = np.diff(P, axis=0)
    a = np.arctan2(d[:, 1], d[:, 0])
    turn = np.abs(np.angle(np.exp(1j * np.diff(a))))
    return turn  # turn[i] is the angle at point i+1


def _chord_deviation(a, m, b):
    ab = b - a
    L = np.hypot(ab[:, 0], ab[:, 1])
    cross = np.abs(ab[:, 0] * (m[:, 1] - a[:, 1]) - ab[:, 1] * (m[:, 0] - a[:, 0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        dev = np.where(L > 0, cross / L, np.hypot(m[:, 0] - a[:, 0], m[:, 1] - a[:, 1]))
    return dev


def grow_manifold(system: PlanarSystem, saddle: SaddleRecord, kind: str, sign: int = 1,
                  budget: float = 10.0, tol: float = 1e-6, h_max: float = 0.05, h_min: float = 1e-9,
                  seed_scale: float = 1e-6, max_domains: int = 200) -> ManifoldCurve:
    """Continue one branch of ``W^kind(saddle)`` up to arclength ``budget``.

    The unstable branch iterates the return map, the stable branch its
    inverse; a negative multiplier is handled by iterating twice.  Points are
    added where consecutive spacing exceeds ``h_max``, where the turn angle
    exceeds 0.2 rad, or where the image of the parameter midpoint is further
    than ``tol`` from the chord.  Refinement stops at spacing ``h_min``.
    """
    if kind not in ("stable", "unstable"):
        raise ParameterError("kind must be 'stable' or 'unstable'")
    if sign not in (1, -1):
        raise ParameterError("sign must be +1 or -1")
    if not budget > 0 or not tol > 0 or not 0 < h_min < h_max:
        raise ParameterError("need budget > 0, tol > 0 and 0 < h_min < h_max")
    lam_s, lam_u = saddle.eigenvalues
    if not abs(lam_s) < 1 < abs(lam_u):
        raise PreconditionError("saddle is not hyperbolic")
    idx = 1 if kind == "unstable" else 0
    mult = lam_u if kind == "unstable" else 1.0 / lam_s
    base_map = return_map(system, saddle, inverse=(kind == "stable"))
    if mult < 0:
        g = lambda P: base_map(base_map(P))  # noqa: E731
        mult = mult * mult
    else:
        g = base_map
    x0 = saddle.point
    v = saddle.eigenvectors[idx] * sign
    delta = seed_scale * min(mult - 1.0, 1.0)

    def seed(t):
        return x0[None] + (delta * mult ** (np.asarray(t) - 1.0))[:, None] * v[None]

    def image(t, k):
        P = seed(t)
        for _ in range(k):
            P = g(P)
        return P

    pts = [x0[None]]
    total = 0.0
    last = x0
    partial = converged = False
    reason = "budget reached"
    for k in range(max_domains):
        ts = np.linspace(0.0, 1.0, 9)
        P = image(ts, k)
        while True:
            mids = 0.5 * (ts[:-1] + ts[1:])
            M = image(mids, k)
            seg = np.hypot(*(P[1:] - P[:-1]).T)
            dev = _chord_deviation(P[:-1], M, P[1:])
            need = (seg > h_max) | (dev > tol)
            if len(P) >= 3:
                # a sharp turn at a point refines both neighbouring gaps
                sharp = _turn_angles(P) > TURN_MAX
                bad = np.zeros(len(P) - 1, dtype=bool)
                bad[:-1] |= sharp
                bad[1:] |= sharp
                need |= bad
            need &= seg > h_min
            # gaps past the remaining budget will be cut anyway
            reach = total + np.cumsum(np.concatenate([[np.hypot(*(P[0] - last))], seg]))
            beyond = np.flatnonzero(reach[1:] >= budget)
            if beyond.size:
                need[beyond[0] + 1:] = False
            gap_ok = (ts[1:] - ts[:-1]) > PARAM_RESOLUTION
            if np.any(need & ~gap_ok):
                partial, reason = True, "parameter resolution exhausted"
            need &= gap_ok
            if not need.any():
                break
            ins = np.flatnonzero(need)
            ts = np.insert(ts, ins + 1, mids[ins])
            P = np.insert(P, ins + 1, M[ins], axis=0)
            if sum(len(p) for p in pts) + len(P) > MAX_POINTS:
                partial, reason = True, "point limit reached"
                break
        if k > 0:
            P = P[1:]  # approximately repeats the previous domain's end point
        steps = np.hypot(*np.diff(np.vstack([last[None], P]), axis=0).T)
        cum = total + np.cumsum(steps)
        if cum[-1] >= budget:
            cut = int(np.searchsorted(cum, budget)) + 1
            pts.append(P[:cut])
            total = float(cum[cut - 1])
            break
        pts.append(P)
        domain_len = cum[-1] - total
        total = float(cum[-1])
        last = P[-1]
        if partial:
            break
        if k > 0 and domain_len < 1e-3 * tol:
            converged, reason = True, "converged to a point"
            break
    else:
        partial, reason = True, "domain limit reached"
    return ManifoldCurve(kind, sign, np.vstack(pts), total, saddle, system, partial, converged, reason, h_min)


def grow_both(system, saddle, kind, **kw) -> list:
    return [grow_manifold(system, saddle, kind, s, **kw) for s in (1, -1)]


# ---------------------------------------------------------------------------
# crossings


class Crossing(NamedTuple):
    patch: int
    point: tuple
    angle: float
    segments: tuple


def _segments(curve: ManifoldCurve):
    patch, C = curve.canonical()
    a, b = C[:-1], C[1:]
    ok = (patch[:-1] == patch[1:]) & np.all(np.isfinite(C[:-1]) & np.isfinite(C[1:]), axis=1)
    ok &= np.all(np.abs(b - a) < curve.system.seam_jump, axis=1)
    idx = np.flatnonzero(ok)
    return patch[:-1][idx], a[idx], b[idx], idx


def transverse_intersections(c1: ManifoldCurve, c2: ManifoldCurve, angle_min: float = 1e-3,
                             exclude: Sequence = (), exclude_radius: float = 0.0) -> list:
    """Crossings of two polylines at angle at least ``angle_min`` (radians).

    Works in canonical coordinates, patch by patch, with a uniform spatial
    hash.  Crossings closer than ``h_min`` in the same patch are merged;
    crossings within ``exclude_radius`` of a point of ``exclude`` (growth
    coordinates, compared in canonical ones) are dropped.
    """
    if not angle_min > 0:
        raise ParameterError("angle_min must be positive")
    p1, a1, b1, i1 = _segments(c1)
    p2, a2, b2, i2 = _segments(c2)
    if len(a1) == 0 or len(a2) == 0:
        return []
    cell = max(float(np.max(np.abs(b1 - a1))), float(np.max(np.abs(b2 - a2))), 1e-12)
    grid = defaultdict(list)
    lo1 = np.floor(np.minimum(a1, b1) / cell).astype(np.int64)
    hi1 = np.floor(np.maximum(a1, b1) / cell).astype(np.int64)
    for s in range(len(a1)):
        for gx in range(lo1[s, 0], hi1[s, 0] + 1):
            for gy in range(lo1[s, 1], hi1[s, 1] + 1):
                grid[(p1[s], gx, gy)].append(s)
    lo2 = np.floor(np.minimum(a2, b2) / cell).astype(np.int64)
    hi2 = np.floor(np.maximum(a2, b2) / cell).astype(np.int64)
    pairs_a, pairs_b = [], []
    for s in range(len(a2)):
        cand = set()
        for gx in range(lo2[s, 0], hi2[s, 0] + 1):
            for gy in range(lo2[s, 1], hi2[s, 1] + 1):
                cand.update(grid.get((p2[s], gx, gy), ()))
        pairs_a.extend(cand)
        pairs_b.extend([s] * len(cand))
    if not pairs_a:
        return []
    ia, ib = np.array(pairs_a), np.array(pairs_b)
    P, R = a1[ia], b1[ia] - a1[ia]
    Q, W = a2[ib], b2[ib] - a2[ib]
    den = R[:, 0] * W[:, 1] - R[:, 1] * W[:, 0]
    nr, nw = np.hypot(R[:, 0], R[:, 1]), np.hypot(W[:, 0], W[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        sin = np.abs(den) / (nr * nw)
        QP = Q - P
        s_par = (QP[:, 0] * W[:, 1] - QP[:, 1] * W[:, 0]) / den
        u_par = (QP[:, 0] * R[:, 1] - QP[:, 1] * R[:, 0]) / den
    eps = 1e-12
    hit = (sin > 0) & (s_par >= -eps) & (s_par <= 1 + eps) & (u_par >= -eps) & (u_par <= 1 + eps)
    angle = np.arcsin(np.clip(sin, 0.0, 1.0))
    hit &= angle >= angle_min
    found = []
    ex_patch, ex_coords = (c1.system.canonical(np.atleast_2d(exclude)) if len(exclude) else (None, None))
    merge = max(c1.h_min, c2.h_min)
    for k in np.flatnonzero(hit):
        pt = P[k] + s_par[k] * R[k]
        patch = int(p1[ia[k]])
        if ex_patch is not None:
            same = ex_patch == patch
            if same.any() and np.min(np.hypot(*(ex_coords[same] - pt).T)) <= exclude_radius:
                continue
        if any(c.patch == patch and math.hypot(c.point[0] - pt[0], c.point[1] - pt[1]) <= merge for c in found):
            continue
        found.append(Crossing(patch, (float(pt[0]), float(pt[1])), float(angle[k]),
                              (int(i1[ia[k]]), int(i2[ib[k]]))))
    found.sort(key=lambda c: c.segments)
    return found


# ---------------------------------------------------------------------------
# relations and classes


@dataclass(frozen=True)
class Budgets:
    arclength: float = 10.0
    tol: float = 1e-6
    h_max: float = 0.05
    h_min: float = 1e-9
    angle_min: float = 1e-3
    max_evidence: int = 4

    def __post_init__(self):
        if not self.angle_min > 0:
            raise ParameterError("angle_min must be positive")
        if not 0 < self.h_min < self.h_max:
            raise ParameterError("need 0 < h_min < h_max")


class RelationResult(NamedTuple):
    related: bool
    reason: str
    evidence: dict  # direction -> list of Crossing


class _CurveCache:
    def __init__(self, system, budgets: Budgets):
        self.system, self.budgets, self.store = system, budgets, {}

    def get(self, saddle: SaddleRecord, kind: str) -> list:
        key = (id(saddle), kind)
        if key not in self.store:
            b = self.budgets
            self.store[key] = grow_both(self.system, saddle, kind, budget=b.arclength, tol=b.tol,
                                        h_max=b.h_max, h_min=b.h_min)
        return self.store[key]


def _crossings_between(us, ss, budgets, exclude, radius):
    out = []
    for cu in us:
        for cs in ss:
            out.extend(transverse_intersections(cu, cs, budgets.angle_min, exclude, radius))
            if len(out) >= budgets.max_evidence:
                return out[: budgets.max_evidence]
    return out


NOT_FOUND = "not found within budget"


def homoclinically_related(system: PlanarSystem, p: SaddleRecord, q: SaddleRecord,
                           budgets: Budgets = Budgets(), cache: _CurveCache | None = None) -> RelationResult:
    """Look for transverse crossings of ``W^u(p)`` with ``W^s(q)`` and of ``W^u(q)`` with ``W^s(p)``.

    A negative answer only means nothing was found within the budgets.
    Crossings at the saddles themselves are not evidence.
    """
    if p.s_index != q.s_index:
        return RelationResult(False, "s-index mismatch", {})
    cache = cache or _CurveCache(system, budgets)
    radius = 10 * budgets.h_min + 1e-9
    exclude = [p.point, q.point]
    ev = {}
    for name, a, b in (("Wu(p)^Ws(q)", p, q), ("Wu(q)^Ws(p)", q, p)):
        found = _crossings_between(cache.get(a, "unstable"), cache.get(b, "stable"), budgets, exclude, radius)
        ev[name] = found
        if not found:
            return RelationResult(False, NOT_FOUND, ev)
    return RelationResult(True, "transverse crossings in both directions", ev)


@dataclass
class IntersectionClassPartition:
    """Union-find over saddles with the evidence behind every merge."""

    saddles: list
    parent: list
    evidence: list = field(default_factory=list)  # dicts: pair, via, reason, crossings

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)

    def classes(self) -> list:
        groups = defaultdict(list)
        for i in range(len(self.saddles)):
            groups[self.find(i)].append(i)
        return sorted(groups.values())

    def to_dict(self) -> dict:
        return {
            "saddles": [{"label": s.label, "point": [float(v) for v in s.point], "period": s.period}
                        for s in self.saddles],
            "classes": self.classes(),
            "evidence": self.evidence,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def intersection_classes(system: PlanarSystem, saddles: Sequence[SaddleRecord],
                         budgets: Budgets = Budgets()) -> IntersectionClassPartition:
    """Partition saddles by numerically detected homoclinic relations.

    Pairs are examined in order; a pair already joined by earlier merges is
    recorded as ``closure`` without growing anything.  Every ``direct``
    merge stores its crossings.
    """
    part = IntersectionClassPartition(list(saddles), list(range(len(saddles))))
    cache = _CurveCache(system, budgets)
    for i in range(len(saddles)):
        for j in range(i + 1, len(saddles)):
            if part.find(i) == part.find(j):
                part.evidence.append({"pair": [i, j], "via": "closure"})
                continue
            res = homoclinically_related(system, saddles[i], saddles[j], budgets, cache)
            record = {"pair": [i, j], "via": "direct" if res.related else "none", "reason": res.reason,
                      "crossings": {k: [c._asdict() for c in v] for k, v in res.evidence.items()}}
            part.evidence.append(record)
            if res.related:
                part.union(i, j)
    return part


def curve_to_csv(curve: ManifoldCurve) -> str:
    patch, C = curve.canonical()
    lines = ["index,gx,gy,patch,cx,cy"]
    for k, (g, p, c) in enumerate(zip(curve.points, patch, C)):
        lines.append(f"{k},{float(g[0])!r},{float(g[1])!r},{int(p)},{float(c[0])!r},{float(c[1])!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# proximity surrogate


class ProximityPoint(NamedTuple):
    point: tuple
    stable_size: float
    unstable_size: float


def proximity_intersection_test(x: ProximityPoint, y: ProximityPoint, eta: float, delta: float | None = None,
                                distance=None) -> bool:
    """``d(x, y) <= eta`` for points carrying manifold sizes of at least ``delta``.

    A cheap predictor of homoclinic relations; ``eta`` is a free parameter,
    not a derived constant.
    """
    if not eta > 0:
        raise ParameterError("eta must be positive")
    if delta is not None:
        for p in (x, y):
            if p.stable_size < delta or p.unstable_size < delta:
                raise PreconditionError("manifold size below delta")
    if distance is None:
        d = math.dist(x.point, y.point)
    else:
        d = distance(x.point, y.point)
    return d <= eta
