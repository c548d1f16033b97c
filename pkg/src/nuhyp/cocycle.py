"""Finite-time analysis of the derivative cocycle along orbit segments.

Everything here works on an :class:`OrbitSegment` (points plus one Jacobian
per step) and a :class:`SplittingFrame` (orthonormal bases of two bundles
``E`` and ``F`` at each point).  Norms restricted to a bundle are singular
values of ``(product of Jacobians) @ basis``: the operator norm is the
largest one, the co-norm the smallest.

The frame is taken to be invariant.  Restricted products are accumulated in
bundle coordinates, one step at a time, projecting each image onto the
bundle along its complement; for an invariant frame this changes nothing
but round-off, which would otherwise grow like ``exp((chi_F - chi_E) n)``
along a stable bundle.  Unrestricted products are carried as ``Q @ R`` with
a QR re-orthonormalization every 16 steps.  Both keep a running log-scale,
so ``lambda**n`` never overflows.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numba import njit

from .errors import NotContractingError, ParameterError, PreconditionError
from .pliss import PeriodicSequence, ultimate_pliss_times

DET_MIN = 1e-12
QR_EVERY = 16
EIG_LOG_LIMIT = 600.0
DOMINATION_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class OrbitSegment:
    """Points ``x_0..x_n`` and Jacobians ``J_0..J_{n-1}`` with ``J_i = df(x_i)``.

    A periodic segment stores exactly one period: ``n = period`` and
    ``x_n`` repeats ``x_0``.  Indices into a periodic segment wrap.
    """

    points: np.ndarray
    jacobians: np.ndarray
    period: int | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        jac = np.asarray(self.jacobians, dtype=float)
        if jac.ndim == 2:
            jac = jac[None]
        d = pts.shape[1]
        if jac.shape[1:] != (d, d):
            raise PreconditionError(f"Jacobians must be {d}x{d}, got {jac.shape[1:]}")
        if pts.shape[0] != jac.shape[0] + 1:
            raise PreconditionError("need one more point than Jacobians")
        if self.period is not None and self.period != jac.shape[0]:
            raise PreconditionError("a periodic segment stores exactly one period")
        dets = np.abs(np.linalg.det(jac))
        if np.any(dets < DET_MIN):
            bad = int(np.argmin(dets))
            raise PreconditionError(f"Jacobian {bad} is not invertible (|det|={dets[bad]:.3g})")
        pts.setflags(write=False)
        jac.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "jacobians", jac)

    @classmethod
    def from_map(cls, step: Callable, x0, n: int, period: int | None = None) -> "OrbitSegment":
        """Iterate ``step(x) -> (f(x), df(x))`` ``n`` times from ``x0``."""
        x = np.asarray(x0, dtype=float)
        pts, jacs = [x], []
        for _ in range(n):
            x, J = step(x)
            pts.append(np.asarray(x, dtype=float))
            jacs.append(J)
        return cls(np.array(pts), np.array(jacs), period)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_steps(self) -> int:
        return self.jacobians.shape[0]

    @property
    def periodic(self) -> bool:
        return self.period is not None

    def jac_index(self, i):
        if self.periodic:
            return np.mod(i, self.period)
        i = np.asarray(i)
        if np.any(i < 0) or np.any(i >= self.n_steps):
            raise IndexError("step index outside the segment")
        return i

    def point(self, i: int) -> np.ndarray:
        if self.periodic:
            return self.points[i % self.period]
        return self.points[i]

    def return_product(self) -> np.ndarray:
        if not self.periodic:
            raise PreconditionError("return product needs a periodic segment")
        P = np.eye(self.dim)
        for J in self.jacobians:
            P = J @ P
        return P

    def check_range(self, base: int, n: int):
        if self.periodic:
            return
        if base < 0 or base + n > self.n_steps:
            raise PreconditionError(f"steps {base}..{base + n} leave the segment 0..{self.n_steps}")


@dataclass(frozen=True, eq=False)
class SplittingFrame:
    """Orthonormal bases ``E[i]`` (d x dE) and ``F[i]`` (d x dF) per point."""

    E: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.E, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if E.ndim == 2:
            E = E[:, :, None]
        if F.ndim == 2:
            F = F[:, :, None]
        if E.shape[0] != F.shape[0] or E.shape[1] != F.shape[1]:
            raise PreconditionError("E and F frames disagree in length or dimension")
        if E.shape[2] + F.shape[2] != E.shape[1]:
            raise PreconditionError("dim E + dim F must equal the phase-space dimension")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "F", F)

    @property
    def s_index(self) -> int:
        return self.E.shape[2]

    def __len__(self):
        return self.E.shape[0]

    def basis(self, bundle: str, i):
        stack = self.E if bundle == "E" else self.F
        return stack[np.mod(i, len(self))]


@dataclass(frozen=True)
class HyperbolicityEstimate:
    chi: float
    gamma: float
    N: int
    Cf: float

    def __post_init__(self):
        if not self.chi > 0:
            raise ParameterError("chi must be positive")
        if not 0 < self.gamma < self.chi:
            raise ParameterError("need 0 < gamma < chi")
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError("N must be a positive integer")
        if self.Cf < 1:
            raise ParameterError("Cf must be >= 1")


class CValue(NamedTuple):
    value: float
    log_value: float
    k_star: int
    divergent: bool


class CfConstant(NamedTuple):
    raw: float
    value: float


# ---------------------------------------------------------------------------
# frames


def _orth(v):
    q, _ = np.linalg.qr(np.atleast_2d(v).reshape(v.shape[0], -1))
    return q


def constant_frame(E_basis, F_basis, n_points: int) -> SplittingFrame:
    E = np.repeat(_orth(np.asarray(E_basis, dtype=float))[None], n_points, axis=0)
    F = np.repeat(_orth(np.asarray(F_basis, dtype=float))[None], n_points, axis=0)
    return SplittingFrame(E, F)


def periodic_frame(orbit: OrbitSegment) -> SplittingFrame:
    """Eigen-splitting of the return map at ``x_0`` carried around the orbit.

    The stable part is carried backwards and the unstable part forwards, the
    numerically stable directions for each.
    """
    if not orbit.periodic:
        raise PreconditionError("periodic_frame needs a periodic segment")
    P = orbit.return_product()
    vals, vecs = np.linalg.eig(P)
    if np.any(np.abs(vals.imag) > 1e-12 * np.max(np.abs(vals))):
        raise PreconditionError("return map has complex eigenvalues; no real splitting")
    mods = np.abs(vals.real)
    if np.any(np.isclose(mods, 1.0, rtol=0, atol=1e-12)):
        raise PreconditionError("return map has an eigenvalue of modulus 1")
    stable = mods < 1
    if stable.all() or not stable.any():
        raise PreconditionError("return map is not of saddle type")
    pi, d = orbit.period, orbit.dim
    E = np.empty((pi, d, int(stable.sum())))
    F = np.empty((pi, d, int((~stable).sum())))
    E[0] = _orth(vecs.real[:, stable])
    F[0] = _orth(vecs.real[:, ~stable])
    Ei = E[0]  # E_pi = E_0
    for i in range(pi - 1, 0, -1):
        Ei = _orth(np.linalg.solve(orbit.jacobians[i], Ei))
        E[i] = Ei
    for i in range(1, pi):
        F[i] = _orth(orbit.jacobians[i - 1] @ F[i - 1])
    return SplittingFrame(_fix_signs(E), _fix_signs(F))


def _fix_signs(B):
    # deterministic orientation: first nonzero coordinate of each column positive
    lead = np.argmax(np.abs(B) > 1e-12, axis=1)  # (n, k)
    vals = np.take_along_axis(B, lead[:, None, :], axis=1)[:, 0, :]
    return B * np.where(vals < 0, -1.0, 1.0)[:, None, :]


def oseledets_frame(orbit: OrbitSegment, dim_E: int = 1, warmup: int = 200, seed: int = 0):
    """Two-bundle frame on a non-periodic segment by power iteration.

    ``F`` comes from pushing a random subspace forward, ``E`` from pulling a
    random subspace backward.  Only points with ``warmup`` steps of history on
    both sides get a frame, so the segment is trimmed; returns
    ``(trimmed_orbit, frame)``.
    """
    n, d = orbit.n_steps, orbit.dim
    if n < 2 * warmup + 1:
        raise PreconditionError(f"segment of {n} steps is too short for warmup {warmup}")
    rng = np.random.default_rng(seed)
    dF = d - dim_E
    if d == 2 and dim_E == 1:
        F, E = _line_sweeps(orbit.jacobians, rng.standard_normal(2), rng.standard_normal(2))
        F, E = F[:, :, None], E[:, :, None]
        lo, hi = warmup, n - warmup
        trimmed = OrbitSegment(orbit.points[lo:hi + 1], orbit.jacobians[lo:hi])
        return trimmed, SplittingFrame(_fix_signs(E[lo:hi + 1].copy()), _fix_signs(F[lo:hi + 1].copy()))
    F = np.empty((n + 1, d, dF))
    V = _orth(rng.standard_normal((d, dF)))
    F[0] = V
    for i in range(n):
        V = _orth(orbit.jacobians[i] @ V)
        F[i + 1] = V
    E = np.empty((n + 1, d, dim_E))
    V = _orth(rng.standard_normal((d, dim_E)))
    E[n] = V
    for i in range(n - 1, -1, -1):
        V = _orth(np.linalg.solve(orbit.jacobians[i], V))
        E[i] = V
    lo, hi = warmup, n - warmup
    trimmed = OrbitSegment(orbit.points[lo:hi + 1], orbit.jacobians[lo:hi])
    return trimmed, SplittingFrame(_fix_signs(E[lo:hi + 1].copy()), _fix_signs(F[lo:hi + 1].copy()))


@njit(cache=True)
def _line_sweeps(jac, f0, e0):
    """Forward sweep of a line (``F``) and backward sweep (``E``) in the plane."""
    n = jac.shape[0]
    F = np.empty((n + 1, 2))
    E = np.empty((n + 1, 2))
    nv = math.hypot(f0[0], f0[1])
    a, b = f0[0] / nv, f0[1] / nv
    F[0, 0], F[0, 1] = a, b
    for i in range(n):
        a, b = jac[i, 0, 0] * a + jac[i, 0, 1] * b, jac[i, 1, 0] * a + jac[i, 1, 1] * b
        nv = math.hypot(a, b)
        a, b = a / nv, b / nv
        F[i + 1, 0], F[i + 1, 1] = a, b
    nv = math.hypot(e0[0], e0[1])
    a, b = e0[0] / nv, e0[1] / nv
    E[n, 0], E[n, 1] = a, b
    for i in range(n - 1, -1, -1):
        # adjugate solve; the determinant only rescales the line
        a, b = jac[i, 1, 1] * a - jac[i, 0, 1] * b, -jac[i, 1, 0] * a + jac[i, 0, 0] * b
        if jac[i, 0, 0] * jac[i, 1, 1] - jac[i, 0, 1] * jac[i, 1, 0] < 0:
            a, b = -a, -b
        nv = math.hypot(a, b)
        a, b = a / nv, b / nv
        E[i, 0], E[i, 1] = a, b
    return F, E


def equivariance_residual(orbit: OrbitSegment, frame: SplittingFrame) -> float:
    """Largest sine of the angle between ``df(G_x)`` and ``G_{f(x)}``, G = E, F."""
    worst = 0.0
    steps = orbit.n_steps if orbit.periodic else orbit.n_steps
    for i in range(steps):
        J = orbit.jacobians[i]
        for bundle in ("E", "F"):
            img = _orth(J @ frame.basis(bundle, i))
            nxt = frame.basis(bundle, i + 1)
            resid = img - nxt @ (nxt.T @ img)
            worst = max(worst, float(np.linalg.norm(resid, 2)))
    return worst


# ---------------------------------------------------------------------------
# products restricted to bundles


class _BatchProduct:
    """Products ``J_{b+n-1} ... J_b @ B_b`` for a batch of base indices.

    Without a frame ``B_b`` is the identity and the full product is tracked
    with periodic QR folding.  With a frame the product is tracked in bundle
    coordinates: each image ``J_i B_i`` is expressed in the basis
    ``[E_{i+1} F_{i+1}]`` and only the bundle's own block is kept.  For an
    invariant splitting the other block is round-off, and dropping it stops
    that round-off from being amplified by the complementary rates.
    """

    def __init__(self, orbit: OrbitSegment, bases, frame: SplittingFrame | None = None, bundle: str = "E"):
        self.orbit = orbit
        self.bases = np.asarray(bases, dtype=int)
        self.frame = frame
        b = len(self.bases)
        if frame is None:
            self.M = np.repeat(np.eye(orbit.dim)[None], b, axis=0)
            k = orbit.dim
        else:
            self.own = frame.E if bundle == "E" else frame.F
            k = self.own.shape[2]
            self.rows = slice(0, k) if bundle == "E" else slice(frame.E.shape[2], None)
            self.full = np.concatenate([frame.E, frame.F], axis=2)
        self.R = np.repeat(np.eye(k)[None], b, axis=0)
        self.logscale = np.zeros(b)
        self.n = 0
        self._since = 0

    def step(self):
        idx = self.orbit.jac_index(self.bases + self.n)
        J = self.orbit.jacobians[idx]
        self.n += 1
        if self.frame is None:
            self.M = J @ self.M
            self._since += 1
            if self._since >= QR_EVERY:
                self._fold()
            return
        L = len(self.frame)
        here = self.own[np.mod(self.bases + self.n - 1, L)]
        basis_next = self.full[np.mod(self.bases + self.n, L)]
        coords = np.linalg.solve(basis_next, J @ here)[:, self.rows, :]
        self.R = coords @ self.R
        self._rescale()

    def _rescale(self):
        s = np.max(np.abs(self.R), axis=(1, 2))
        s[s == 0] = 1.0
        self.R /= s[:, None, None]
        self.logscale += np.log(s)

    def _fold(self):
        Q, R = np.linalg.qr(self.M)
        self.M = Q
        self.R = R @ self.R
        self._rescale()
        self._since = 0

    def log_singular_values(self) -> np.ndarray:
        """Shape ``(batch, k)``, descending."""
        if self.frame is None and self._since:
            self._fold()
        sv = np.linalg.svd(self.R, compute_uv=False)
        with np.errstate(divide="ignore"):
            return self.logscale[:, None] + np.log(sv)


def restricted_log_sv(orbit, frame, bundle: str, n: int, bases) -> np.ndarray:
    """Log singular values of ``df^n`` restricted to the bundle, per base."""
    bases = np.atleast_1d(np.asarray(bases, dtype=int))
    prod = _BatchProduct(orbit, bases, frame, bundle)
    for _ in range(n):
        prod.step()
    return prod.log_singular_values()


def _check_bundle(bundle):
    if bundle not in ("E", "F"):
        raise ParameterError(f"bundle must be 'E' or 'F', got {bundle!r}")


def bundle_log_norm(orbit: OrbitSegment, frame: SplittingFrame, bundle: str, n: int, base: int = 0) -> float:
    """``log ||df^n|E_x||`` for ``E``; ``log ||(df^n|F_x)^{-1}||`` for ``F``.

    Both sequences are subadditive in ``n``.
    """
    _check_bundle(bundle)
    if n < 0:
        raise ParameterError("n must be >= 0")
    orbit.check_range(base, n)
    lsv = restricted_log_sv(orbit, frame, bundle, n, [base])[0]
    return float(lsv[0]) if bundle == "E" else float(-lsv[-1])


def subadditive_average(orbits: Sequence[OrbitSegment], frames: Sequence[SplittingFrame], n: int,
                        bundle: str, weights=None) -> float:
    """Ensemble average of ``bundle_log_norm(..., n, x) / n``.

    Each periodic orbit contributes the uniform average over its points; a
    non-periodic segment averages over every base with ``n`` steps ahead.
    For ``E`` this decreases to the top exponent on ``E``; for ``F`` to minus
    the bottom exponent on ``F``.
    """
    _check_bundle(bundle)
    if n < 1:
        raise ParameterError("n must be >= 1")
    if isinstance(orbits, OrbitSegment):
        orbits, frames = [orbits], [frames]
    if not orbits:
        raise PreconditionError("empty ensemble")
    if weights is None:
        weights = np.full(len(orbits), 1.0 / len(orbits))
    weights = np.asarray(weights, dtype=float)
    terms = []
    for orbit, frame, w in zip(orbits, frames, weights):
        if orbit.periodic:
            bases = np.arange(orbit.period)
        else:
            bases = np.arange(orbit.n_steps - n + 1)
            if bases.size == 0:
                raise PreconditionError(f"segment shorter than n={n}")
        lsv = restricted_log_sv(orbit, frame, bundle, n, bases)
        vals = lsv[:, 0] if bundle == "E" else -lsv[:, -1]
        terms.append(w * math.fsum(vals) / (bases.size * n))
    return math.fsum(terms) / math.fsum(weights)


# ---------------------------------------------------------------------------
# exponents


def periodic_exponents(orbit: OrbitSegment) -> np.ndarray:
    """Lyapunov exponents of a periodic orbit, ascending.

    ``(1/pi) log |eigenvalue|`` of the return product.  In dimension 2 the
    product is accumulated with rescaling and the eigenvalues come from the
    characteristic polynomial, the small one as ``det / large``, so periods
    of any length are safe.  A (numerically) defective product triggers a
    warning and singular values are used instead.
    """
    if not orbit.periodic:
        raise PreconditionError("periodic_exponents needs a periodic segment")
    pi, d = orbit.period, orbit.dim
    if d == 2:
        P = np.eye(2)
        logscale = 0.0
        for J in orbit.jacobians:
            P = J @ P
            s = np.max(np.abs(P))
            P /= s
            logscale += math.log(s)
        logdet = math.fsum(np.log(np.abs(np.linalg.det(orbit.jacobians))))
        tr = P[0, 0] + P[1, 1]
        det_n = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
        disc = tr * tr - 4 * det_n
        if disc < 0:
            half = logdet / (2 * pi)
            return np.array([half, half])
        if disc <= 1e-12 * tr * tr and not np.allclose(P, P[0, 0] * np.eye(2), atol=1e-12):
            warnings.warn("return product is nearly defective; using singular values", RuntimeWarning)
            sv = np.linalg.svd(P, compute_uv=False)
            return np.sort((np.log(sv) + logscale) / pi)
        big = (tr + math.copysign(math.sqrt(disc), tr)) / 2
        log_big = math.log(abs(big)) + logscale
        return np.sort(np.array([log_big, logdet - log_big]) / pi)
    growth = np.max(np.linalg.norm(orbit.jacobians, ord=2, axis=(1, 2)))
    if pi * math.log(max(growth, 1.0)) < EIG_LOG_LIMIT:
        vals = np.linalg.eigvals(orbit.return_product())
        return np.sort(np.log(np.abs(vals)) / pi)
    return _qr_exponents(orbit, repeats=64)


def _qr_exponents(orbit: OrbitSegment, repeats: int) -> np.ndarray:
    d = orbit.dim
    Q = np.eye(d)
    acc = np.zeros(d)
    for _ in range(repeats):
        for J in orbit.jacobians:
            Q, R = np.linalg.qr(J @ Q)
            acc += np.log(np.abs(np.diag(R)))
    return np.sort(acc / (repeats * orbit.n_steps))


def finite_time_exponents(orbit: OrbitSegment) -> np.ndarray:
    """``(1/n) log`` of the singular values of the full product, ascending."""
    prod = _BatchProduct(orbit, [0])
    for _ in range(orbit.n_steps):
        prod.step()
    return np.sort(prod.log_singular_values()[0] / orbit.n_steps)


def cf_constant(orbit: OrbitSegment) -> CfConstant:
    """``max_x max(log ||df_x||, log ||df_x^{-1}||)`` over the segment.

    ``value`` is raised to ``1 + 1e-9`` when the raw maximum is smaller,
    since downstream bounds assume ``C_f > 1``.
    """
    sv = np.linalg.svd(orbit.jacobians, compute_uv=False)
    raw = float(max(np.max(np.log(sv[:, 0])), np.max(-np.log(sv[:, -1]))))
    raw = max(raw, 0.0)
    return CfConstant(raw, max(raw, 1.0 + 1e-9))


# ---------------------------------------------------------------------------
# C-functions and manifold sizes


def _block_logs(orbit, frame, N, bundle, base, count):
    """Log block norms ``b_l`` used by the C-functions, ``l = 0..count-1``."""
    if bundle == "E":
        bases = base + N * np.arange(count)
        lsv = restricted_log_sv(orbit, frame, "E", N, bases)
        return lsv[:, 0]
    # ||df^{-N}|F_y|| at y = f^{-lN}(x) is 1 / co-norm of df^N on F_{f^{-(l+1)N}(x)}
    bases = base - N * (np.arange(count) + 1)
    lsv = restricted_log_sv(orbit, frame, "F", N, bases)
    return -lsv[:, -1]


def c_function(orbit: OrbitSegment, frame: SplittingFrame, N: int, lam: float, bundle: str = "E",
               base: int = 0) -> CValue:
    """``sup_k exp(k N lam) * prod_{l<k} ||df^N|E_{f^{lN}x}||`` (``F``: backward blocks).

    On a periodic orbit the supremum is attained for ``k <= pi``, provided
    the one-period product is below ``exp(-pi N lam)``; otherwise it is
    infinite and :class:`NotContractingError` is raised.  On a finite segment
    the maximum runs over the available ``k`` and ``divergent`` flags the
    case where the last ``k`` wins (the value is then only a lower bound).
    """
    _check_bundle(bundle)
    if N < 1:
        raise ParameterError("N must be >= 1")
    if orbit.periodic:
        pi = orbit.period
        blocks = _block_logs(orbit, frame, N, bundle, base, pi)
        one_period = math.fsum(blocks)
        if one_period >= -pi * N * lam:
            raise NotContractingError(
                f"one-period log product {one_period:.6g} >= -pi*N*lam = {-pi * N * lam:.6g}")
        count = pi
    else:
        count = (orbit.n_steps - base) // N if bundle == "E" else base // N
        if count < 0:
            raise PreconditionError("base lies outside the segment")
        blocks = _block_logs(orbit, frame, N, bundle, base, count) if count else np.zeros(0)
    logs = np.concatenate([[0.0], np.cumsum(blocks) + N * lam * np.arange(1, count + 1)])
    k_star = int(np.argmax(logs))
    divergent = (not orbit.periodic) and count > 0 and k_star == count
    log_value = float(logs[k_star])
    return CValue(math.exp(log_value) if log_value < 700 else math.inf, log_value, k_star, divergent)


def manifold_size(c_value: float, delta: float) -> float:
    """Radius ``delta / C`` of the guaranteed local invariant disk."""
    if not c_value >= 1:
        raise ParameterError(f"C-function value must be >= 1, got {c_value}")
    if not delta > 0:
        raise ParameterError("delta must be positive")
    return delta / c_value


# ---------------------------------------------------------------------------
# domination, hyperbolic times, occupation


def _admissible_bases(orbit, n, sample):
    if orbit.periodic:
        bases = np.arange(orbit.period)
    else:
        bases = np.arange(orbit.n_steps - n + 1)
    if sample is not None and bases.size > sample:
        bases = bases[np.linspace(0, bases.size - 1, sample).round().astype(int)]
    return bases


def domination_check(orbit: OrbitSegment, frame: SplittingFrame, N_max: int, sample: int | None = 2000):
    """Smallest ``N <= N_max`` with ``||df^N|E|| <= co-norm(df^N|F) / 2`` at all sampled points.

    Returns ``None`` when no such ``N`` exists.  For a finite segment the
    points are those with ``N_max`` steps ahead (at most ``sample`` of them,
    evenly spaced).  Ties are accepted up to a relative ``1e-12``.
    """
    if N_max < 1:
        raise ParameterError("N_max must be >= 1")
    bases = _admissible_bases(orbit, N_max, sample)
    if bases.size == 0:
        raise PreconditionError(f"segment shorter than N_max={N_max}")
    pE = _BatchProduct(orbit, bases, frame, "E")
    pF = _BatchProduct(orbit, bases, frame, "F")
    for N in range(1, N_max + 1):
        pE.step()
        pF.step()
        top_E = pE.log_singular_values()[:, 0]
        low_F = pF.log_singular_values()[:, -1]
        if np.all(top_E <= math.log(0.5) + low_F + DOMINATION_RTOL):
            return N
    return None


def hyperbolic_time_sequence(orbit: OrbitSegment, frame: SplittingFrame, N: int) -> PeriodicSequence:
    """``a_i = -log ||df^N|E||`` at ``f^{-iN}(p)``, ``i = 1..pi``, bounded by ``N C_f``."""
    if not orbit.periodic:
        raise PreconditionError("hyperbolic times need a periodic orbit")
    pi = orbit.period
    bases = np.mod(-N * np.arange(1, pi + 1), pi)
    a = -restricted_log_sv(orbit, frame, "E", N, bases)[:, 0]
    A = N * cf_constant(orbit).value * (1 + 1e-12)
    return PeriodicSequence.of(a.tolist(), A)


def hyperbolic_time_points(orbit: OrbitSegment, indices, N: int) -> list:
    """Orbit position ``(-i N) mod pi`` of the point behind each sequence index."""
    return [int((-i * N) % orbit.period) for i in indices]


def hyperbolic_times(orbit: OrbitSegment, frame: SplittingFrame, est: HyperbolicityEstimate, c1: float,
                     tie_tol: float = 0.0) -> list:
    """Ultimate ``c1``-Pliss times of :func:`hyperbolic_time_sequence`.

    At the point ``x = f^{-mN}(p)`` of a returned index ``m`` every k-fold
    product of N-step norms on ``E`` is at most ``exp(-k c1)``.
    """
    seq = hyperbolic_time_sequence(orbit, frame, est.N)
    return ultimate_pliss_times(seq, c1, tie_tol)


def occupation_frequency(orbit: OrbitSegment, N: int, region: Callable) -> float:
    """Fraction of ``l in 0..pi-1`` with ``f^{lN}(x_0)`` in ``region``."""
    if not orbit.periodic:
        raise PreconditionError("occupation_frequency needs a periodic orbit")
    pi = orbit.period
    hits = sum(bool(region(orbit.points[(l * N) % pi])) for l in range(pi))
    return hits / pi


# ---------------------------------------------------------------------------
# serialization


def orbit_to_dict(orbit: OrbitSegment) -> dict:
    return {
        "dim": orbit.dim,
        "points": orbit.points.tolist(),
        "jacobians": [J.ravel(order="C").tolist() for J in orbit.jacobians],
        "period": orbit.period,
    }


def orbit_from_dict(data: dict) -> OrbitSegment:
    try:
        d = int(data["dim"])
        pts = np.array(data["points"], dtype=float)
        jac = np.array(data["jacobians"], dtype=float).reshape(-1, d, d)
    except (KeyError, ValueError, TypeError) as exc:
        raise PreconditionError(f"malformed orbit record: {exc}") from None
    return OrbitSegment(pts, jac, data.get("period"))


def orbit_to_json(orbit: OrbitSegment) -> str:
    return json.dumps(orbit_to_dict(orbit))


def orbit_from_json(text: str) -> OrbitSegment:
    return orbit_from_dict(json.loads(text))
