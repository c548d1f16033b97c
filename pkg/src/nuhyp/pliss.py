"""Pliss times of real sequences and their localized / periodic variants.

An index ``m >= 1`` is a *c1-Pliss time* of ``a_1, a_2, ...`` when every
trailing block ending at ``m`` has average at least ``c1``::

    a_{k+1} + ... + a_m >= c1 * (m - k)      for k = 0, ..., m - 1.

Indices are 1-based throughout, as are all index sets (``I``, ``J``, ...).

Arithmetic
----------
Every routine works in two modes.  When the values are ``int`` or
:class:`fractions.Fraction` and ``c1`` is too, the comparison is exact: the
values are brought to a common denominator and compared as integers.  With
floats the non-strict inequality is evaluated as ``>= -tie_tol`` (default
``0``) so that callers can absorb round-off at ties.

Periodic sequences
------------------
For a sequence of period ``pi`` an index ``i <= pi`` is an *ultimate* Pliss
time when ``i + n*pi`` is a Pliss time for every ``n >= 0``.  Two facts make
this decidable on a finite window:

* if ``m > pi`` is a Pliss time then so is ``m - pi`` (every block ending at
  ``m - pi`` is a shifted block ending at ``m``), and
* if ``m > pi`` is a Pliss time then so is ``m + pi``: blocks that start after
  position ``pi`` are shifts of blocks ending at ``m``, the others split into
  one whole period (whose sum is ``>= c1*pi``, since the block of length
  ``pi`` ending at ``m`` is a whole period) plus a block ending at ``m``.

Hence ``i`` is ultimate iff ``i + pi`` is a Pliss time.  We check membership
of ``i``, ``i + pi`` and ``i + 2*pi`` on three unrolled periods, which is
redundant by the argument above but cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import EmptyReductionError, ParameterError, PreconditionError

Number = Union[int, float, Fraction]

_UNROLL = 3


def _is_exact(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


@dataclass(frozen=True)
class RealSequence:
    """Finite real sequence ``a_1..a_n`` with a bound ``A >= max |a_i|``.

    ``bound_A`` defaults to ``max |a_i|``.
    """

    values: tuple
    bound_A: Number = None

    def __post_init__(self):
        vals = tuple(self.values)
        if not vals:
            raise PreconditionError("a sequence needs at least one value")
        object.__setattr__(self, "values", vals)
        top = max(abs(v) for v in vals)
        if self.bound_A is None:
            object.__setattr__(self, "bound_A", top)
        elif self.bound_A < top:
            raise PreconditionError(f"bound_A={self.bound_A} is below max|a_i|={top}")

    def __len__(self):
        return len(self.values)

    def at(self, i: int):
        """1-based access."""
        if not 1 <= i <= len(self.values):
            raise IndexError(i)
        return self.values[i - 1]

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in self.values)


@dataclass(frozen=True)
class PeriodicSequence:
    """Sequence with ``a_i = one_period[(i - 1) mod pi]`` for all ``i >= 1``."""

    one_period: RealSequence

    @classmethod
    def of(cls, values: Iterable[Number], bound_A: Number = None) -> "PeriodicSequence":
        return cls(RealSequence(tuple(values), bound_A))

    @property
    def period_pi(self) -> int:
        return len(self.one_period)

    @property
    def bound_A(self):
        return self.one_period.bound_A

    def at(self, i: int):
        if i < 1:
            raise IndexError(i)
        return self.one_period.values[(i - 1) % self.period_pi]

    def unrolled(self, n_periods: int) -> RealSequence:
        return RealSequence(self.one_period.values * n_periods, self.bound_A)

    def mean(self):
        vals = self.one_period.values
        if self.one_period.exact:
            return Fraction(sum(vals), len(vals))
        return math.fsum(vals) / len(vals)


@dataclass(frozen=True)
class IndexPartition:
    """Disjoint ``I0, J0, K0`` covering ``{1, ..., n}``."""

    I0: frozenset
    J0: frozenset
    K0: frozenset
    n: int

    def __post_init__(self):
        parts = [frozenset(p) for p in (self.I0, self.J0, self.K0)]
        for name, p in zip("IJK", parts):
            object.__setattr__(self, f"{name}0", p)
        total = sum(len(p) for p in parts)
        union = parts[0] | parts[1] | parts[2]
        if total != len(union):
            raise PreconditionError("index sets are not pairwise disjoint")
        if union != frozenset(range(1, self.n + 1)):
            raise PreconditionError(f"index sets do not cover 1..{self.n}")


@dataclass(frozen=True)
class PlissReport:
    pliss_times: list
    theta_bound: float
    count: int
    # the count bound is stated over {2, ..., n}; both counts are reported
    count_after_first: int = field(default=0)


def _values(a) -> tuple:
    if isinstance(a, PeriodicSequence):
        return a.one_period.values
    if isinstance(a, RealSequence):
        return a.values
    return tuple(a)


# ---------------------------------------------------------------------------
# core membership tests


def _exact_int_rows(values, c1):
    """Scale an exact batch to integers ``X = q*values``; returns ``(X, q*c1)``."""
    c1 = Fraction(c1)
    arr = np.asarray(values)
    if arr.dtype.kind in "iub":
        q = c1.denominator
        X = arr.astype(object if _overflow_risk(arr, q) else np.int64) * q
        return X, c1.numerator
    flat = arr.ravel().tolist()
    den = c1.denominator
    for v in set(flat):
        den = math.lcm(den, Fraction(v).denominator)
    ints = [int(Fraction(v) * den) for v in flat]
    big = max((abs(v) for v in ints), default=0) * max(arr.shape[-1], 1)
    dtype = object if big >= 2**62 else np.int64
    X = np.array(ints, dtype=dtype).reshape(arr.shape)
    return X, int(c1 * den)


def _overflow_risk(arr, q) -> bool:
    if arr.size == 0:
        return False
    top = max(abs(int(arr.max())), abs(int(arr.min())))
    return (top + 1) * q * max(arr.shape[-1], 1) >= 2**62


def _as_batch(values):
    arr = np.asarray(values)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise PreconditionError("values must be a 1-d sequence or a 2-d batch")
    return arr, squeeze


def _exact_mode(arr, c1) -> bool:
    if not _is_exact(c1):
        return False
    if arr.dtype.kind in "iub":
        return True
    if arr.dtype == object:
        return all(_is_exact(v) for v in arr.ravel().tolist())
    return False


def pliss_mask(values, c1: Number, tie_tol: float = 0.0) -> np.ndarray:
    """Boolean Pliss-time indicator, row-wise for a 2-d batch.

    ``mask[..., m-1]`` is true iff ``m`` is a c1-Pliss time.  Runs in linear
    time per row: ``m`` is a Pliss time iff ``S_m - c1*m`` is at least the
    running maximum of ``S_k - c1*k`` over ``k < m`` (with ``S_0 = 0``).
    """
    arr, squeeze = _as_batch(values)
    if arr.shape[1] == 0:
        out = np.zeros(arr.shape, dtype=bool)
        return out[0] if squeeze else out
    if _exact_mode(arr, c1):
        X, p = _exact_int_rows(arr, c1)
        X = X - p
        slack = 0
    else:
        X = arr.astype(float) - float(c1)
        slack = tie_tol
    S = np.cumsum(X, axis=1)
    prev = np.zeros_like(S)
    prev[:, 1:] = S[:, :-1]
    # running max of S_k - c1 k over k = 0..m-1, including S_0 = 0
    runmax = np.maximum.accumulate(np.maximum(prev, 0), axis=1)
    out = np.asarray(S >= runmax - slack, dtype=bool)
    return out[0] if squeeze else out


def pliss_oracle_mask(values, c1: Number, tie_tol: float = 0.0) -> np.ndarray:
    """Quadratic definition check, kept independent of :func:`pliss_mask`.

    Each trailing block sum is accumulated directly from ``a_m`` backwards
    rather than from prefix sums.
    """
    arr, squeeze = _as_batch(values)
    rows, n = arr.shape
    exact = _exact_mode(arr, c1)
    if exact:
        V, p = _exact_int_rows(arr, c1)
    else:
        V = arr.astype(float)
        c1f = float(c1)
    out = np.zeros((rows, n), dtype=bool)
    for m in range(1, n + 1):
        ok = np.ones(rows, dtype=bool)
        block = np.zeros(rows, dtype=V.dtype)
        for k in range(m - 1, -1, -1):
            block = block + V[:, k]
            if exact:
                ok &= block >= p * (m - k)
            else:
                ok &= block >= c1f * (m - k) - tie_tol
        out[:, m - 1] = ok
    return out[0] if squeeze else out


def pliss_times(a, c1: Number, tie_tol: float = 0.0) -> list:
    """Ascending list of c1-Pliss times of a finite sequence."""
    vals = _values(a)
    if not vals:
        return []
    arr = np.array(vals, dtype=object) if any(isinstance(v, Fraction) for v in vals) else np.asarray(vals)
    mask = pliss_mask(arr, c1, tie_tol)
    return (np.flatnonzero(mask) + 1).tolist()


def pliss_times_bruteforce(a, c1: Number, tie_tol: float = 0.0) -> list:
    """Pure-Python definition check; exact for ``Fraction`` input."""
    vals = _values(a)
    exact = _is_exact(c1) and all(_is_exact(v) for v in vals)
    slack = 0 if exact else tie_tol
    times = []
    for m in range(1, len(vals) + 1):
        if all(sum(vals[k:m]) >= c1 * (m - k) - slack for k in range(m)):
            times.append(m)
    return times


def pliss_theta(A: Number, c1: Number, c2: Number):
    """Guaranteed proportion ``(c2 - c1) / (A - c1)`` of Pliss times."""
    if not (A >= c2 > c1):
        raise ParameterError(f"need A >= c2 > c1, got A={A}, c2={c2}, c1={c1}")
    if all(_is_exact(x) for x in (A, c1, c2)):
        return Fraction(c2 - c1) / (A - c1)
    return (c2 - c1) / (A - c1)


def pliss_report(a, c1: Number, c2: Number, tie_tol: float = 0.0) -> PlissReport:
    vals = _values(a)
    A = a.bound_A if isinstance(a, (RealSequence, PeriodicSequence)) else max(abs(v) for v in vals)
    theta = pliss_theta(A, c1, c2)
    times = pliss_times(vals, c1, tie_tol)
    return PlissReport(times, theta, len(times), sum(1 for m in times if m >= 2))


# ---------------------------------------------------------------------------
# localized variants


def localized_pliss_lowering(a, I: Iterable[int], c0: Number, c1: Number, tie_tol: float = 0.0) -> list:
    """Pliss times of ``b`` where ``b_i = a_i`` on ``I`` and ``min(a_i, c0)`` off ``I``.

    Every returned index lies in ``I`` and is a c1-Pliss time of ``a``.
    """
    if not c0 < c1:
        raise ParameterError(f"need c0 < c1, got c0={c0}, c1={c1}")
    vals = _values(a)
    I = set(I)
    b = [v if i in I else min(v, c0) for i, v in enumerate(vals, start=1)]
    return pliss_times(b, c1, tie_tol)


def reduced_sequence(a, J: Iterable[int]):
    """Delete the entries indexed by ``J`` and renumber.

    Returns ``(b, renumber)`` with ``b_j = a_{renumber[j-1]}``.  For a
    :class:`PeriodicSequence`, ``J`` is read as residues in ``{1..pi}`` (the
    set ``J0 + pi*N``) and ``b`` is again periodic; ``renumber`` then covers
    one period of ``b`` and extends by ``i(j + len(b)) = i(j) + pi``.
    """
    J = set(J)
    vals = _values(a)
    keep = [i for i in range(1, len(vals) + 1) if i not in J]
    if not keep:
        raise EmptyReductionError("J removes every index")
    b = tuple(vals[i - 1] for i in keep)
    if isinstance(a, PeriodicSequence):
        return PeriodicSequence.of(b, a.bound_A), keep
    bound = a.bound_A if isinstance(a, RealSequence) else None
    return RealSequence(b, bound), keep


def periodic_renumber(renumber: Sequence[int], period: int, j: int) -> int:
    """``i(j)`` for a periodic reduction, any ``j >= 1``."""
    q, r = divmod(j - 1, len(renumber))
    return renumber[r] + q * period


def localized_pliss_reduction(a, I: Iterable[int], J: Iterable[int], c1: Number, tie_tol: float = 0.0) -> list:
    """Pliss times of ``a`` inside ``I`` obtained through the J-reduced sequence.

    Requires ``I`` and ``J`` to partition ``{1..n}`` and ``a_i >= c1`` on ``J``.
    """
    vals = _values(a)
    n = len(vals)
    I, J = set(I), set(J)
    if I & J or (I | J) != set(range(1, n + 1)):
        raise PreconditionError(f"I and J must partition 1..{n}")
    bad = [j for j in sorted(J) if vals[j - 1] < c1]
    if bad:
        raise PreconditionError(f"a_i >= c1 fails on J at indices {bad}")
    if not I:
        return []
    b, renumber = reduced_sequence(vals, J)
    return [renumber[m - 1] for m in pliss_times(b, c1, tie_tol)]


def ultimate_pliss_times(a: PeriodicSequence, c1: Number, tie_tol: float = 0.0) -> list:
    """Indices ``i`` in ``{1..pi}`` with ``i + n*pi`` a Pliss time for all ``n >= 0``.

    Non-empty iff the period mean is ``>= c1``.
    """
    if not isinstance(a, PeriodicSequence):
        a = PeriodicSequence.of(a)
    pi = a.period_pi
    mask = pliss_times(a.unrolled(_UNROLL), c1, tie_tol)
    hits = set(mask)
    return [i for i in range(1, pi + 1) if all(i + r * pi in hits for r in range(_UNROLL))]


def ultimate_pliss_times_bruteforce(a: PeriodicSequence, c1: Number, n_periods: int = 4) -> list:
    """Definition check on ``n_periods`` unrolled periods (pure Python)."""
    pi = a.period_pi
    hits = set(pliss_times_bruteforce(a.unrolled(n_periods), c1))
    return [i for i in range(1, pi + 1) if all(i + r * pi in hits for r in range(n_periods))]


@dataclass(frozen=True)
class PretaporterReport:
    hypothesis_holds: bool
    ultimate_times_in_I0: list
    fraction: float
    theta: float
    d_mean: float


def pretaporter(a: PeriodicSequence, parts: IndexPartition, A: Number, c1: Number, c2: Number,
                tie_tol: float = 0.0) -> PretaporterReport:
    """Ultimate Pliss times inside ``I0`` for a three-way split of one period.

    Entries indexed by ``J0`` (all ``>= c2``) are removed, entries indexed by
    ``K0`` are replaced by ``-A``.  When the mean of the resulting sequence
    over ``I0 u K0`` is at least ``c2``, at least a ``theta`` proportion of
    ``I0 u K0`` consists of ultimate c1-Pliss times of ``a`` lying in ``I0``.
    """
    vals = _values(a)
    pi = len(vals)
    if parts.n != pi:
        raise PreconditionError(f"partition covers 1..{parts.n}, period is {pi}")
    if not -A < c1 < c2 < A:
        raise ParameterError(f"need -A < c1 < c2 < A, got A={A}, c1={c1}, c2={c2}")
    over = [i for i, v in enumerate(vals, 1) if abs(v) > A]
    if over:
        raise PreconditionError(f"|a_i| <= A fails at indices {over}")
    low = [i for i in sorted(parts.J0) if vals[i - 1] < c2]
    if low:
        raise PreconditionError(f"a_i >= c2 fails on J0 at indices {low}")
    IK = parts.I0 | parts.K0
    if not IK:
        raise PreconditionError("I0 u K0 is empty")
    theta = pliss_theta(A, c1, c2)

    _, renumber = reduced_sequence(vals, parts.J0)
    d = [vals[i - 1] if i in parts.I0 else -A for i in renumber]
    exact = all(_is_exact(v) for v in d) and _is_exact(c2)
    d_mean = Fraction(sum(d), len(d)) if exact else math.fsum(d) / len(d)
    holds = d_mean >= c2 - (0 if exact else tie_tol)

    ultimate = ultimate_pliss_times(PeriodicSequence.of(vals, A), c1, tie_tol)
    in_I0 = [i for i in ultimate if i in parts.I0]
    fraction = Fraction(len(in_I0), len(IK))
    return PretaporterReport(bool(holds), in_I0, fraction, theta, d_mean)
