"""Independent reference computations used by the test suites."""
import math

import numpy as np

from nuhyp.cocycle import OrbitSegment


def block_log_norms(orbit, E, N, count, base=0):
    """``log |df^N e|`` for the unit E-vector at each block start, by plain matrix products."""
    pi = orbit.period
    out = []
    for l in range(count):
        start = base + l * N
        v = E[start % pi][:, 0]
        for i in range(start, start + N):
            v = orbit.jacobians[i % pi] @ v
        out.append(math.log(np.linalg.norm(v)))
    return out


def c_function_bruteforce(orbit, E, N, lam, periods=5, base=0):
    """``max_k exp(k N lam) prod ||df^N|E||`` over ``k <= periods * pi``."""
    logs = block_log_norms(orbit, E, N, periods * orbit.period, base)
    best, acc = 0.0, 0.0
    for k, b in enumerate(logs, start=1):
        acc += b
        best = max(best, acc + k * N * lam)
    return math.exp(best)


def random_saddle_cocycle(rng, max_period=12, spread=1.0):
    """Periodic 2x2 cocycle with positive det-1 steps, so the return map is a real saddle.

    Entries are drawn from ``[0.2, 2]`` scaled towards the identity by
    ``spread``; small spreads give mildly hyperbolic products.
    """
    pi = int(rng.integers(1, max_period + 1))
    jac = []
    for _ in range(pi):
        a = 1 + spread * rng.uniform(-0.8, 1.0)
        b, c = spread * rng.uniform(0.2, 2.0, 2)
        d = (1 + b * c) / a
        jac.append([[a, b], [c, d]])
    pts = rng.uniform(0, 1, (pi + 1, 2))
    pts[-1] = pts[0]
    return OrbitSegment(pts, np.array(jac), period=pi)


def cat_line_crossings(m, p, q, window):
    """Crossings of the unstable line through ``p`` with the stable line through ``q``.

    Works in the universal cover: ``p + s u = q + t v + n`` for lattice vectors
    ``n``, returning the parameters ``(s, t)`` with ``|s|, |t| <= window``.
    """
    vals, vecs = np.linalg.eig(m.as_array())
    order = np.argsort(np.abs(vals))
    v, u = vecs[:, order[0]], vecs[:, order[1]]
    M = np.column_stack([u, -v])
    out = []
    R = int(window) + 2
    for n1 in range(-R, R + 1):
        for n2 in range(-R, R + 1):
            s, t = np.linalg.solve(M, np.asarray(q, float) + [n1, n2] - np.asarray(p, float))
            if abs(s) <= window and abs(t) <= window:
                out.append((s, t))
    return out
