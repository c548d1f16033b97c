import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nuhyp.cocycle import (HyperbolicityEstimate, OrbitSegment, bundle_log_norm, c_function, cf_constant,
                           constant_frame, domination_check, equivariance_residual, finite_time_exponents,
                           hyperbolic_time_points, hyperbolic_time_sequence, hyperbolic_times, manifold_size,
                           occupation_frequency, orbit_from_json, orbit_to_json, oseledets_frame,
                           periodic_exponents, periodic_frame, restricted_log_sv, subadditive_average)
from nuhyp.errors import NotContractingError, ParameterError, PreconditionError
from nuhyp.systems import CatMap, Figure8System, cat_orbit, cat_periodic_orbits, level_curve_orbit

from oracles import block_log_norms, c_function_bruteforce, random_saddle_cocycle

CAT = CatMap(((2, 1), (1, 1)))
LAM = (3 + math.sqrt(5)) / 2
seeds = st.integers(0, 2**32 - 1)


def constant_orbit(J, n, period=None):
    J = np.asarray(J, dtype=float)
    return OrbitSegment(np.zeros((n + 1, J.shape[0])), np.repeat(J[None], n, axis=0), period)


def cat_frame(orbit):
    s, u = CAT.eigendirections()
    return constant_frame(s, u, len(orbit.points))


def test_diagonal_bundle_norm():
    orb = constant_orbit(np.diag([0.5, 2.0]), 5)
    fr = constant_frame([1, 0], [0, 1], 6)
    assert bundle_log_norm(orb, fr, "E", 3) == pytest.approx(3 * math.log(0.5), abs=1e-14)
    assert bundle_log_norm(orb, fr, "F", 3) == pytest.approx(-3 * math.log(2.0), abs=1e-14)
    with pytest.raises(PreconditionError):
        bundle_log_norm(orb, fr, "E", 6)


@pytest.mark.parametrize("n", [1, 2, 7, 40])
def test_cat_stable_bundle_norm(n):
    rec = cat_orbit(CAT, (0.2, 0.4))
    fr = cat_frame(rec.segment)
    assert bundle_log_norm(rec.segment, fr, "E", n, base=1) == pytest.approx(-n * math.log(LAM), abs=1e-11)


def test_periodic_exponent_examples():
    assert np.allclose(periodic_exponents(constant_orbit(np.eye(2), 3, 3)), 0)
    fixed = cat_orbit(CAT, (0, 0))
    assert np.allclose(fixed.exponents, [-math.log(LAM), math.log(LAM)], atol=1e-15)
    for rec in cat_periodic_orbits(CAT, 7):
        assert np.allclose(rec.exponents, [-math.log(LAM), math.log(LAM)], atol=1e-12)
    long = constant_orbit(CAT.as_array(), 3000, 3000)
    assert np.allclose(periodic_exponents(long), [-math.log(LAM), math.log(LAM)], atol=1e-12)


def test_periodic_exponents_three_dimensions():
    orb = constant_orbit(np.diag([0.5, 1.0, 3.0]), 4, 4)
    assert np.allclose(periodic_exponents(orb), np.log([0.5, 1.0, 3.0]))


def test_defective_product_warns():
    with pytest.warns(RuntimeWarning):
        ex = periodic_exponents(constant_orbit([[1.0, 1.0], [0.0, 1.0]], 2, 2))
    assert np.all(np.isfinite(ex))


def test_average_examples():
    rec = cat_orbit(CAT, (0.5, 0))
    fr = cat_frame(rec.segment)
    assert subadditive_average([rec.segment], [fr], 3, "E") == pytest.approx(-math.log(LAM), abs=1e-13)
    orb = constant_orbit(np.diag([0.5, 3.0]), 2, 2)
    fr = constant_frame([1, 0], [0, 1], 3)
    assert subadditive_average(orb, fr, 1, "E") == pytest.approx(math.log(0.5))


def test_c_function_examples():
    orb = constant_orbit(np.diag([math.exp(-1.0), 2.0]), 3, 3)
    fr = constant_frame([1, 0], [0, 1], 4)
    c = c_function(orb, fr, 1, 0.5)
    assert c.value == 1.0 and c.k_star == 0
    with pytest.raises(NotContractingError):
        c_function(orb, fr, 1, 1.5)


def test_c_function_on_segment_flags_divergence():
    seg = constant_orbit(np.diag([0.5, 2.0]), 30)
    fr = constant_frame([1, 0], [0, 1], 31)
    c = c_function(seg, fr, 2, 1.0)
    assert c.divergent and c.k_star == 15
    assert not c_function(seg, fr, 2, 0.1).divergent


def test_manifold_size():
    assert manifold_size(1.0, 0.3) == 0.3
    assert manifold_size(2.0, 0.1) == 0.05
    with pytest.raises(ParameterError):
        manifold_size(0.5, 0.1)


def test_domination_examples():
    rec = cat_orbit(CAT, (0.2, 0.4))
    assert domination_check(rec.segment, cat_frame(rec.segment), 20) == 1
    assert domination_check(constant_orbit(np.eye(2), 3, 3), constant_frame([1, 0], [0, 1], 4), 20) is None
    orb = constant_orbit(np.diag([2.0, 4.0]), 2, 2)
    assert domination_check(orb, constant_frame([1, 0], [0, 1], 3), 20) == 1


def test_occupation_examples():
    rec = cat_orbit(CAT, (0.2, 0.4))
    assert occupation_frequency(rec.segment, 1, lambda p: True) == 1.0
    assert occupation_frequency(rec.segment, 1, lambda p: False) == 0.0


def test_occupation_near_saddle_tends_to_half():
    # time-N samples of a level-curve orbit, read as one long closed loop
    s = Figure8System(M=32)
    gaps = []
    for eps in (1e-2, 1e-4):
        orb = level_curve_orbit(s, eps, 4000)
        loop = OrbitSegment(orb.points, orb.jacobians, period=orb.n_steps)
        freq = occupation_frequency(loop, 1, lambda p: math.hypot(p[0] % 1 - 0.25, p[1]) < 0.1)
        gaps.append(abs(freq - 0.5))
    assert gaps[1] < gaps[0]


def test_cf_examples():
    assert cf_constant(constant_orbit([[0.0, -1.0], [1.0, 0.0]], 2)).raw == 0.0
    assert cf_constant(constant_orbit(CAT.as_array(), 2)).raw == pytest.approx(math.log(LAM), abs=1e-14)
    cf = cf_constant(constant_orbit(np.diag([math.e, math.exp(-2)]), 2))
    assert cf.raw == pytest.approx(2.0, abs=1e-14) and cf.value == cf.raw
    assert cf_constant(constant_orbit(np.eye(2), 1)).value == 1 + 1e-9


def test_orbit_json_round_trip():
    rec = cat_orbit(CAT, (0.2, 0.4))
    back = orbit_from_json(orbit_to_json(rec.segment))
    assert back.period == rec.period
    assert np.array_equal(back.jacobians, rec.segment.jacobians)
    with pytest.raises(PreconditionError):
        orbit_from_json('{"points": []}')


def test_periodic_frame_is_equivariant():
    rng = np.random.default_rng(3)
    for _ in range(20):
        orb = random_saddle_cocycle(rng)
        assert equivariance_residual(orb, periodic_frame(orb)) < 1e-9


def test_oseledets_frame_on_cat_map():
    seg = constant_orbit(CAT.as_array(), 600)
    trimmed, fr = oseledets_frame(seg, warmup=100)
    s, u = CAT.eigendirections()
    assert trimmed.n_steps == 400
    assert np.allclose(np.abs(fr.E[:, :, 0] @ s), 1, atol=1e-12)
    assert np.allclose(np.abs(fr.F[:, :, 0] @ u), 1, atol=1e-12)


def test_finite_time_exponents_figure8_small():
    orb = level_curve_orbit(Figure8System(M=32), 1e-3, 3000)
    assert np.max(np.abs(finite_time_exponents(orb))) < 0.1


@given(seeds, st.integers(1, 8), st.integers(1, 8), st.sampled_from("EF"))
def test_subadditivity(seed, n, m, bundle):
    orb = random_saddle_cocycle(np.random.default_rng(seed))
    fr = periodic_frame(orb)
    for x in range(orb.period):
        lhs = bundle_log_norm(orb, fr, bundle, n + m, x)
        rhs = bundle_log_norm(orb, fr, bundle, n, x) + bundle_log_norm(orb, fr, bundle, m, x + n)
        assert lhs <= rhs + 1e-10


@given(seeds, st.integers(1, 6))
def test_kingman_monotone_bound(seed, n):
    orb = random_saddle_cocycle(np.random.default_rng(seed))
    fr = periodic_frame(orb)
    avgs = [subadditive_average([orb], [fr], k * n, "E") for k in (1, 2, 4)]
    exact = periodic_exponents(orb)[0]
    assert avgs[1] <= avgs[0] + 1e-9 and avgs[2] <= avgs[1] + 1e-9
    assert avgs[2] >= exact - 1e-9


@given(seeds, st.integers(1, 3), st.floats(0.1, 0.9))
def test_c_function_matches_bruteforce(seed, N, frac):
    orb = random_saddle_cocycle(np.random.default_rng(seed), max_period=8)
    fr = periodic_frame(orb)
    lam = -periodic_exponents(orb)[0] * frac
    got = c_function(orb, fr, N, lam).value
    assert abs(got - c_function_bruteforce(orb, fr.E, N, lam)) <= 1e-12 * got


@given(seeds, st.floats(0.2, 0.8))
def test_hyperbolic_times_bridge(seed, frac):
    orb = random_saddle_cocycle(np.random.default_rng(seed), max_period=10)
    fr = periodic_frame(orb)
    rate = -periodic_exponents(orb)[0]
    c1 = frac * rate
    est = HyperbolicityEstimate(rate, c1 / 2, 1, cf_constant(orb).value)
    times = hyperbolic_times(orb, fr, est, c1)
    assert times, "mean of the sequence exceeds c1, so ultimate times exist"
    pi = orb.period
    for x in hyperbolic_time_points(orb, times, 1):
        logs = block_log_norms(orb, fr.E, 1, 3 * pi, base=x)
        assert all(s <= -k * c1 + 1e-10 for k, s in enumerate(np.cumsum(logs), start=1))


def test_hyperbolic_sequence_bound():
    orb = random_saddle_cocycle(np.random.default_rng(0))
    seq = hyperbolic_time_sequence(orb, periodic_frame(orb), 2)
    assert max(abs(v) for v in seq.one_period.values) <= seq.bound_A


def dominated_at(orb, fr, n):
    bases = np.arange(orb.period)
    top_E = restricted_log_sv(orb, fr, "E", n, bases)[:, 0]
    low_F = restricted_log_sv(orb, fr, "F", n, bases)[:, -1]
    return bool(np.all(top_E <= math.log(0.5) + low_F + 1e-12))


@given(seeds)
def test_domination_is_monotone(seed):
    orb = random_saddle_cocycle(np.random.default_rng(seed), max_period=6)
    fr = periodic_frame(orb)
    for n in range(1, 9):
        if dominated_at(orb, fr, n):
            assert dominated_at(orb, fr, 2 * n)
    rec = cat_orbit(CAT, (0.2, 0.4))
    assert all(dominated_at(rec.segment, cat_frame(rec.segment), n) for n in (1, 2, 4))
