import math

import numpy as np
import pytest

from nuhyp.errors import ParameterError, PreconditionError
from nuhyp.experiments import catmap_saddles
from nuhyp.manifolds import (NOT_FOUND, BlowupSystem, Budgets, Figure8Flow, LinearPlaneSystem, ManifoldCurve,
                             ProximityPoint, TorusLinearSystem, curve_to_csv, grow_manifold, homoclinically_related,
                             intersection_classes, make_saddle, proximity_intersection_test, return_map,
                             transverse_intersections)
from nuhyp.systems import CatMap, Figure8System, blowup_fixed_points

from oracles import cat_line_crossings

CAT = CatMap(((2, 1), (1, 1)))
TORUS = TorusLinearSystem(CAT)
SMALL = Budgets(arclength=4.0)


@pytest.fixture(scope="module")
def plane():
    system = LinearPlaneSystem([[2.0, 0.0], [0.0, 0.5]])
    return system, make_saddle(system, [0.0, 0.0])


def polyline(plane, pts):
    system, saddle = plane
    return ManifoldCurve("unstable", 1, np.array(pts, dtype=float), 0.0, saddle, system, h_min=1e-12)


def eigen_angle(m):
    s, u = m.eigendirections()
    return math.acos(abs(float(s @ u)))


def distance_to_polyline(points, curve):
    a, b = curve[:-1], curve[1:]
    ab = b - a
    L2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    out = []
    for p in points:
        t = np.clip(np.einsum("ij,ij->i", p - a, ab) / L2, 0, 1)
        out.append(float(np.min(np.hypot(*(a + t[:, None] * ab - p).T))))
    return np.array(out)


def test_straight_lines_cross_once(plane):
    c1 = polyline(plane, [[-1, -0.3], [1, 0.3]])
    c2 = polyline(plane, [[-0.5, 1], [0.5, -1]])
    (hit,) = transverse_intersections(c1, c2)
    assert np.allclose(hit.point, [0, 0], atol=1e-15)
    want = abs(math.atan2(0.3, 1) - math.atan2(-1, 0.5))
    assert abs(hit.angle - min(want, math.pi - want)) < 1e-12


def test_parallel_and_shallow_lines(plane):
    c1 = polyline(plane, [[0, 0], [1, 1]])
    assert transverse_intersections(c1, polyline(plane, [[0, 0.1], [1, 1.1]])) == []
    shallow = polyline(plane, [[0, 0.0005], [1, 0.9995]])
    assert transverse_intersections(c1, shallow, angle_min=1e-3) == []
    with pytest.raises(ParameterError):
        transverse_intersections(c1, c1, angle_min=0)


def test_saddle_record(plane):
    system, saddle = plane
    assert saddle.eigenvalues == (0.5, 2.0)
    assert np.allclose(saddle.eigenvectors[1], [1, 0])
    with pytest.raises(PreconditionError):
        make_saddle(system, [0.3, 0.0])
    with pytest.raises(PreconditionError):
        make_saddle(LinearPlaneSystem([[1.0, 1.0], [-1.0, 1.0]]), [0.0, 0.0])


def test_linear_manifold_is_the_eigenline(plane):
    system, saddle = plane
    c = grow_manifold(system, saddle, "unstable", budget=3.0)
    assert np.all(c.points[:, 1] == 0) and c.arclength == pytest.approx(3.0, abs=0.06)
    with pytest.raises(ParameterError):
        grow_manifold(system, saddle, "sideways")


def test_partial_flag_when_domains_run_out(plane):
    system, saddle = plane
    c = grow_manifold(system, saddle, "stable", budget=5.0, max_domains=3)
    assert c.partial and c.reason == "domain limit reached"


def test_cat_homoclinic_crossing_angle():
    p = make_saddle(TORUS, [0.0, 0.0])
    wu = grow_manifold(TORUS, p, "unstable", budget=10.0)
    ws = grow_manifold(TORUS, p, "stable", budget=10.0)
    hits = transverse_intersections(wu, ws, exclude=[p.point], exclude_radius=1e-8)
    assert len(hits) >= 1
    assert max(abs(h.angle - eigen_angle(CAT)) for h in hits) < 1e-6


def test_self_relation():
    p = make_saddle(TORUS, [0.0, 0.0], label="fixed")
    res = homoclinically_related(TORUS, p, p, SMALL)
    assert res.related
    part = intersection_classes(TORUS, [p], SMALL)
    assert part.classes() == [[0]]


def test_cat_saddles_related_and_oracle_agrees():
    pairs = catmap_saddles(CAT, 3, TORUS)
    saddles = [s for s, _ in pairs]
    for i in range(len(saddles)):
        for j in range(i + 1, len(saddles)):
            p, q = saddles[i], saddles[j]
            assert cat_line_crossings(CAT, p.point, q.point, SMALL.arclength), "analytic crossing exists"
            res = homoclinically_related(TORUS, p, q, SMALL)
            assert res.related
            for crossings in res.evidence.values():
                for c in crossings:
                    assert abs(c.angle - eigen_angle(CAT)) < 1e-6


def test_crossings_lie_on_the_analytic_lines():
    s_dir, u_dir = CAT.eigendirections()
    p = make_saddle(TORUS, [0.0, 0.0])
    q = make_saddle(TORUS, [0.5, 0.0], period=3)
    res = homoclinically_related(TORUS, p, q, SMALL)
    for name, (a, b) in (("Wu(p)^Ws(q)", (p, q)), ("Wu(q)^Ws(p)", (q, p))):
        for c in res.evidence[name]:
            pt = np.array(c.point)
            for base, d in ((a.point, u_dir), (b.point, s_dir)):
                # distance to the line through base with direction d, modulo the lattice
                normal = np.array([-d[1], d[0]])
                off = (pt - base) @ normal
                lattice = np.array([[i, j] for i in range(-6, 7) for j in range(-6, 7)]) @ normal
                assert np.min(np.abs(off - lattice)) < 1e-6


def test_cat_intersection_classes_single():
    saddles = [s for s, _ in catmap_saddles(CAT, 3, TORUS)]
    part = intersection_classes(TORUS, saddles, SMALL)
    assert part.classes() == [list(range(len(saddles)))]
    direct = [e for e in part.evidence if e["via"] == "direct"]
    assert direct and all(e["crossings"] for e in direct)


@pytest.fixture(scope="module")
def blowup_pair():
    system = BlowupSystem(CAT)
    p1, p2 = blowup_fixed_points(CAT)
    s1 = make_saddle(system, [0.0, math.atan(p1.slope)], label="p1")
    s2 = make_saddle(system, [0.0, math.atan(p2.slope)], label="p2")
    return system, s1, s2


def test_blowup_pair_not_related(blowup_pair):
    system, s1, s2 = blowup_pair
    res = homoclinically_related(system, s1, s2, Budgets(arclength=50.0))
    assert not res.related and res.reason == NOT_FOUND
    part = intersection_classes(system, [s1, s2], Budgets(arclength=50.0))
    assert part.classes() == [[0], [1]]


def test_relation_is_symmetric(blowup_pair):
    saddles = [s for s, _ in catmap_saddles(CAT, 2, TORUS)]
    for p in saddles:
        for q in saddles:
            assert homoclinically_related(TORUS, p, q, SMALL).related == \
                homoclinically_related(TORUS, q, p, SMALL).related
    system, s1, s2 = blowup_pair
    assert homoclinically_related(system, s1, s2, SMALL).related == \
        homoclinically_related(system, s2, s1, SMALL).related


def test_more_budget_keeps_relations():
    saddles = [s for s, _ in catmap_saddles(CAT, 3, TORUS)]
    p, q = saddles[0], saddles[-1]
    results = [homoclinically_related(TORUS, p, q, Budgets(arclength=b)).related for b in (2.0, 4.0, 8.0)]
    assert results == sorted(results)


def test_partition_evidence_reverifies():
    saddles = [s for s, _ in catmap_saddles(CAT, 2, TORUS)]
    budgets = SMALL
    part = intersection_classes(TORUS, saddles, budgets)
    for rec in part.evidence:
        if rec["via"] != "direct":
            continue
        i, j = rec["pair"]
        for name, (a, b) in (("Wu(p)^Ws(q)", (i, j)), ("Wu(q)^Ws(p)", (j, i))):
            for stored in rec["crossings"][name]:
                again = []
                for su in (1, -1):
                    cu = grow_manifold(TORUS, saddles[a], "unstable", su, budget=budgets.arclength)
                    for ss in (1, -1):
                        cs = grow_manifold(TORUS, saddles[b], "stable", ss, budget=budgets.arclength)
                        again += transverse_intersections(cu, cs, budgets.angle_min)
                assert any(math.dist(c.point, stored["point"]) < 1e-9 and c.angle >= budgets.angle_min
                           for c in again)


def _tube_check(system, saddle, budget, tol):
    # only points whose images stay inside the grown part can be checked
    c = grow_manifold(system, saddle, "unstable", budget=budget, tol=tol)
    cum = np.concatenate([[0], np.cumsum(np.hypot(*np.diff(c.points, axis=0).T))])
    stretch = 2 * abs(saddle.eigenvalues[1])
    head = c.points[1:][cum[1:] <= c.arclength / stretch]
    idx = np.linspace(0, len(head) - 1, 200).round().astype(int)
    imgs = return_map(system, saddle)(head[idx])
    return np.max(distance_to_polyline(imgs, c.points))


def test_invariance_tube_cat_map():
    p = make_saddle(TORUS, [0.0, 0.0])
    assert _tube_check(TORUS, p, 10.0, 1e-6) <= 5e-6


def test_invariance_tube_figure8():
    system = Figure8Flow(Figure8System(64))
    p = make_saddle(system, [0.25, 0.0])
    assert _tube_check(system, p, 0.6, 1e-6) <= 5e-6


def test_invariance_tube_blowup(blowup_pair):
    system, s1, _ = blowup_pair
    assert _tube_check(system, s1, 3.0, 1e-6) <= 5e-6


def test_curve_csv():
    p = make_saddle(TORUS, [0.0, 0.0])
    text = curve_to_csv(grow_manifold(TORUS, p, "unstable", budget=0.5))
    lines = text.splitlines()
    assert lines[0] == "index,gx,gy,patch,cx,cy" and lines[1].startswith("0,0.0,0.0,0,")


def test_proximity_examples():
    x = ProximityPoint((0.1, 0.2), 0.5, 0.5)
    assert proximity_intersection_test(x, x, 1e-9)
    assert not proximity_intersection_test(x, ProximityPoint((0.1, 0.5), 0.5, 0.5), 0.2)
    with pytest.raises(PreconditionError):
        proximity_intersection_test(x, ProximityPoint((0.1, 0.2), 0.01, 0.5), 0.1, delta=0.1)
    with pytest.raises(ParameterError):
        proximity_intersection_test(x, x, 0)
