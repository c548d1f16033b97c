"""Periodic orbits of the cat map on rational grids, then the same orbits seen on the blown-up torus."""
import numpy as np

from nuhyp.cocycle import domination_check, periodic_exponents, periodic_frame
from nuhyp.experiments import orbit_through
from nuhyp.systems import CatMap, cat_periodic_orbits
from nuhyp.systems.blowup import blowup_fixed_points, blowup_lift_orbit

cat = CatMap()
print("log lambda =", cat.log_lambda)

for q in (5, 8, 13):
    orbits = cat_periodic_orbits(cat, q)
    periods = sorted(r.period for r in orbits)
    print(f"q={q}: {len(orbits)} orbits, periods {periods[:6]}..., total {sum(periods)} = q^2")

rec = cat_periodic_orbits(cat, 5)[1]
print("exponents on", rec.representative, periodic_exponents(rec.segment))
print("domination N:", domination_check(rec.segment, periodic_frame(rec.segment), 20))

# Blowing up the origin replaces it by a circle of directions.  Two directions are fixed.
p1, p2 = blowup_fixed_points(cat)
for name, p in (("p1", p1), ("p2", p2)):
    print(f"{name}: slope {p.slope:+.6f}, eigenvalues {np.round(p.eigenvalues, 6)}")

# Orbits through (1/q, 0) pass near the circle; count visits to each fixed direction.
for q in (11, 47, 97):
    lifted = blowup_lift_orbit(cat, orbit_through(cat, q), radius=0.1)
    occ = lifted.occupation
    print(f"q={q}: period {lifted.segment.period}, near p1 {occ.count_p1}, near p2 {occ.count_p2}")

# The occupation counts stay tiny because an orbit of period ~q spends O(1) steps near the origin.
print("orbit through (1/97, 0) has", orbit_through(cat, 97).period, "points")
