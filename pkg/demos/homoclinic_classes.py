"""Grow invariant manifolds of saddles and group the saddles by transverse crossings."""
from nuhyp.experiments import catmap_saddles
from nuhyp.manifolds import BlowupSystem, Budgets, TorusLinearSystem, intersection_classes, make_saddle
from nuhyp.systems import CatMap
from nuhyp.systems.blowup import blowup_fixed_points
import math

cat = CatMap()
torus = TorusLinearSystem(cat)
saddles = [s for s, _ in catmap_saddles(cat, 3, torus)]
part = intersection_classes(torus, saddles, Budgets(arclength=10.0))
print(f"{len(saddles)} cat-map saddles ->", part.classes())
first = next(e for e in part.evidence if e["via"] == "direct")
crossing = next(iter(first["crossings"].values()))[0]
print("example crossing:", {k: crossing[k] for k in ("point", "angle")})

# On the blown-up torus the two fixed directions are separated by the exceptional circle.
blow = BlowupSystem(cat)
p1, p2 = blowup_fixed_points(cat)
pair = [make_saddle(blow, [0.0, math.atan(p.slope)], label=n) for n, p in (("p1", p1), ("p2", p2))]
part = intersection_classes(blow, pair, Budgets(arclength=50.0))
print("blow-up:", part.classes(), part.evidence[0].get("reason"))
