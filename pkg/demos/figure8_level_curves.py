"""Level curves of the figure-8 pendulum approach the pair of saddles as the energy gap closes."""
import numpy as np

from nuhyp.cocycle import finite_time_exponents
from nuhyp.systems.figure8 import (Figure8System, drift_bound, hamiltonian, level_curve_measure, level_curve_orbit,
                                   saddle_measure)
from nuhyp.wstar import make_family, wstar_distance

system = Figure8System(M=32)
family = make_family("cylinder")
target = saddle_measure()
T = 20000

for eps in (1e-2, 1e-3, 1e-4):
    mu = level_curve_measure(system, eps, T)
    print(f"eps={eps:g}: D = {wstar_distance(mu, target, family):.4f}")

# The convergence is slow: the time spent near the saddles only grows like log(1/eps).
orbit = level_curve_orbit(system, 1e-3, T)
H = hamiltonian(orbit.points)
slope = np.polyfit(np.arange(len(H), dtype=float), H, 1)[0]
print(f"secular energy slope {slope:.2e} per unit time; oscillation bound {drift_bound(32):.3f}")
print("finite-time exponents:", np.round(finite_time_exponents(orbit), 5))
