"""Example systems: the cat map, its blow-up, and the figure-8 flow."""
from .blowup import (BlowupFixedPoint, BlowupPoint, LiftedOrbit, OccupationSummary, blowup_apply,
                     blowup_fixed_points, blowup_jacobian, blowup_lift_orbit, chart_formula, fixed_slopes)
from .catmap import CatMap, PeriodicOrbitRecord, cat_apply, cat_orbit, cat_periodic_orbits, cat_step, matrix_order_mod
from .figure8 import (Figure8System, drift_bound, figure8_time1, hamiltonian, level_curve_measure,
                      level_curve_orbit, level_start, saddle_measure)
