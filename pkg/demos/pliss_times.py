"""Pliss times of a noisy sequence, and how many the counting bound promises."""
from fractions import Fraction

import numpy as np

from nuhyp.pliss import (IndexPartition, PeriodicSequence, localized_pliss_lowering, pliss_report, pliss_theta,
                         pretaporter, ultimate_pliss_times)

rng = np.random.default_rng(7)

# A sequence in [-1, 1] whose mean is comfortably above c2.
a = 2 * rng.beta(5.0, 1.0, 60) - 1
c1, c2 = 0.2, 0.5
rep = pliss_report(a, c1, c2)
print(f"mean {a.mean():.3f}, {rep.count} Pliss times, bound theta*n = {rep.theta_bound * len(a):.1f}")
print("first few:", rep.pliss_times[:10])

# theta = (c2 - c1) / (A - c1) with A = max |a_i|
print("theta for A=1:", pliss_theta(1, Fraction(1, 5), Fraction(1, 2)))

# Forcing the times into a prescribed set: push everything outside I below c1.
I = set(range(1, 61, 2))
odd = localized_pliss_lowering(a, I, c0=0.0, c1=c1)
print(f"{len(odd)} of them survive when only odd indices are kept:", odd[:8], "...")

# Periodic sequences: a time is "ultimate" if it repeats in every period.
period = [Fraction(v) for v in ("0.9", "-0.2", "0.8", "0.7", "0.6", "0.95")]
seq = PeriodicSequence.of(period, 1)
print("period mean", float(seq.mean()), "ultimate times", ultimate_pliss_times(seq, Fraction(1, 5)))

# Drop the two large entries (J0), keep the rest in I0.
parts = IndexPartition(frozenset({1, 2, 4, 5}), frozenset({3, 6}), frozenset(), 6)
pt = pretaporter(seq, parts, 1, Fraction(1, 5), Fraction(1, 2))
print("hypothesis holds:", pt.hypothesis_holds, "times in I0:", pt.ultimate_times_in_I0,
      f"fraction {pt.fraction} vs theta {pt.theta}")
