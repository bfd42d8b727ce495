"""Decay of powers of T0 against innerness of theta, over random instances.

In finite dimensions a completely non-unitary contraction has spectral
radius below 1, so its powers decay and theta is inner from both sides.
Numerically we can only look a fixed number of steps ahead, which is
where the two tests can part ways.
"""
import numpy as np

from charfunc.perturbation import cnu_split
from charfunc.verify import check_stability_innerness, smallest_decay_power, stable_ensemble

print("smallest n with 0.5^n <= 1e-8:", smallest_decay_power(np.array([[0.5]])))

rows = []
for seed, g in stable_ensemble(40):
    r = check_stability_innerness(g)
    rows.append((seed, g.d, g.k, r.info["rho"], r.info["n"], r.info["inner"], r.info["coinner"], r.status))

print("\nseed  d  k    rho(T0)   decay n   inner  co-inner  status")
for seed, d, k, rho, n, inner, coinner, status in rows:
    print(f"{seed:4d} {d:2d} {k:2d}  {rho:.6f}  {str(n):>8s}  {str(inner):>5s}  {str(coinner):>8s}  {status}")

# Decay steps grow like log(1e-8) / log(rho): a horizon of 1e4 steps covers rho up to about
limit = 10 ** (-8 / 10_000)
print(f"\nwith a 1e4-step horizon, decay is detectable only for rho(T0) <= {limit:.6f}")
slow = [r for r in rows if r[3] > limit]
for seed, *_ in slow:
    g = dict(stable_ensemble(40))[seed]
    T0 = cnu_split(g).T0
    n = smallest_decay_power(T0, 1e-8, 100_000)
    print(f"seed {seed}: decay needs n = {n} steps, beyond the horizon, although theta is inner")
