"""
Parallel Gaussian channels
==========================

Six users share a total power budget of 10 over noise levels that range from
0.05 to 250. The SLqP problem is convex here, so each percentile has a single
optimal value. Sum-rate starves the noisy users and max-min equalizes
everybody; q = 50 sits between the two.
"""

import numpy as np

from slqp import ParallelChannelInstance, percentile_number, solve_parallel_slqp, water_fill
from slqp.network import parallel_rates

z = np.array([0.1, 0.05, 250.1, 200.4, 5.4, 3.7])
inst = ParallelChannelInstance(z, 10.0)

print("user   noise    q=100      q=50    q=16.7")
table = {}
for q in (100, 50, 100 / 6):
    Kq = percentile_number(inst.K, q)
    res = solve_parallel_slqp(inst, Kq)
    table[q] = inst.unsort(parallel_rates(inst, res.p_star))
    print(f"# q = {q:5.1f} (Kq = {Kq}): SLqP = {res.value:.4f} nats, {res.iterations} iterations")
for k in range(inst.K):
    print(f"{k + 1:4d} {z[k]:8.2f} " + " ".join(f"{table[q][k]:9.4f}" for q in table))

# Sum-rate agrees with the water-filling closed form.
wf = parallel_rates(inst, water_fill(inst.z, inst.p_total)).sum()
print("water-filling sum-rate:", round(wf, 6))

# Under q = 50 the four largest rates coincide.
print("top-4 rates at q = 50:", np.round(np.sort(table[50])[2:], 6))
