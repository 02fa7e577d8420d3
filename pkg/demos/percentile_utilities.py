"""
Percentile utilities
====================

The SLqP utility sums the Kq smallest entries of a rate vector. Kq = K is
the plain sum and Kq = 1 the minimum; everything in between trades off the
weakest users against the total.
"""

import numpy as np

from slqp import percentile_number, sgqp, slqp, slqp_supergradient

rng = np.random.default_rng(0)
rates = rng.exponential(size=12)
print("rates:", np.round(np.sort(rates), 3))

# The percentile number maps q to a user count.
for q in (100 / 12, 10, 25, 50, 100):
    Kq = percentile_number(rates.size, q)
    print(f"q = {q:6.2f}  Kq = {Kq:2d}  slqp = {slqp(rates, Kq):.4f}  sgqp = {sgqp(rates, Kq):.4f}")

# Lower and upper percentile sums split the total.
Kq = 4
print("slqp + sgqp(K - Kq) =", slqp(rates, Kq) + sgqp(rates, rates.size - Kq), " sum =", rates.sum())

# The selection mask is a supergradient: a linear upper model of a concave function.
a = slqp_supergradient(rates, Kq)
other = rng.exponential(size=12)
print("slqp(other) =", round(slqp(other, Kq), 4), "<= bound", round(slqp(rates, Kq) + a @ (other - rates), 4))
