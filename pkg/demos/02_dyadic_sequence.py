"""The dyadic sequence n_k(f) and its density.

Builds n_k for f = identity and a tower step function, checks the closed
forms, and tracks the Cesaro and B(2) ratios along the sequence.
Run with ``python demos/02_dyadic_sequence.py``.
"""
import numpy as np

from fhcdensity import dyadic, weights
from fhcdensity.dyadic import StepFunction

I = StepFunction.identity()
T1 = StepFunction.tower(1)

# first terms and their binary profiles
n = dyadic.nk_recursive(I, 16)
for k in range(1, 17):
    p = dyadic.dyadic_profile(k)
    print(f"k={k:2d} {k:05b} delta={p.delta} n_k={n[k - 1]}")

# closed forms agree with the recursion
print(dyadic.verify_closed_form("identity", I, 2 ** 16))
print(dyadic.verify_closed_form("general", T1, 2 ** 14))

# n_k - 4k is smallest on lambda_j = 1 + 4 + ... + 4^j
for j in range(1, 8):
    lam = dyadic.lambda_index(j)
    print(f"j={j} lambda={lam} n-4k={dyadic.nk_closed_general(I, lam) - 4 * lam}")

# the sandwich around 2kS for both step functions
ks = np.unique(np.geomspace(2, 10 ** 6, 12).astype(np.int64))
for f in (I, T1):
    rows = dyadic.sandwich_check(f, ks)
    print(f, all(r.ok for r in rows), [(r.k, r.lower, r.n_k, r.upper) for r in rows[-2:]])

# separation: n_j - n_i >= f(delta_i) + f(delta_j)
print(dyadic.separation_check(I, 2 ** 12, exhaustive=True))

# Cesaro ratio tends to 1/4, the B(2) ratio stays positive
for fam in (weights.cesaro(), weights.B(2)):
    rep = dyadic.limit_ratio_report(I, fam, 10 ** 5, tail_from=10 ** 4)
    print(f"{fam.name}: tail min {rep.tail_min:.5f}")

# under B(1/2) the ratio at lambda-indices keeps shrinking, but slowly
rep = dyadic.limit_ratio_report(I, weights.B(0.5), 16, lambda_js=range(8, 19, 2))
print({j: f"{r:.3e}" for j, r in rep.lambda_ratios.items()})
