"""The weighted backward shift built from the sets E_p.

Builds the weight profile, checks the four characterization conditions at
a moderate horizon, and evaluates the tail bounds T(p).
Run with ``python demos/03_shift_counterexample.py``.
"""
import numpy as np

from fhcdensity import shiftlab
from fhcdensity.shiftlab import DEFAULT, ShiftParameters, ShiftProfile

# parameters and their sufficient conditions
for c in shiftlab.check_parameters(DEFAULT):
    print(f"{'ok ' if c.ok else 'BAD'} {c.name}: {c.detail}")
print("b_p:", [DEFAULT.b(p) for p in range(1, 5)])

# E_1 lives in the windows around 12^3 and 12^5
e1 = shiftlab.ep_elements(DEFAULT, 1, 10 ** 6)
print("E_1:", e1[:5], "...", e1.size, "elements")

# the product profile around the first plateau of b_1 = 8
logP = shiftlab.log2_product_array(DEFAULT, 0, 20)
print("log2 P(0..19):", logP)
w = shiftlab.weights_array(DEFAULT, 0, 10 ** 6)
print("weights in", w.min(), w.max())

# conditions (a)-(d) and the gap lemma
rep = shiftlab.verify_characterization(DEFAULT, 10 ** 6, 1)
print(rep.flags, "pairs:", rep.pairs_checked)

# the literal offsets [0, p] break the gap lemma at once
bad = shiftlab.verify_characterization(ShiftParameters(ep_offsets="literal"), 10 ** 5, 1)
print("literal offsets:", bad.flags, bad.violations[:2])

# analytic tails and the empirical A(1/2) ratio of G_p
dec = shiftlab.fp_decay_report(DEFAULT, 0.5, [1, 2, 3], 10 ** 6)
for p in (1, 2, 3):
    print(f"p={p} T(p)={dec.tail[p]:.4f} proxy={dec.proxy[p]:.4g}")

# an orbit point landing on e_0
n0 = int(e1[0])
gain = np.exp2(float(shiftlab.log2_product(DEFAULT, n0 + 1) - shiftlab.log2_product(DEFAULT, 1)))
hits = shiftlab.orbit_hit_set(ShiftProfile(), {n0: 1 / gain}, 0.5, 2 * n0)
print("hits:", hits.elements(2 * n0))
