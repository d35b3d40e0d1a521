"""Weighted densities of a few integer sets.

Compares the Cesaro, C(r), A(r) and B(r) densities of simple sets and shows
how faster-growing weights push the lower density of a block set down.
Run with ``python demos/01_weighted_densities.py``.
"""
from fhcdensity import weights
from fhcdensity.weights import IntegerSet

N = 10 ** 6

# multiples of 2: every regular weight family that grows slowly sees 1/2
for fam in (weights.cesaro(), weights.C(-1), weights.C(1), weights.A(0.5)):
    est = weights.density_estimate(IntegerSet.multiples(2), fam, N)
    print(f"2N   {fam.name:10s} liminf ~ {est.liminf_proxy:.6f}  limsup ~ {est.limsup_proxy:.6f}")

# the block set U [4^j, 2*4^j): natural density oscillates between 1/3 and 2/3
E = IntegerSet.geometric_blocks(4, 2)
for fam in (weights.cesaro(), weights.C(2), weights.B(2)):
    est = weights.density_estimate(E, fam, N)
    print(f"blocks {fam.name:8s} liminf ~ {est.liminf_proxy:.4f}  limsup ~ {est.limsup_proxy:.4f}")

# the comparison chain: a faster weight widens the [lower, upper] interval
res = weights.density_compare(E, weights.cesaro(), weights.B(2), N)
print("Cesaro inside B(2):", res.verdict)

# A(1) sees only gaps: multiples of 3 give e^-2 (1 - e^-1) / (1 - e^-3)
rep = weights.a1_gap_check(IntegerSet.multiples(3), 10 ** 4)
print("A(1) proxy of 3N:", rep.a1_liminf_proxy, "max gap:", rep.max_gap)

# the row entries of the summability matrix for a few families
for fam in (weights.C(-1), weights.A(1), weights.Btilde(2)):
    rep = weights.regularity_report(fam, 10 ** 5)
    print(f"{fam.name:10s} max entry {rep.max_entry_last_row:.3e}  row defect {rep.row_sum_defect:.1e}")

# squares have natural density 0; C(1) still sees them as null
ratios = weights.partial_ratios(IntegerSet.squares().elements(N), weights.C(1), N)
print("squares under C(1):", ratios[[999, 9999, 99999, N - 1]])
