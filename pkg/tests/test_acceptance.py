"""Acceptance criteria, one test per criterion part.

Each test records a PASS/FAIL line; the session prints them together at the
end.  Criteria that cannot hold at the stated horizon are left failing.
"""
import time
from pathlib import Path

import numpy as np
import pytest

from fhcdensity import cli, dyadic, shiftlab, weights
from fhcdensity.dyadic import StepFunction

I = StepFunction.identity()
T1 = StepFunction.tower(1)
T2 = StepFunction.tower(2)


def test_c01_closed_form_identity(record_acceptance):
    t0 = time.perf_counter()
    res = dyadic.verify_closed_form("identity", I, 2 ** 20)
    dt = time.perf_counter() - t0
    ok = res.mismatches == 0 and res.checked == 2 ** 20 and dt < 10
    assert record_acceptance(1, "identity k<=2^20", ok,
                             f"checked={res.checked} mismatches={res.mismatches} time={dt:.2f}s")


@pytest.mark.parametrize("f", [I, T1, T2], ids=str)
def test_c02_closed_form_general(f, record_acceptance):
    res = dyadic.verify_closed_form("general", f, 2 ** 16)
    assert record_acceptance(2, f"general f={f}", res.mismatches == 0,
                             f"checked={res.checked} mismatches={res.mismatches}")


def test_c03_lambda_subsequence(record_acceptance):
    lam9 = dyadic.lambda_index(9)
    n = dyadic.nk_recursive(I, lam9)
    defects = []
    for j in range(1, 10):
        lam = dyadic.lambda_index(j)
        expected = 4 * lam - 2 * j * j - 4 * j - 3
        defects.append((int(n[lam - 1]) - expected, dyadic.nk_closed_general(I, lam) - expected))
    ok = lam9 == 349525 and all(d == (0, 0) for d in defects)
    assert record_acceptance(3, "n_lambda_j, j<=9", ok, f"lambda_9={lam9} defects={defects}")


@pytest.mark.parametrize("f", [I, T1], ids=str)
def test_c04_separation(f, record_acceptance):
    res = dyadic.separation_check(f, 2 ** 14, exhaustive=True)
    assert record_acceptance(4, f"all pairs f={f}", res.ok,
                             f"pairs={res.pairs_checked} witness={res.witness}")


def test_c05_natural_density_proxy(record_acceptance):
    rep = dyadic.limit_ratio_report(I, weights.cesaro(), 10 ** 6)
    ok = 0.2500 <= rep.tail_min <= 0.2502
    assert record_acceptance(5, "Cesaro tail-min K=1e6", ok, f"{rep.tail_min:.7f} in [0.2500, 0.2502]")


def test_c05_sandwich(record_acceptance):
    # 64 distinct geometric points; below 16 the rounded grid would repeat
    ks = np.unique(np.rint(np.geomspace(16, 10 ** 6, 64)).astype(np.int64))
    rows = dyadic.sandwich_check(I, ks)
    bad = [r.k for r in rows if not r.ok]
    assert record_acceptance(5, "sandwich at 64 samples", len(rows) == 64 and not bad,
                             f"samples={len(rows)} violations={bad}")


def test_c06_b2_positivity(record_acceptance):
    rep = dyadic.limit_ratio_report(I, weights.B(2), 10 ** 5, tail_from=10 ** 4)
    ok = 0.01 <= rep.tail_min <= 1.0
    assert record_acceptance(6, "B(2) positivity", ok, f"min rho_k on [1e4,1e5] = {rep.tail_min:.5f}")


def test_c06_b_half_nullity(record_acceptance):
    rep = dyadic.limit_ratio_report(I, weights.B(0.5), 16, lambda_js=range(8, 19))
    r8, r18 = rep.lambda_ratios[8], rep.lambda_ratios[18]
    ok = r18 < 1e-3 * r8
    assert record_acceptance(6, "B(1/2) nullity", ok,
                             f"ratio(18)/ratio(8) = {r18 / r8:.4f} (needs < 1e-3)")


NAMED = [weights.cesaro(), weights.C(-1), weights.C(-0.5), weights.C(1), weights.C(2),
         weights.A(0), weights.A(0.5), weights.A(1), weights.B(0), weights.B(0.5),
         weights.B(1), weights.B(2), weights.Btilde(2), weights.Btilde(3)]


def test_c07_regularity(record_acceptance):
    bad = []
    for fam in NAMED:
        rep = weights.regularity_report(fam, 10 ** 5)
        ok = rep.row_sum_defect <= 1e-12
        if fam.name == "Cesaro":
            ok = ok and rep.max_entry_last_row == 1e-5
        else:
            ok = ok and rep.max_entry_last_row <= 1.01 * rep.max_entry_bound
        if not ok:
            bad.append((fam.name, rep.max_entry_last_row, rep.row_sum_defect))
    assert record_acceptance(7, f"{len(NAMED)} families at 1e5", not bad, f"failures={bad}")


@pytest.mark.parametrize("fam,n,lo,hi", [
    (weights.C(2), 10 ** 4, 0.99, 1.01),
    (weights.B(2), 10 ** 5, 0.9, 1.1),
    (weights.A(0.5), 10 ** 5, 0.9, 1.1),
], ids=["C2", "B2", "A_half"])
def test_c08_phi_asymptotics(fam, n, lo, hi, record_acceptance):
    ratio = weights.asymptotic_ratio(fam, n)
    assert record_acceptance(8, f"{fam.name} at {n:g}", lo <= ratio <= hi,
                             f"phi/asymptotic = {ratio:.6f} in [{lo}, {hi}]")


def test_c09_parameters_and_weights(record_acceptance):
    params = shiftlab.derive_parameters()
    w = shiftlab.weights_array(params, 0, 10 ** 6)
    ok = params == shiftlab.DEFAULT and bool(np.all((w >= 0.5) & (w <= 2.0)))
    assert record_acceptance(9, "defaults and w_n in [1/2,2], n<=1e6", ok,
                             f"params=({params.a}, {params.eps}) w in [{w.min():.4f}, {w.max():.4f}]")


def test_c09_characterization(record_acceptance):
    rep = shiftlab.verify_characterization(shiftlab.DEFAULT, 10 ** 7, 2)
    ok = rep.ok and not rep.violations
    assert record_acceptance(9, "conditions at 1e7, pmax=2", ok,
                             f"flags={rep.flags} witnesses={len(rep.violations)} pairs={rep.pairs_checked}")


def test_c10_tail_bound(record_acceptance):
    T = [shiftlab.tail_bound(shiftlab.DEFAULT, p) for p in range(1, 11)]
    ok = all(x > y for x, y in zip(T, T[1:])) and T[-1] < 0.4
    assert record_acceptance(10, "T(p) decreasing, T(10)<0.4", ok, f"T(1)={T[0]:.4f} T(10)={T[-1]:.4f}")


def test_c10_empirical_proxy(record_acceptance):
    rep = shiftlab.fp_decay_report(shiftlab.DEFAULT, 0.5, [1, 3], 10 ** 6)
    ok = rep.proxy[3] < rep.proxy[1]
    assert record_acceptance(10, "A(1/2) proxy(3) < proxy(1)", ok,
                             f"proxy(1)={rep.proxy[1]:.4g} proxy(3)={rep.proxy[3]:.4g}")


SUITE = [
    ["verify", "--closed-form", "identity", "--kmax", "65536", "--out", "verify.json"],
    ["verify", "--closed-form", "general", "--f", "tower:1", "--kmax", "4096", "--out", "verify_general.csv"],
    ["sequence", "--f", "tower:2", "--kmax", "5000", "--out", "sequence.csv"],
    ["separation", "--f", "identity", "--kmax", "1024", "--exhaustive", "--out", "separation.csv"],
    ["density", "--set", "nk:identity", "--family", "B2", "--horizon", "100000", "--out", "ratios.csv"],
    ["density", "--set", "blocks4", "--family", "C:-1", "--horizon", "50000", "--out", "blocks.json"],
    ["regularity", "--family", "Btilde:2", "--horizon", "100000", "--out", "regularity.csv"],
    ["shift-build", "--horizon", "20000", "--out", "profile.csv"],
    ["shift-check", "--horizon", "1000000", "--pmax", "1", "--out", "check.csv"],
    ["fp-decay", "--horizon", "100000", "--pmax", "3", "--out", "decay.csv"],
    ["export", "--horizon", "1000000", "--out", "params.json"],
]


def _run_suite(directory, monkeypatch):
    monkeypatch.chdir(directory)
    codes = [cli.run(argv) for argv in SUITE]
    files = {p.name: p.read_bytes() for p in sorted(Path(directory).iterdir())}
    return codes, files


def test_c11_determinism(tmp_path, monkeypatch, record_acceptance):
    a, b = tmp_path / "run1", tmp_path / "run2"
    a.mkdir()
    b.mkdir()
    codes_a, files_a = _run_suite(a, monkeypatch)
    codes_b, files_b = _run_suite(b, monkeypatch)
    differing = sorted(k for k in files_a if files_a[k] != files_b.get(k))
    ok = codes_a == codes_b and files_a.keys() == files_b.keys() and not differing
    assert record_acceptance(11, "two CLI suite runs", ok,
                             f"files={len(files_a)} differing={differing} exit codes={codes_a}")
