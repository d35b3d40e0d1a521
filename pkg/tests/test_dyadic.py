import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fhcdensity import dyadic, weights
from fhcdensity.dyadic import StepFunction

I = StepFunction.identity()
T1 = StepFunction.tower(1)
T2 = StepFunction.tower(2)
step_functions = st.sampled_from([I, T1, T2, StepFunction.custom([1, 3, 4, 9])])


def oracle(f, K):
    return list(itertools.islice(dyadic.iter_nk(f), K))


# --- step functions -----------------------------------------------------

def test_step_function_values():
    assert [I(j) for j in range(6)] == [0, 1, 2, 3, 4, 5]
    assert [T1(j) for j in range(1, 9)] == [1, 1, 1, 2, 2, 2, 2, 3]
    assert T2(15) == 1 and T2(16) == 2 and T2(255) == 2 and T2(256) == 3
    assert [T1.a(m) for m in range(1, 5)] == [1, 4, 8, 16]
    assert isinstance(T2.a(17), dyadic.TowerValue)
    assert StepFunction.parse("tower:2") == T2
    with pytest.raises(ValueError):
        StepFunction.custom([2, 5])
    with pytest.raises(ValueError):
        StepFunction.parse("log")


@given(step_functions, st.integers(0, 10 ** 6))
@settings(deadline=None)
def test_step_function_monotone_and_vectorized(f, j):
    assert f(j) <= f(j + 1) <= max(f(j) + 1, 1)
    assert f(j) <= j
    assert list(f.values([j, j + 1])) == [f(j), f(j + 1)]


@given(step_functions, st.integers(0, 10 ** 5))
@settings(max_examples=40, deadline=None)
def test_prefix_sum_identity(f, L):
    assert f.prefix_sum(L) == int(f.values(np.arange(L + 1)).sum())


# --- binary profiles ----------------------------------------------------

@pytest.mark.parametrize("k,blocks,delta,l", [
    (1, ((0, 1),), 1, 1), (6, ((1, 2),), 2, 2), (4, ((2, 1),), 1, 3),
])
def test_profile_examples(k, blocks, delta, l):
    p = dyadic.dyadic_profile(k)
    assert (p.blocks, p.delta, p.l) == (blocks, delta, l)


def test_profile_domain():
    with pytest.raises(ValueError):
        dyadic.dyadic_profile(0)


@given(st.integers(1, 2 ** 62))
def test_profile_reconstructs_k(k):
    p = dyadic.dyadic_profile(k)
    assert sum(((1 << L) - 1) << q for q, L in p.blocks) == k
    # blocks are maximal: separated by at least one zero
    for (q0, L0), (q1, _) in zip(p.blocks, p.blocks[1:]):
        assert q1 > q0 + L0
    assert p.in_I(p.l, p.delta)


def test_vectorized_profiles():
    K = 5000
    d, tz = dyadic.deltas(K), dyadic.trailing_zeros(K)
    for k in range(1, K + 1):
        p = dyadic.dyadic_profile(k)
        assert (d[k - 1], tz[k - 1]) == (p.delta, p.trailing_zeros)


# --- the sequence -------------------------------------------------------

def test_recursion_examples():
    assert list(dyadic.nk_recursive(I, 8)) == [1, 3, 6, 9, 11, 14, 19, 23]
    assert list(dyadic.nk_recursive(T1, 4)) == [1, 3, 5, 7]
    assert oracle(I, 8) == [1, 3, 6, 9, 11, 14, 19, 23]


@pytest.mark.parametrize("f", [I, T1, T2], ids=str)
def test_recursion_matches_fold(f):
    assert list(dyadic.nk_recursive(f, 3000)) == oracle(f, 3000)


def test_closed_identity_examples():
    assert dyadic.nk_closed_identity(7) == 19
    assert dyadic.nk_closed_identity(4) == 9
    for l in range(0, 40):
        k = 2 ** l
        assert dyadic.nk_closed_identity(k) == 4 * k - 2 * (l + 1) - 1


def test_power_examples():
    assert [dyadic.nk_power(I, t) for t in (0, 1, 2, 3)] == [1, 3, 9, 23]


def test_closed_general_examples():
    assert dyadic.nk_closed_general(I, 5) == 11
    assert dyadic.nk_closed_general(I, 21) == 65
    assert dyadic.nk_closed_general(T1, 6) == oracle(T1, 6)[-1]


@given(st.integers(1, 2 ** 18))
@settings(deadline=None)
def test_closed_forms_match_recursion(k):
    n = dyadic.nk_recursive(I, k)
    assert dyadic.nk_closed_identity(k) == n[-1]
    assert dyadic.nk_closed_general(I, k) == n[-1]
    assert dyadic.nk_closed_general(T1, k) == dyadic.nk_recursive(T1, k)[-1]


@given(st.integers(1, 2 ** 60))
@settings(deadline=None)
def test_closed_forms_agree_for_huge_k(k):
    # beyond any array: the two exact formulas against each other
    assert dyadic.nk_closed_identity(k) == dyadic.nk_closed_general(I, k)


def test_closed_identity_array():
    K = 1 << 16
    assert np.array_equal(dyadic.nk_closed_identity_array(K), dyadic.nk_recursive(I, K))


def test_verify_closed_form_parallel():
    res = dyadic.verify_closed_form("general", T2, 4096, workers=2)
    assert res.checked == 4096 and res.mismatches == 0


@given(st.integers(1, 3000), step_functions.filter(lambda f: f.kind != "custom"))
@settings(max_examples=40, deadline=None)
def test_series_cross_check(k, f):
    assert dyadic.nk_series(f, k) == pytest.approx(dyadic.nk_closed_general(f, k), abs=1e-6 * k)


# --- notation parameters -------------------------------------------------

def test_notation_params_examples():
    (b,) = dyadic.notation_params(2 ** 5, I)
    assert (b.m, b.t, b.p, b.s) == (5, 0, 0, 0)
    (b,) = dyadic.notation_params(12, I)
    assert (b.q, b.L, b.m, b.t, b.p, b.s) == (2, 2, 3, 0, 1, 0)
    (b,) = dyadic.notation_params(2 ** 16, T2)
    assert (b.m, b.t, b.p) == (2, 0, 0)
    # the block (0, 1) lies below a_1 = 1 and has no m_i
    assert dyadic.notation_params(1, I)[0].degenerate
    assert not dyadic.notation_params(3, I)[0].degenerate


@given(st.integers(1, 2 ** 40), step_functions.filter(lambda f: f.kind != "custom"))
@settings(deadline=None)
def test_notation_params_consistent(k, f):
    for b in dyadic.notation_params(k, f):
        if b.degenerate:
            continue
        top = b.q + b.L - 1
        assert f.a(b.m) <= top
        assert b.t == top - f.a(b.m)
        assert f(top) == b.m


# --- separation and partition ----------------------------------------------

@pytest.mark.parametrize("f,K", [(I, 2 ** 12), (T1, 2 ** 12)], ids=["identity", "tower1"])
def test_separation(f, K):
    res = dyadic.separation_check(f, K, exhaustive=True)
    assert res.ok and res.witness is None
    assert res.pairs_checked == K * (K - 1) // 2


def test_separation_brute_force_small():
    K = 200
    n = dyadic.nk_recursive(I, K)
    fd = I.values(dyadic.deltas(K))
    assert all(n[j] - n[i] >= fd[i] + fd[j] for i in range(K) for j in range(i + 1, K))


def test_partition_examples():
    assert list(dyadic.partition_set(I, 1, 1, 8).elements(100)) == [1, 11]
    assert list(dyadic.partition_set(I, 1, 2, 8).elements(100)) == [6]


@given(st.integers(1, 3000))
@settings(max_examples=20, deadline=None)
def test_partition_disjoint_and_covering(K):
    seen = []
    for l in range(1, K.bit_length() + 1):
        for nu in range(1, K.bit_length() + 1):
            seen.extend(dyadic.partition_indices(l, nu, K).tolist())
    assert sorted(seen) == list(range(1, K + 1))


# --- asymptotics ----------------------------------------------------------

def test_lambda_indices():
    assert [dyadic.lambda_index(j) for j in range(4)] == [1, 5, 21, 85]
    assert dyadic.lambda_index(9) == 349525


def test_sandwich_examples():
    r1, r2 = dyadic.sandwich_check(I, [2 ** 10, dyadic.lambda_index(5)])
    assert r1.n_k == 4073 and r1.ok and r1.lower <= 4096 - 2 * 144 - 11
    assert r2.n_k == 5387 and r2.ok
    (r,) = dyadic.sandwich_check(T1, [2 ** 12])
    assert r.ok and r.n_k == oracle(T1, 2 ** 12)[-1]


@given(st.integers(2, 10 ** 6), step_functions)
@settings(max_examples=60, deadline=None)
def test_sandwich_holds(k, f):
    (row,) = dyadic.sandwich_check(f, [k])
    assert row.ok


def test_series_bounds():
    part, tail = T1.series(1)
    assert tail < 1e-30
    assert part == pytest.approx(1 + sum(2.0 ** (1 - 2 ** m) for m in range(2, 8)), rel=1e-15)
    part, tail = I.series(1)
    assert part + tail == pytest.approx(2.0, rel=1e-15)


def test_limit_ratio_cesaro_small():
    rep = dyadic.limit_ratio_report(I, weights.cesaro(), 10 ** 5)
    assert 0.249 <= rep.tail_min <= 0.2502
    assert not rep.warning


def test_limit_ratio_b2_positive():
    rep = dyadic.limit_ratio_report(I, weights.B(2), 10 ** 5, tail_from=10 ** 4)
    assert 0.01 <= rep.tail_min <= 1


def test_lambda_ratios_decrease_for_b_half():
    rep = dyadic.limit_ratio_report(I, weights.B(0.5), 16, lambda_js=range(8, 14))
    r = [rep.lambda_ratios[j] for j in range(8, 14)]
    assert all(x > y for x, y in zip(r, r[1:]))
