"""Dyadic block combinatorics and the sequences ``n_k(f)``.

Write ``k`` in binary and let ``delta_k`` be the length of its lowest block of
ones.  For a non-decreasing step function ``f`` with ``f(1) = 1`` put

    n_1 = 1,    n_k = n_{k-1} + f(delta_{k-1}) + f(delta_k).

The recursion is the oracle; the closed forms below rebuild ``n_k`` from the
block decomposition of ``k`` and must agree with it exactly.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .weights import IntegerSet, WeightFamily, density_via_subsequence, prefix_logsumexp

__all__ = [
    "StepFunction",
    "TowerValue",
    "DyadicProfile",
    "NotationParams",
    "dyadic_profile",
    "deltas",
    "nk_recursive",
    "iter_nk",
    "nk_closed_identity",
    "nk_closed_identity_array",
    "nk_power",
    "nk_closed_general",
    "nk_series",
    "notation_params",
    "separation_check",
    "partition_indices",
    "partition_set",
    "nk_set",
    "lambda_index",
    "sandwich_check",
    "limit_ratio_report",
    "verify_closed_form",
]

# exponents above this are kept symbolic
MAX_MATERIALIZED_BITS = 1 << 16


@dataclass(frozen=True)
class TowerValue:
    """Stand-in for ``2^2^...^m`` (``s`` twos) when it is too large to build."""

    s: int
    m: int

    def __str__(self):
        return "2^" * self.s + str(self.m)


def _ilog2(x: int) -> int:
    return x.bit_length() - 1


@dataclass(frozen=True)
class StepFunction:
    """``f(j) = m`` for ``a_m <= j < a_{m+1}`` with ``a_1 = 1``; ``f(0) = 0``.

    ``kind`` is ``"identity"`` (``a_m = m``), ``"tower"`` (``a_m`` an
    exponential tower with ``s`` twos over ``m`` for ``m >= 2``) or
    ``"custom"`` (explicit finite ``breakpoints``; ``f`` stays at
    ``len(breakpoints)`` beyond the last one).
    """

    kind: str
    s: int = 0
    breakpoints: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.kind == "tower" and self.s < 1:
            raise ValueError("tower needs s >= 1")
        if self.kind == "custom":
            a = self.breakpoints
            if not a or a[0] != 1:
                raise ValueError("custom step function needs a_1 = 1")
            if any(y <= x for x, y in zip(a, a[1:])):
                raise ValueError("breakpoints must be strictly increasing")
        elif self.kind not in ("identity", "tower"):
            raise ValueError(f"unknown step function kind {self.kind!r}")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def tower(cls, s: int):
        return cls("tower", s)

    @classmethod
    def custom(cls, breakpoints: Sequence[int]):
        return cls("custom", 0, tuple(int(b) for b in breakpoints))

    @classmethod
    def parse(cls, text: str) -> "StepFunction":
        text = text.strip()
        if text == "identity":
            return cls.identity()
        if text.startswith("tower:"):
            return cls.tower(int(text.split(":", 1)[1]))
        raise ValueError(f"unknown step function {text!r}")

    def __str__(self):
        if self.kind == "tower":
            return f"tower:{self.s}"
        if self.kind == "custom":
            return "custom:" + ",".join(map(str, self.breakpoints))
        return self.kind

    def __call__(self, j: int) -> int:
        j = int(j)
        if j < 0:
            raise ValueError("f is defined on j >= 0")
        if j == 0:
            return 0
        if self.kind == "identity":
            return j
        if self.kind == "custom":
            return bisect_right(self.breakpoints, j)
        x = j
        for _ in range(self.s):
            if x < 1:
                return 1
            x = _ilog2(x)
        return max(1, x)

    def a(self, m: int):
        """``a_m`` as an int, or a :class:`TowerValue` when too large."""
        if m < 1:
            raise ValueError("a_m is indexed from m = 1")
        if self.kind == "identity":
            return m
        if self.kind == "custom":
            if m > len(self.breakpoints):
                raise IndexError("custom step function has no a_m for this m")
            return self.breakpoints[m - 1]
        if m == 1:
            return 1
        v = m
        for _ in range(self.s):
            if v > MAX_MATERIALIZED_BITS:
                return TowerValue(self.s, m)
            v = 1 << v
        return v

    def breakpoints_upto(self, t: int) -> List[int]:
        """All ``a_m <= t`` in increasing order."""
        out = []
        m = 1
        while True:
            try:
                v = self.a(m)
            except IndexError:
                return out
            if isinstance(v, TowerValue) or v > t:
                return out
            out.append(v)
            m += 1

    def values(self, js) -> np.ndarray:
        """Vectorized ``f`` on a non-negative integer array."""
        js = np.asarray(js, dtype=np.int64)
        if js.size == 0:
            return js.copy()
        if self.kind == "identity":
            return js.copy()
        bp = np.array(self.breakpoints_upto(int(js.max())), dtype=np.int64)
        return np.searchsorted(bp, js, side="right").astype(np.int64)

    def prefix_sum(self, L: int) -> int:
        """``sum_{j<=L} f(j)`` computed interval by interval."""
        if L <= 0:
            return 0
        if self.kind == "identity":
            return L * (L + 1) // 2
        bp = self.breakpoints_upto(L) + [L + 1]
        total = 0
        for m in range(1, len(bp)):
            lo, hi = bp[m - 1], min(bp[m], L + 1)
            total += m * (hi - lo)
        return total

    def series(self, start: int = 1, tol: float = 2.0 ** -64) -> Tuple[float, float]:
        """``sum_{l>=start} 2^{1-a_l}`` truncated once terms drop below ``tol``.

        Returns ``(partial, tail_bound)``; the true value lies in
        ``[partial, partial + tail_bound]``.
        """
        total = 0.0
        m = max(start, 1)
        last_exp = 0
        while True:
            try:
                v = self.a(m)
            except IndexError:
                return total, 0.0
            if isinstance(v, TowerValue) or v > 1100:
                break
            term = 2.0 ** (1 - v)
            if term < tol:
                last_exp = v
                break
            total += term
            last_exp = v
            m += 1
        # remaining a_l are distinct integers >= last_exp
        return total, 2.0 ** (2 - max(last_exp, 1))


# ---------------------------------------------------------------------------
# dyadic profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicProfile:
    k: int
    trailing_zeros: int
    delta: int
    blocks: Tuple[Tuple[int, int], ...]

    @property
    def l(self) -> int:
        return self.trailing_zeros + 1

    def in_I(self, l: int, nu: int) -> bool:
        """Membership of ``k`` in ``I(l, nu)``."""
        return self.trailing_zeros == l - 1 and self.delta == nu


def dyadic_profile(k: int) -> DyadicProfile:
    """Maximal blocks of ones of ``k`` as ``(start, length)``, lowest first."""
    k = int(k)
    if k < 1:
        raise ValueError("dyadic_profile needs k >= 1")
    blocks = []
    pos, x = 0, k
    while x:
        tz = _ilog2(x & -x)
        x >>= tz
        pos += tz
        ones = _ilog2((x + 1) & -(x + 1))
        blocks.append((pos, ones))
        x >>= ones
        pos += ones
    return DyadicProfile(k, blocks[0][0], blocks[0][1], tuple(blocks))


def deltas(K: int) -> np.ndarray:
    """``delta_k`` for ``k = 1..K`` (index 0 holds k = 1)."""
    k = np.arange(1, K + 1, dtype=np.int64)
    odd = k // (k & -k)
    low = (odd + 1) & -(odd + 1)
    return np.log2(low).astype(np.int64)


def trailing_zeros(K: int) -> np.ndarray:
    k = np.arange(1, K + 1, dtype=np.int64)
    return np.log2(k & -k).astype(np.int64)


# ---------------------------------------------------------------------------
# the sequence n_k(f)
# ---------------------------------------------------------------------------

def nk_recursive(f: StepFunction, K: int) -> np.ndarray:
    """``n_1..n_K`` from ``n_k = 2 sum_{i<k} f(delta_i) + f(delta_k)``.

    int64 is exact here: ``n_k <= 4k`` for every step function with ``f(j) <= j``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    fd = f.values(deltas(K))
    return 2 * np.cumsum(fd) - fd


def iter_nk(f: StepFunction) -> Iterator[int]:
    """The plain left fold of the recursion, with Python integers."""
    prev_n, prev_f, k = 0, 0, 0
    while True:
        k += 1
        fk = f(dyadic_profile(k).delta)
        prev_n = 1 if k == 1 else prev_n + prev_f + fk
        prev_f = fk
        yield prev_n


def nk_closed_identity(k: int) -> int:
    """``4k - 2 sum_blocks L_i (i + 1) - delta_k`` for ``f = id``."""
    prof = dyadic_profile(k)
    return 4 * prof.k - 2 * sum(L * (i + 1) for i, L in prof.blocks) - prof.delta


def nk_closed_identity_array(K: int) -> np.ndarray:
    """The identity closed form for ``k = 1..K``, bit by bit."""
    k = np.arange(1, K + 1, dtype=np.int64)
    weight_sum = np.zeros_like(k)
    start = np.zeros_like(k)
    prev = np.zeros_like(k, dtype=bool)
    for b in range(max(1, int(K).bit_length())):
        bit = ((k >> b) & 1).astype(bool)
        start = np.where(bit & ~prev, b, start)
        weight_sum += np.where(bit, start + 1, 0)
        prev = bit
    return 4 * k - 2 * weight_sum - deltas(K)


@lru_cache(maxsize=None)
def nk_power(f: StepFunction, t: int) -> int:
    """``n_{2^t} = sum_{j<=m} 2^{t+2-a_j} - 2m + 1`` with ``m = f(t)``."""
    if t < 0:
        raise ValueError("nk_power needs t >= 0")
    if t == 0:
        return 1
    bp = f.breakpoints_upto(t)
    m = len(bp)
    return sum(1 << (t + 2 - a) for a in bp) - 2 * m + 1


def nk_closed_general(f: StepFunction, k: int) -> int:
    """Multi-block formula: powers of two plus prefix sums of ``f``."""
    blocks = dyadic_profile(k).blocks
    total = 0
    for q, L in blocks:
        total += sum(nk_power(f, q + j) for j in range(L))
        total += 2 * f.prefix_sum(L) - L
    return total - f(blocks[0][1])


@dataclass(frozen=True)
class NotationParams:
    q: int
    L: int
    m: int
    t: int
    p: int
    s: int
    degenerate: bool


def notation_params(k: int, f: StepFunction) -> List[NotationParams]:
    """Per-block ``(m_i, t_i, p_i, s_i)`` of the explicit formula.

    ``m_i`` is the largest index with ``a_{m_i} <= q_i + L_i - 1``;
    ``p_i`` counts ``l < m_i`` with ``q_i <= a_l <= q_i + L_i - 1``.
    A block lying wholly below ``a_1`` (only the block ``(0, 1)``) has no
    ``m_i`` and is flagged degenerate.
    """
    out = []
    for q, L in dyadic_profile(k).blocks:
        top = q + L - 1
        bp = f.breakpoints_upto(top)
        m = len(bp)
        if m == 0:
            out.append(NotationParams(q, L, 0, 0, 0, 0, True))
            continue
        t = top - bp[m - 1]
        p = sum(1 for a in bp[:m - 1] if q <= a)
        s = L - 1 - t - (bp[m - 1] - bp[m - 1 - p])
        out.append(NotationParams(q, L, m, t, p, s, s < 0))
    return out


def nk_series(f: StepFunction, k: int) -> float:
    """Floating evaluation of ``n_k`` through tail sums ``R(N) = sum_{l>=N} 2^{1-a_l}``.

    Each block is expanded in the power form ``n_{2^t} = 2^{t+1}(R(1) - R(m+1))
    - 2m + 1`` and grouped by the notation parameters, which is the shape of
    the long explicit formula; only used as an inexact cross-check.
    """
    def R(N):
        part, tail = f.series(N)
        return part + 0.5 * tail

    S = R(1)
    total = 0.0
    blocks = dyadic_profile(k).blocks
    for q, L in blocks:
        for j in range(L):
            t = q + j
            if t == 0:
                total += 1.0
                continue
            m = f(t)
            total += 2.0 ** (t + 1) * (S - R(m + 1)) - 2 * m + 1
        total += 2 * f.prefix_sum(L) - L
    return total - f(blocks[0][1])


# ---------------------------------------------------------------------------
# separation and partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparationResult:
    ok: bool
    pairs_checked: int
    witness: Optional[Tuple[int, int]]


def separation_check(f: StepFunction, K: int, exhaustive: bool = False,
                     chunk: int = 512) -> SeparationResult:
    """``n_j - n_i >= f(delta_i) + f(delta_j)`` for ``i < j <= K`` and ``n_k >= f(delta_k)``.

    By default only adjacent pairs are compared: a gap ``n_j - n_i`` equals
    ``f(delta_i) + 2 sum_{i<l<j} f(delta_l) + f(delta_j)``, so adjacent pairs
    plus ``f >= 0`` cover everything.  ``exhaustive=True`` compares every pair.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    n = nk_recursive(f, K)
    fd = f.values(deltas(K))
    bad = np.flatnonzero(n < fd)
    if bad.size:
        k = int(bad[0]) + 1
        return SeparationResult(False, 0, (k, k))
    if not exhaustive:
        diff = np.diff(n) - (fd[:-1] + fd[1:])
        bad = np.flatnonzero(diff < 0)
        if bad.size or np.any(fd < 0):
            i = int(bad[0]) + 1 if bad.size else 1
            return SeparationResult(False, K - 1, (i, i + 1))
        return SeparationResult(True, K - 1, None)
    checked = 0
    for lo in range(0, K - 1, chunk):
        hi = min(lo + chunk, K - 1)
        i = np.arange(lo, hi)[:, None]
        j = np.arange(K)[None, :]
        ok = (j <= i) | (n[None, :] - n[i] >= fd[i] + fd[None, :])
        checked += int(((j > i)).sum())
        if not ok.all():
            r, c = np.argwhere(~ok)[0]
            return SeparationResult(False, checked, (lo + int(r) + 1, int(c) + 1))
    return SeparationResult(True, checked, None)


def partition_indices(l: int, nu: int, K: int) -> np.ndarray:
    """Indices ``k <= K`` in ``I(l, nu)``."""
    if l < 1 or nu < 1:
        raise ValueError("l and nu must be >= 1")
    k = np.arange(1, K + 1, dtype=np.int64)
    keep = (trailing_zeros(K) == l - 1) & (deltas(K) == nu)
    return k[keep]


def partition_set(f: StepFunction, l: int, nu: int, K: int) -> IntegerSet:
    """``{n_k : k in I(l, nu), k <= K}``."""
    idx = partition_indices(l, nu, K)
    n = nk_recursive(f, K)
    return IntegerSet.from_sorted(n[idx - 1], name=f"A({l},{nu})")


def nk_set(f: StepFunction) -> IntegerSet:
    """The whole sequence ``(n_k(f))`` as an :class:`IntegerSet`."""
    return IntegerSet(f"n_k({f})", first=lambda K: nk_recursive(f, K))


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

def lambda_index(j: int) -> int:
    """``lambda_j = sum_{0<=l<=j} 4^l``, the index minimizing ``n_k - 4k``."""
    return sum(4 ** l for l in range(j + 1))


@dataclass(frozen=True)
class SandwichRow:
    k: int
    n_k: int
    lower: Optional[int]
    upper: int
    series_value: float
    ok: bool


def _sandwich_bounds(f: StepFunction, k: int) -> Tuple[Optional[int], int]:
    lg = math.log2(k)
    slack = 1e-9 * k
    if f.kind == "identity":
        lower = 4 * k - 2 * (lg + 2) ** 2 - lg - 1
        upper = 4 * k - 2 * lg - 1
        return math.floor(lower - slack), math.ceil(upper + slack)
    part, tail = f.series(1)
    upper = 2 * k * (part + tail)
    if f.kind == "custom":
        return None, math.ceil(upper + slack)
    fl = f(int(lg))
    lower = 2 * k * part - 2 * lg * fl - 14 * lg - 8 * fl
    return math.floor(lower - slack), math.ceil(upper + slack)


def sandwich_check(f: StepFunction, k_samples: Sequence[int]) -> List[SandwichRow]:
    """Evaluate the two-sided estimate of ``n_k`` at each sampled ``k >= 2``.

    Identity: ``4k - 2(log2 k + 2)^2 - log2 k - 1 <= n_k <= 4k - 2 log2 k - 1``.
    Towers: ``2kS - 2 log2(k) f(floor log2 k) - 14 log2 k - 8 f(floor log2 k)
    <= n_k <= 2kS`` with ``S = sum_l 2^{1-a_l}``.  Bounds are rounded outward.
    """
    rows = []
    for k in k_samples:
        k = int(k)
        if k < 2:
            raise ValueError("samples must be >= 2")
        nk = nk_closed_general(f, k)
        lower, upper = _sandwich_bounds(f, k)
        ok = nk <= upper and (lower is None or lower <= nk)
        rows.append(SandwichRow(k, nk, lower, upper, nk_series(f, k), ok))
    return rows


@dataclass(frozen=True, eq=False)
class LimitRatioReport:
    family: str
    f: str
    K: int
    rho: np.ndarray
    tail_min: float
    warning: bool
    lambda_ratios: dict


def _lambda_ratios(f: StepFunction, family: WeightFamily, js: Sequence[int]) -> dict:
    """Direct-form ratio at ``N = n_{lambda+1} - 1`` for ``lambda = 2^{j+1} - 1``.

    Just before ``n_{lambda+1}`` the window ends with the longest gap seen so
    far, which is where the lower density is attained.
    """
    js = sorted(js)
    lam_max = (1 << (js[-1] + 1)) - 1
    n = nk_recursive(f, lam_max + 1)
    N = int(n[-1])
    lw = family.checked_log_weights(N)
    mask = np.zeros(N, dtype=bool)
    mask[n - 1] = True
    _, den = prefix_logsumexp(lw)
    _, num = prefix_logsumexp(np.where(mask, lw, -np.inf), ref=lw)
    out = {}
    for j in js:
        lam = (1 << (j + 1)) - 1
        end = int(n[lam]) - 1
        out[j] = float(np.exp(num[end - 1] - den[end - 1]))
    return out


def limit_ratio_report(f: StepFunction, family: WeightFamily, K: int,
                       lambda_js: Optional[Sequence[int]] = None,
                       tail_from: Optional[int] = None) -> LimitRatioReport:
    """Subsequence ratios of ``(n_k(f))`` under ``family`` up to ``K``.

    ``tail_min`` is the minimum over ``k in [tail_from, K]`` (default
    ``K // 10``); ``lambda_ratios`` maps each ``j`` to the direct ratio just
    before ``n_{lambda_j + 1}``.
    """
    if K < 16:
        raise ValueError("K must be >= 16")
    res = density_via_subsequence(nk_recursive(f, K), family, K)
    lo = max(1, K // 10 if tail_from is None else tail_from)
    lam = _lambda_ratios(f, family, lambda_js) if lambda_js else {}
    return LimitRatioReport(family.name, str(f), K, res.rho, res.tail_min(lo), res.warning, lam)


# ---------------------------------------------------------------------------
# closed-form verification
# ---------------------------------------------------------------------------

def _general_range(args):
    f, lo, hi = args
    return [nk_closed_general(f, k) for k in range(lo, hi)]


@dataclass(frozen=True)
class VerifyResult:
    kind: str
    f: str
    checked: int
    mismatches: int
    first_mismatch: Optional[Tuple[int, int, int]]


def verify_closed_form(kind: str, f: StepFunction, kmax: int, workers: int = 1) -> VerifyResult:
    """Compare a closed form with the recursion for every ``k <= kmax``.

    ``kind`` is ``"identity"`` (vectorized formula, identity ``f`` only) or
    ``"general"``.  The general form is random access, so ranges of ``k`` can
    be farmed out to ``workers`` processes; results are merged in order.
    """
    oracle = nk_recursive(f, kmax)
    if kind == "identity":
        if f.kind != "identity":
            raise ValueError("the identity closed form needs f = identity")
        closed = nk_closed_identity_array(kmax)
    elif kind == "general":
        step = max(1, -(-kmax // max(1, workers * 4)))
        ranges = [(f, lo, min(lo + step, kmax + 1)) for lo in range(1, kmax + 1, step)]
        if workers > 1:
            with ProcessPoolExecutor(workers) as ex:
                parts = list(ex.map(_general_range, ranges))
        else:
            parts = [_general_range(r) for r in ranges]
        closed = np.array([v for part in parts for v in part], dtype=np.int64)
    else:
        raise ValueError(f"unknown closed form {kind!r}")
    bad = np.flatnonzero(closed != oracle)
    first = None
    if bad.size:
        i = int(bad[0])
        first = (i + 1, int(closed[i]), int(oracle[i]))
    return VerifyResult(kind, str(f), kmax, int(bad.size), first)
