"""Admissible summability matrices and weighted densities of integer sets.

An admissible matrix is determined by a non-negative weight sequence
``alpha_k``: row ``n`` holds ``alpha_k / phi(n)`` for ``k <= n`` where
``phi(n) = sum_{k<=n} alpha_k``.  Weights such as ``exp(k / log(k)**2)``
overflow a double long before the horizons used here, so everything below
works with ``log(alpha_k)`` and accumulates partial sums with a blocked
log-sum-exp.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "FamilyDomainError",
    "PreconditionError",
    "WeightFamily",
    "IntegerSet",
    "DensityEstimate",
    "SubsequenceRatios",
    "RegularityReport",
    "CompareResult",
    "CrVerdict",
    "A1GapReport",
    "cesaro",
    "C",
    "A",
    "B",
    "Btilde",
    "custom",
    "parse_family",
    "cumulative_logsumexp",
    "prefix_logsumexp",
    "btilde_threshold",
    "regularity_report",
    "summatory_log",
    "asymptotic_ratio",
    "density_estimate",
    "partial_ratios",
    "density_via_subsequence",
    "density_compare",
    "cr_equivalence_check",
    "a1_gap_check",
]

TAIL_SAMPLES = 256
ORDER_TOL = 0.02
STABLE_TOL = 0.005


class FamilyDomainError(ValueError):
    """A weight family produced a NaN or +inf log-weight."""


class PreconditionError(ValueError):
    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


# ---------------------------------------------------------------------------
# weight families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeightFamily:
    """A named weight sequence ``alpha_k`` (k >= 1) given through its logarithm.

    ``log_weight`` maps a float array of indices to ``log(alpha_k)``;
    ``-inf`` encodes a zero weight.  ``phi_asymptotic`` returns the log of the
    leading-order summatory function when one is known.
    """

    name: str
    log_weight: Callable[[np.ndarray], np.ndarray]
    exact_weight: Optional[Callable[[int], Fraction]] = None
    phi_asymptotic: Optional[Callable[[float], float]] = None

    def log_weights(self, n: int) -> np.ndarray:
        """``log(alpha_k)`` for ``k = 1..n`` (index 0 holds k = 1)."""
        k = np.arange(1, n + 1, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lw = np.asarray(self.log_weight(k), dtype=np.float64)
        if lw.shape != k.shape:
            lw = np.broadcast_to(lw, k.shape).copy()
        return lw

    def checked_log_weights(self, n: int) -> np.ndarray:
        lw = self.log_weights(n)
        bad = np.flatnonzero(np.isnan(lw) | (lw == np.inf))
        if bad.size:
            raise FamilyDomainError(
                f"{self.name}: non-finite log-weight at k={int(bad[0]) + 1}")
        return lw

    def __repr__(self):
        return f"WeightFamily({self.name})"


def cesaro() -> WeightFamily:
    return WeightFamily(
        "Cesaro",
        lambda k: np.zeros_like(k),
        exact_weight=lambda k: Fraction(1),
        phi_asymptotic=lambda n: math.log(n),
    )


def C(r: float) -> WeightFamily:
    """``alpha_k = k**r`` for ``r >= -1``; ``C(0)`` is the Cesaro matrix."""
    if r < -1:
        raise ValueError("C(r) needs r >= -1")
    if r == 0:
        fam = cesaro()
        return WeightFamily("C(0)", fam.log_weight, fam.exact_weight, fam.phi_asymptotic)
    if r == -1:
        phi = lambda n: math.log(math.log(n))
    else:
        phi = lambda n: (r + 1) * math.log(n) - math.log(r + 1)
    exact = None
    if float(r).is_integer():
        ri = int(r)
        exact = lambda k: Fraction(k) ** ri
    return WeightFamily(f"C({r:g})", lambda k: r * np.log(k), exact, phi)


def A(r: float) -> WeightFamily:
    """``alpha_k = exp(k**r)`` for ``0 <= r <= 1``."""
    if not 0 <= r <= 1:
        raise ValueError("A(r) needs 0 <= r <= 1")
    if r == 0:
        phi = lambda n: 1.0 + math.log(n)
    elif r == 1:
        phi = lambda n: n + 1.0 - math.log(math.e - 1.0)
    else:
        phi = lambda n: (1 - r) * math.log(n) - math.log(r) + n ** r
    return WeightFamily(f"A({r:g})", lambda k: k ** r, None, phi)


def B(r: float) -> WeightFamily:
    """``alpha_1 = 1`` and ``alpha_k = exp(k / log(k)**r)`` for ``k >= 2``."""
    if r < 0:
        raise ValueError("B(r) needs r >= 0")

    def lw(k):
        out = k / np.log(k) ** r
        return np.where(k >= 2, out, 0.0)

    if r == 0:
        phi = lambda n: n + 1.0 - math.log(math.e - 1.0)
    else:
        phi = lambda n: r * math.log(math.log(n)) + n / math.log(n) ** r
    return WeightFamily(f"B({r:g})", lw, None, phi)


def _iterated_log(x, s):
    out = np.asarray(x, dtype=np.float64)
    for _ in range(s):
        out = np.where(out > 0, np.log(np.where(out > 0, out, 1.0)), np.nan)
    return out


def h(s: int, x):
    """``log(x) * log^{(s)}(x)``; NaN where the iterated log is undefined."""
    return np.log(x) * _iterated_log(x, s)


def btilde_threshold(s: int) -> int:
    """Smallest integer k with ``h_s(k) >= 1``."""
    lo, hi = 2.0, 4.0
    while not (h(s, hi) >= 1):
        hi *= hi
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if h(s, mid) >= 1:
            hi = mid
        else:
            lo = mid
    k = max(2, int(math.floor(lo)) - 1)
    while not (h(s, float(k)) >= 1):
        k += 1
    return k


def Btilde(s: int) -> WeightFamily:
    """``alpha_k = exp(k / h_s(k))`` above ``btilde_threshold(s)``, 1 below it."""
    if s < 2 or int(s) != s:
        raise ValueError("Btilde(s) needs an integer s >= 2")
    s = int(s)
    kstar = btilde_threshold(s)

    def lw(k):
        hk = h(s, np.maximum(k, float(kstar)))
        return np.where(k >= kstar, k / hk, 0.0)

    def phi(n):
        hn = float(h(s, float(n)))
        return math.log(hn) + n / hn

    return WeightFamily(f"Btilde({s})", lw, None, phi)


def custom(name: str, log_weight: Callable[[np.ndarray], np.ndarray],
           phi_asymptotic: Optional[Callable[[float], float]] = None) -> WeightFamily:
    return WeightFamily(name, log_weight, None, phi_asymptotic)


def parse_family(text: str) -> WeightFamily:
    """Build a family from ``"Cesaro"``, ``"C:r"``, ``"A:r"``, ``"B:r"``,
    ``"Btilde:s"`` or the compact ``"B2"`` / ``"C-1"`` forms."""
    text = text.strip()
    if text.lower() in ("cesaro", "c0", "natural"):
        return cesaro()
    for prefix, ctor in (("Btilde", Btilde), ("C", C), ("A", A), ("B", B)):
        if text.startswith(prefix):
            rest = text[len(prefix):].lstrip(":")
            if prefix == "B" and rest.startswith("tilde"):
                continue
            if not rest:
                break
            try:
                value = float(Fraction(rest))
            except (ValueError, ZeroDivisionError):
                break
            if ctor is Btilde:
                if not value.is_integer():
                    break
                value = int(value)
            return ctor(value)
    raise ValueError(f"unknown weight family {text!r}")


# ---------------------------------------------------------------------------
# log-domain accumulation
# ---------------------------------------------------------------------------

# largest rise of the running maximum allowed inside one block
JUMP = 600.0


def prefix_logsumexp(logw: np.ndarray, ref: Optional[np.ndarray] = None,
                     block: int = 2048):
    """Prefix ``log(sum(exp(logw[:i+1])))`` split as ``shift[i] + local[i]``.

    ``shift`` is the running maximum of ``ref`` (default ``logw``) taken at
    block ends, so ``local`` stays of moderate size and two prefixes built on
    the same ``ref`` can be divided without losing relative precision: their
    ratio is ``exp(local_a - local_b)``.  ``ref`` must dominate ``logw``.

    Inside a block the terms are rescaled by the running maximum at the block
    end and summed linearly; the block length is halved until the running
    maximum rises by less than ``JUMP`` across every block, so no prefix that
    matters can underflow.  Blocks are chained through a linear carry.
    """
    logw = np.asarray(logw, dtype=np.float64)
    ref = logw if ref is None else np.asarray(ref, dtype=np.float64)
    n = logw.size
    if n == 0:
        return logw.copy(), logw.copy()
    finite_ref = np.where(np.isfinite(ref), ref, -np.inf)
    running = np.maximum.accumulate(finite_ref)
    if np.isfinite(running[-1]):
        running = np.where(np.isfinite(running), running, running[np.isfinite(running)][0])
    else:
        running = np.zeros(n)
    while block > 1:
        ends = np.minimum(np.arange(block, n + block, block), n) - 1
        starts = np.maximum(np.arange(0, n, block) - 1, 0)
        rise = running[ends] - running[starts]
        if not np.any(rise > JUMP):
            break
        block //= 2
    pad = (-n) % block
    x = np.concatenate([logw, np.full(pad, -np.inf)]).reshape(-1, block)
    rx = np.concatenate([ref, np.full(pad, -np.inf)]).reshape(-1, block)
    shift = np.maximum.accumulate(rx.max(axis=1))
    shift = np.where(np.isfinite(shift), shift, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        local = np.log(np.cumsum(np.exp(x - shift[:, None]), axis=1))

    nb = x.shape[0]
    log_carry = np.empty(nb)
    c = 0.0
    for b in range(nb):
        log_carry[b] = math.log(c) if c > 0.0 else -math.inf
        last = local[b, -1]
        total = c + (math.exp(last) if last > -745.0 else 0.0)
        if b + 1 < nb:
            c = total * math.exp(shift[b] - shift[b + 1])
    local = np.logaddexp(local, log_carry[:, None])
    shift_full = np.broadcast_to(shift[:, None], x.shape)
    return shift_full.ravel()[:n].copy(), local.ravel()[:n]


def cumulative_logsumexp(logw: np.ndarray, block: int = 2048) -> np.ndarray:
    """Prefix ``log(sum(exp(logw[:i+1])))`` for every i, as plain floats."""
    shift, local = prefix_logsumexp(logw, block=block)
    return shift + local


def _prefix_ratio(num_local, den_local):
    with np.errstate(invalid="ignore"):
        r = np.exp(num_local - den_local)
    return np.minimum(np.nan_to_num(r, nan=0.0), 1.0)


def _logsumexp_fsum(lw: np.ndarray, chunk: int = 1 << 16) -> float:
    total = -math.inf
    for start in range(0, lw.size, chunk):
        x = lw[start:start + chunk]
        m = float(np.max(x))
        if m == -math.inf:
            continue
        s = math.fsum(np.exp(x - m))
        total = float(np.logaddexp(total, m + math.log(s)))
    return total


def summatory_log(family: WeightFamily, n: int) -> float:
    """``log(phi(n))`` via a streaming, exactly-rounded chunk sum."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _logsumexp_fsum(family.checked_log_weights(n))


def asymptotic_ratio(family: WeightFamily, n: int) -> Optional[float]:
    """``phi(n) / phi_asymptotic(n)``, or None without a known asymptotic."""
    if family.phi_asymptotic is None:
        return None
    return math.exp(summatory_log(family, n) - family.phi_asymptotic(n))


@dataclass(frozen=True)
class RegularityReport:
    family: str
    horizon: int
    max_entry_last_row: float
    row_sum_defect: float
    sup_abs_row_sum: float
    first_column_entry: float
    max_entry_bound: Optional[float]


def max_entry_bound(family: WeightFamily, n: int, lw: Optional[np.ndarray] = None) -> Optional[float]:
    """Leading-order size of the largest row entry, ``max alpha_k / phi_asym(n)``."""
    if family.phi_asymptotic is None:
        return None
    if lw is None:
        lw = family.log_weights(n)
    return math.exp(float(np.max(lw)) - family.phi_asymptotic(n))


def regularity_report(family: WeightFamily, horizon: int, rows: int = 64) -> RegularityReport:
    """Toeplitz-condition proxies for the admissible matrix of ``family``.

    Row ``horizon`` gives the largest entry (condition i) and the row-sum
    defect (condition ii); condition iii is the largest absolute row sum over
    ``rows`` geometrically spaced rows.
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    lw = family.checked_log_weights(horizon)
    # rescale by the largest weight so the entries keep full precision
    m = float(lw.max())
    scaled = np.exp(lw - m)
    entries = scaled / math.fsum(scaled)
    defect = abs(math.fsum(entries) - 1.0)

    sample = np.unique(np.geomspace(1, horizon, rows).astype(np.int64))
    sup_row = 0.0
    for n in sample:
        head = lw[:n]
        sc = np.exp(head - head.max())
        sup_row = max(sup_row, math.fsum(sc / math.fsum(sc)))
    sup_row = max(sup_row, math.fsum(entries))
    return RegularityReport(
        family=family.name,
        horizon=horizon,
        max_entry_last_row=float(entries.max()),
        row_sum_defect=defect,
        sup_abs_row_sum=sup_row,
        first_column_entry=float(entries[0]),
        max_entry_bound=max_entry_bound(family, horizon, lw),
    )


# ---------------------------------------------------------------------------
# integer sets
# ---------------------------------------------------------------------------

class IntegerSet:
    """A strictly increasing set of positive integers, materialized on demand.

    Provide ``upto(horizon)`` (elements <= horizon) or ``first(K)`` (first K
    elements) as array-returning callables; the missing one is derived.
    """

    def __init__(self, name: str, upto: Optional[Callable[[int], np.ndarray]] = None,
                 first: Optional[Callable[[int], np.ndarray]] = None):
        if upto is None and first is None:
            raise ValueError("need upto or first")
        self.name = name
        self._upto = upto
        self._first = first

    def __repr__(self):
        return f"IntegerSet({self.name})"

    @staticmethod
    def _validate(values, name):
        values = np.asarray(values, dtype=np.int64)
        if values.size:
            if values[0] < 1:
                raise ValueError(f"{name}: elements must be >= 1")
            if np.any(np.diff(values) <= 0):
                raise ValueError(f"{name}: elements must be strictly increasing")
        return values

    def elements(self, horizon: int) -> np.ndarray:
        if self._upto is not None:
            vals = self._validate(self._upto(horizon), self.name)
            return vals[vals <= horizon]
        K = 16
        while True:
            vals = self._validate(self._first(K), self.name)
            if vals.size < K or vals[-1] > horizon:
                return vals[vals <= horizon]
            K *= 2

    def first(self, K: int) -> np.ndarray:
        if self._first is not None:
            return self._validate(self._first(K), self.name)[:K]
        horizon = max(K, 16)
        while True:
            vals = self.elements(horizon)
            if vals.size >= K:
                return vals[:K]
            if horizon > 1 << 40:
                raise ValueError(f"{self.name}: fewer than {K} elements below 2^40")
            horizon *= 2

    def mask(self, horizon: int) -> np.ndarray:
        """Boolean indicator of length ``horizon``; index ``k-1`` stands for ``k``."""
        m = np.zeros(horizon, dtype=bool)
        m[self.elements(horizon) - 1] = True
        return m

    def complement(self) -> "IntegerSet":
        def upto(horizon):
            return np.flatnonzero(~self.mask(horizon)) + 1
        return IntegerSet(f"N\\{self.name}", upto=upto)

    @classmethod
    def naturals(cls):
        return cls("N", upto=lambda h: np.arange(1, h + 1, dtype=np.int64))

    @classmethod
    def multiples(cls, m: int):
        return cls(f"{m}N", upto=lambda h: np.arange(m, h + 1, m, dtype=np.int64))

    @classmethod
    def residues(cls, modulus: int, residues: Sequence[int]):
        rs = sorted({r % modulus for r in residues})

        def upto(h):
            k = np.arange(1, h + 1, dtype=np.int64)
            return k[np.isin(k % modulus, rs)]
        return cls(f"{rs} mod {modulus}", upto=upto)

    @classmethod
    def from_sorted(cls, values, name: str = "list"):
        arr = cls._validate(np.asarray(values, dtype=np.int64), name)
        return cls(name, upto=lambda h: arr[arr <= h], first=lambda K: arr[:K])

    @classmethod
    def from_sequence(cls, fn: Callable[[np.ndarray], np.ndarray], name: str):
        """Closed form ``k -> n_k`` evaluated on an int64 index array."""
        return cls(name, first=lambda K: np.asarray(fn(np.arange(1, K + 1, dtype=np.int64)),
                                                    dtype=np.int64))

    @classmethod
    def powers(cls, base: int):
        def upto(h):
            out, x = [], 1
            while x <= h:
                out.append(x)
                x *= base
            return np.array(out, dtype=np.int64)
        return cls(f"{base}^j", upto=upto)

    @classmethod
    def squares(cls):
        return cls.from_sequence(lambda k: k * k, "k^2")

    @classmethod
    def geometric_blocks(cls, base: int = 4, width: int = 2):
        """``union_j [base^j, width * base^j)``."""
        def upto(h):
            parts, x = [], 1
            while x <= h:
                parts.append(np.arange(x, min(width * x, h + 1), dtype=np.int64))
                x *= base
            return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        return cls(f"U[{base}^j,{width}*{base}^j)", upto=upto)


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Finite-horizon density statistics of a set under one weight family.

    ``n`` and ``ratios`` hold the sampled partial ratios.  The proxies are
    taken over the tail window ``[N/2, N]``: ``limsup_proxy`` is the
    complement form ``1 - liminf(N \\ E)`` and ``limsup_direct`` the direct
    maximum; ``complement_defect`` is their largest pointwise disagreement.
    ``tail_oscillation`` compares the proxies with those of ``[N/4, N/2]``.
    """

    set_name: str
    family: str
    horizon: int
    n: np.ndarray
    ratios: np.ndarray
    liminf_proxy: float
    limsup_proxy: float
    limsup_direct: float
    complement_defect: float
    tail_oscillation: float


def partial_ratios(elements, family: WeightFamily, horizon: int, complement: bool = False):
    """Every partial ratio ``r_n``, ``n = 1..horizon`` (index ``n-1``).

    With ``complement=True`` the ratios of the complement are returned too;
    both share one scale, so ``r_n + r_n^c = 1`` up to a few ulps.
    """
    elements = np.asarray(elements, dtype=np.int64)
    lw = family.checked_log_weights(horizon)
    mask = np.zeros(horizon, dtype=bool)
    mask[elements[elements <= horizon] - 1] = True
    _, lphi = prefix_logsumexp(lw)
    _, lnum = prefix_logsumexp(np.where(mask, lw, -np.inf), ref=lw)
    ratio = _prefix_ratio(lnum, lphi)
    if not complement:
        return ratio
    _, lcomp = prefix_logsumexp(np.where(mask, -np.inf, lw), ref=lw)
    return ratio, _prefix_ratio(lcomp, lphi)


def _window_points(lo, hi, elems):
    geo = np.geomspace(max(lo, 1), hi, TAIL_SAMPLES).astype(np.int64)
    inside = elems[(elems >= lo) & (elems <= hi)]
    pts = np.concatenate([geo, inside, inside - 1, [lo, hi]])
    pts = pts[(pts >= lo) & (pts <= hi) & (pts >= 1)]
    return np.unique(pts)


def density_estimate(E: IntegerSet, family: WeightFamily, horizon: int) -> DensityEstimate:
    if horizon < 4:
        raise ValueError("horizon must be >= 4")
    elems = E.elements(horizon)
    ratio, ratio_c = partial_ratios(elems, family, horizon, complement=True)

    def proxies(lo, hi):
        pts = _window_points(lo, hi, elems)
        r, rc = ratio[pts - 1], ratio_c[pts - 1]
        return pts, float(r.min()), float(r.max()), 1.0 - float(rc.min()), float(np.max(np.abs(r + rc - 1.0)))

    pts, lo_p, hi_direct, hi_comp, defect = proxies(horizon // 2, horizon)
    if horizon >= 8:
        _, lo_prev, _, hi_prev, _ = proxies(horizon // 4, horizon // 2)
        osc = max(abs(lo_p - lo_prev), abs(hi_comp - hi_prev))
    else:
        osc = math.inf
    geo = np.unique(np.geomspace(1, horizon, TAIL_SAMPLES).astype(np.int64))
    n = np.union1d(geo, pts)
    return DensityEstimate(
        set_name=E.name, family=family.name, horizon=horizon, n=n, ratios=ratio[n - 1],
        liminf_proxy=lo_p, limsup_proxy=hi_comp, limsup_direct=hi_direct,
        complement_defect=defect, tail_oscillation=osc,
    )


@dataclass(frozen=True, eq=False)
class SubsequenceRatios:
    family: str
    n: np.ndarray
    rho: np.ndarray
    last_row_entry: float
    warning: bool

    def tail_min(self, lo: int, hi: Optional[int] = None) -> float:
        """Minimum of ``rho_k`` over ``k in [lo, hi]`` (1-based indices)."""
        hi = len(self.rho) if hi is None else hi
        return float(self.rho[lo - 1:hi].min())


# entries of the last row above this are not treated as vanishing
VANISHING_ENTRY = 0.1


def density_via_subsequence(seq, family: WeightFamily, K: int) -> SubsequenceRatios:
    """``rho_k = sum_{j<=k} alpha_{n_j} / phi(n_k)`` for the first K elements.

    ``seq`` is an :class:`IntegerSet` or an increasing integer array.  The
    identity with the direct density holds only when ``alpha_n / phi(n)``
    tends to zero; ``warning`` is set when the last row's largest entry
    exceeds ``VANISHING_ENTRY``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n = seq.first(K) if isinstance(seq, IntegerSet) else IntegerSet._validate(seq, "seq")[:K]
    N = int(n[-1])
    lw = family.checked_log_weights(N)
    sd, ld = prefix_logsumexp(lw)
    sn, ln_ = prefix_logsumexp(lw[n - 1])
    # both shifts are weight values, so their difference is exact
    rho = _prefix_ratio((sn - sd[n - 1]) + ln_, ld[n - 1])
    last = float(np.exp(lw[N - 1] - sd[N - 1] - ld[N - 1]))
    return SubsequenceRatios(family.name, n, rho, last, last > VANISHING_ENTRY)


@dataclass(frozen=True)
class CompareResult:
    first: DensityEstimate
    second: DensityEstimate
    verdict: str  # "holds", "fails" or "inconclusive"
    lower_gap: float
    upper_gap: float


def check_ratio_decreasing(famA: WeightFamily, famB: WeightFamily, horizon: int) -> None:
    """Raise :class:`PreconditionError` unless alpha/beta decreases on [N/2, N]."""
    k = np.arange(horizon // 2, horizon + 1, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        d = np.asarray(famA.log_weight(k)) - np.asarray(famB.log_weight(k))
    step = np.diff(d)
    bad = np.flatnonzero(~(step < 0))
    if bad.size:
        idx = int(k[bad[0] + 1])
        raise PreconditionError(
            f"alpha/beta for {famA.name}/{famB.name} not decreasing at k={idx}", idx)


def density_compare(E: IntegerSet, famA: WeightFamily, famB: WeightFamily, horizon: int,
                    tol: float = ORDER_TOL) -> CompareResult:
    """Check ``dlow_B <= dlow_A <= dup_A <= dup_B`` at the proxy level.

    When the ordering fails on proxies that are still moving (tail
    oscillation above ``STABLE_TOL``) the verdict is ``"inconclusive"``.
    """
    check_ratio_decreasing(famA, famB, horizon)
    ea = density_estimate(E, famA, horizon)
    eb = density_estimate(E, famB, horizon)
    lower_gap = eb.liminf_proxy - ea.liminf_proxy
    upper_gap = ea.limsup_proxy - eb.limsup_proxy
    if lower_gap <= tol and upper_gap <= tol:
        verdict = "holds"
    elif max(ea.tail_oscillation, eb.tail_oscillation) < STABLE_TOL:
        verdict = "fails"
    else:
        verdict = "inconclusive"
    return CompareResult(ea, eb, verdict, lower_gap, upper_gap)


@dataclass(frozen=True)
class CrVerdict:
    natural_positive: bool
    cr_positive: bool
    max_ratio: float
    cr_liminf_proxy: float

    @property
    def agree(self) -> bool:
        return self.natural_positive == self.cr_positive


NK_RATIO_BOUND = 1e3


def cr_equivalence_check(E: IntegerSet, r: float, horizon: int) -> CrVerdict:
    """Compare "n_k/k bounded" with "positive lower C(r)-density proxy".

    Boundedness is read off the materialized prefix: the largest ``n_k/k`` over
    the second half of the indices must stay below ``NK_RATIO_BOUND`` and
    within 1.5x of the largest value over the preceding quarter.
    """
    if horizon < 100:
        raise ValueError("horizon must be >= 100")
    elems = E.elements(horizon)
    K = elems.size
    if K == 0:
        return CrVerdict(False, False, math.inf, 0.0)
    ratios = elems / np.arange(1, K + 1)
    tail = float(ratios[K // 2:].max())
    prev = float(ratios[K // 4:max(K // 2, K // 4 + 1)].max())
    natural = tail < NK_RATIO_BOUND and tail <= 1.5 * prev
    est = density_estimate(E, C(r), horizon)
    return CrVerdict(natural, est.liminf_proxy > 0.01, tail, est.liminf_proxy)


@dataclass(frozen=True)
class A1GapReport:
    max_gap: int
    tail_max_gap: int
    a1_liminf_proxy: float
    gap_bound: float
    consistent: bool


def a1_gap_check(E: IntegerSet, horizon: int) -> A1GapReport:
    """Largest gap of E and its A(1)-density proxy at gap right endpoints.

    Under ``alpha_k = e^k`` a window ending after ``p`` consecutive misses has
    ratio at most ``e^{-p}``, so a proxy of at least 0.01 forces the tail gaps
    to be at most ``log(100) + 1``.
    """
    if horizon < 10:
        raise ValueError("horizon must be >= 10")
    elems = E.elements(horizon)
    bound = math.log(100.0) + 1.0
    if elems.size == 0:
        return A1GapReport(horizon, horizon, 0.0, bound, True)
    gaps = np.diff(np.concatenate([[0], elems]))
    lw = np.arange(1, horizon + 1, dtype=np.float64)
    mask = np.zeros(horizon, dtype=bool)
    mask[elems - 1] = True
    _, lphi = prefix_logsumexp(lw)
    _, lnum = prefix_logsumexp(np.where(mask, lw, -np.inf), ref=lw)
    lo = horizon // 2
    in_tail = elems >= lo
    ends = elems[in_tail] - 1
    ends = ends[ends >= 1]
    if ends.size == 0:
        ends = np.array([horizon])
    proxy = float(_prefix_ratio(lnum[ends - 1], lphi[ends - 1]).min())
    tail_gap = int(gaps[in_tail].max()) if in_tail.any() else horizon - int(elems[-1])
    return A1GapReport(
        max_gap=int(gaps.max()), tail_max_gap=tail_gap, a1_liminf_proxy=proxy,
        gap_bound=bound, consistent=not (proxy >= 0.01 and tail_gap > bound),
    )
