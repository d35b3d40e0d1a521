"""A frequently hypercyclic weighted backward shift on c_0 that is not
A_r-frequently hypercyclic, built and checked at finite horizons.

Ingredients: an integer ``a``, a rational ``eps``, the windows
``I_u^c = [(1-c)a^u, (1+c)a^u]``, a fast-growing sequence ``b_p`` and the
syndetic partition ``u -> p(u) = 1 + v_2(u)``.  The weight is specified through
``log2P(n) = log2(w_0 ... w_{n-1})``, the upper envelope of

* p-tents: height ``p`` on ``b_p N + [-2p, 2p]``, slope 1/2 down to zero at
  distance ``4p``;
* (u, v)-profiles for ``v < u``: height ``max(p(u), p(v))`` on
  ``I_u^eps - I_v^eps + [0, p(u)]``, linear down to zero at the ends of
  ``I_u^{4 eps}``.

Every piece has slope in [-1, 1], so ``w_n = 2^{log2P(n+1) - log2P(n)}`` lies
in [1/2, 2].
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .weights import A as A_family, IntegerSet, prefix_logsumexp

__all__ = [
    "ShiftParameters",
    "ParameterCheck",
    "ShiftProfile",
    "HitReport",
    "FpDecayReport",
    "DEFAULT",
    "check_parameters",
    "derive_parameters",
    "ep_membership",
    "ep_elements",
    "log2_product",
    "log2_product_array",
    "weight_at",
    "weights_array",
    "verify_characterization",
    "tail_bound",
    "fp_decay_report",
    "orbit_hit_set",
]


def _v2(u: int) -> int:
    return (u & -u).bit_length() - 1


@lru_cache(maxsize=None)
def _ceil_exp_poly(p: int, k: int) -> int:
    """``ceil(e^{2p} p^k)`` exactly, via high-precision decimal arithmetic."""
    with localcontext() as ctx:
        ctx.prec = 60 + 2 * p
        v = Decimal(2 * p).exp() * (Decimal(p) ** k)
        return int(v.to_integral_value(rounding="ROUND_CEILING"))


@dataclass(frozen=True)
class ShiftParameters:
    """Parameters of the construction.

    ``b_exponent`` is ``K`` in ``b_p = max(8p, ceil(e^{2p} p^K))``.
    ``ep_offsets="multiples"`` takes ``E_p = U_{u in A_p} I_u^eps cap b_p N``;
    ``"literal"`` keeps the literal ``b_p N + [0, p]`` offsets, which violate the
    gap lemma and are kept only to exhibit the failure.
    """

    a: int = 12
    eps: Fraction = Fraction(1, 20)
    b_exponent: int = 5
    partition: str = "2adic"
    ep_offsets: str = "multiples"

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.partition != "2adic":
            raise ValueError("only the 2-adic partition is implemented")
        if self.ep_offsets not in ("multiples", "literal"):
            raise ValueError("ep_offsets must be 'multiples' or 'literal'")

    def b(self, p: int) -> int:
        if p < 1:
            raise ValueError("b_p needs p >= 1")
        return max(8 * p, _ceil_exp_poly(p, self.b_exponent))

    def log_b(self, p: int) -> float:
        if p <= 200:
            return math.log(self.b(p))
        return 2 * p + self.b_exponent * math.log(p)

    def part(self, u: int) -> int:
        """The class ``p`` with ``u in A_p``."""
        if u < 1:
            raise ValueError("u must be >= 1")
        return 1 + _v2(u)

    def M(self, p: int) -> int:
        return math.isqrt(1 << p)  # floor(2^{p/2})

    def interval(self, u: int, c: Fraction) -> Tuple[Fraction, Fraction]:
        au = Fraction(self.a) ** u
        return (1 - c * self.eps) * au, (1 + c * self.eps) * au

    @property
    def b_formula(self) -> str:
        return f"max(8p, ceil(e^{{2p}} p^{self.b_exponent}))"

    def to_json(self, horizon: Optional[int] = None) -> str:
        doc = {"a": self.a, "eps": str(self.eps), "b_formula": self.b_formula,
               "partition": self.partition}
        if self.ep_offsets != "multiples":
            doc["ep_offsets"] = self.ep_offsets
        if horizon is not None:
            doc["horizon"] = horizon
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Tuple["ShiftParameters", Optional[int]]:
        doc = json.loads(text)
        exponent = 5
        if "b_formula" in doc:
            m = re.fullmatch(r"\s*max\(\s*8p\s*,\s*ceil\(\s*e\^\{?2p\}?\s*p\^(\d+)\s*\)\s*\)\s*",
                             doc["b_formula"])
            if not m:
                raise ValueError(f"unsupported b_formula {doc['b_formula']!r}")
            exponent = int(m.group(1))
        params = cls(a=int(doc.get("a", 12)), eps=Fraction(str(doc.get("eps", "1/20"))),
                     b_exponent=exponent, partition=doc.get("partition", "2adic"),
                     ep_offsets=doc.get("ep_offsets", "multiples"))
        return params, doc.get("horizon")


DEFAULT = ShiftParameters()


# ---------------------------------------------------------------------------
# parameter conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParameterCheck:
    name: str
    ok: bool
    detail: str


TAIL_TARGET = 0.4


def check_parameters(params: ShiftParameters, u_max: int = 12) -> List[ParameterCheck]:
    """Every parameter condition, in a fixed order, with exact arithmetic."""
    a, eps = params.a, params.eps
    out = []

    def add(name, ok, detail):
        out.append(ParameterCheck(name, bool(ok), detail))

    add("eps range", 0 < eps < Fraction(1, 8), f"eps={eps}")
    ratio = (1 - eps) * a / (1 + eps)
    add("(1-eps)a/(1+eps) > 1", ratio > 1, f"{float(ratio):.6g}")
    add("2 eps a >= 1 + 2 eps", 2 * eps * a >= 1 + 2 * eps,
        f"{float(2 * eps * a):.6g} vs {float(1 + 2 * eps):.6g}")

    disjoint, inclusion = True, True
    for u in range(2, u_max + 1):
        ulo, uhi = params.interval(u, 2)
        Ulo, Uhi = params.interval(u, 4)
        for v in range(1, u):
            vlo, vhi = params.interval(v, 2)
            disjoint &= vhi < ulo
            inclusion &= Ulo <= ulo - vhi and uhi - vlo <= Uhi
    add("2eps windows disjoint", disjoint, f"u <= {u_max}")
    add("2eps differences inside 4eps window", inclusion, f"u <= {u_max}")

    # share of [1, (1+4eps)a^u] covered by the 4eps windows
    worst = Fraction(0)
    for u in range(1, u_max + 1):
        covered = sum(8 * eps * Fraction(a) ** v for v in range(1, u + 1))
        worst = max(worst, covered / params.interval(u, 4)[1])
    add("upper density of 4eps windows < 1", worst < 1, f"{float(worst):.6g}")

    bs = [params.b(p) for p in range(1, 12)]
    add("b_p >= 8p", all(b >= 8 * p for p, b in enumerate(bs, 1)), f"b_1..b_3={bs[:3]}")
    add("b_p increasing", all(x < y for x, y in zip(bs, bs[1:])), "p <= 11")
    T10 = tail_bound(params, 10)
    add(f"T(10) < {TAIL_TARGET}", T10 < TAIL_TARGET, f"{T10:.6g}")

    syndetic = True
    for p in range(1, 7):
        members = [u for u in range(1, 1 << 10) if params.part(u) == p]
        gaps = np.diff([0] + members)
        syndetic &= bool(members) and int(gaps[1:].max(initial=0)) <= 1 << p
    add("partition syndetic", syndetic, "gaps of A_p <= 2^p for p <= 6")
    return out


def derive_parameters(search_bounds: Optional[dict] = None) -> ShiftParameters:
    """First candidate passing every parameter condition.

    ``search_bounds`` may give ``a`` (iterable of ints), ``eps`` (iterable of
    rationals) and ``b_exponent`` (iterable of ints); the default candidate
    ``(12, 1/20, 5)`` is tried first.
    """
    sb = search_bounds or {}
    a_values = list(sb.get("a", [12] + list(range(2, 41))))
    eps_values = [Fraction(e) for e in sb.get("eps", [Fraction(1, 20), Fraction(1, 10),
                                                      Fraction(1, 40), Fraction(1, 100)])]
    exps = list(sb.get("b_exponent", [5, 6]))
    first_failure = None
    for K in exps:
        for a in a_values:
            for eps in eps_values:
                if not 0 < eps < Fraction(1, 8):
                    continue
                cand = ShiftParameters(a=a, eps=eps, b_exponent=K)
                failed = [c for c in check_parameters(cand) if not c.ok]
                if not failed:
                    return cand
                if first_failure is None:
                    first_failure = (cand, failed[0])
    if first_failure is None:
        raise ValueError("empty search bounds")
    cand, chk = first_failure
    raise ValueError(f"no admissible parameters; a={cand.a}, eps={cand.eps} "
                     f"first fails {chk.name!r} ({chk.detail})")


# ---------------------------------------------------------------------------
# E_p
# ---------------------------------------------------------------------------

def _window_u(params: ShiftParameters, n, c: Fraction) -> Optional[int]:
    """The u with ``n in I_u^c`` (at most one for ``c <= 4``), or None."""
    if n <= 0:
        return None
    u = max(1, int(math.log(float(n)) / math.log(params.a)))
    for cand in (u - 1, u, u + 1):
        if cand >= 1:
            lo, hi = params.interval(cand, c)
            if lo <= n <= hi:
                return cand
    return None


def ep_membership(params: ShiftParameters, p: int, n: int) -> bool:
    if p < 1 or n < 1:
        raise ValueError("p and n must be >= 1")
    u = _window_u(params, n, Fraction(1))
    if u is None or params.part(u) != p:
        return False
    r = n % params.b(p)
    return r == 0 if params.ep_offsets == "multiples" else r <= p


def _windows(params: ShiftParameters, horizon: int, c: Fraction):
    u = 1
    while True:
        lo, hi = params.interval(u, c)
        if lo > horizon:
            return
        yield u, lo, hi
        u += 1


def ep_elements(params: ShiftParameters, p: int, horizon: int) -> np.ndarray:
    """Sorted elements of ``E_p`` up to ``horizon``."""
    b = params.b(p)
    offsets = range(1) if params.ep_offsets == "multiples" else range(p + 1)
    parts = []
    for u, lo, hi in _windows(params, horizon, Fraction(1)):
        if params.part(u) != p:
            continue
        top = min(hi, horizon)
        j0 = max(1, math.floor(lo / b) - 1)
        j1 = math.floor(top / b) + 1
        base = np.arange(j0, j1 + 1, dtype=np.int64) * b
        for o in offsets:
            x = base + o
            parts.append(x[(x >= lo) & (x <= top)])
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate(parts))


# ---------------------------------------------------------------------------
# the weight profile
# ---------------------------------------------------------------------------

def _uv_profiles(params: ShiftParameters, u: int):
    """``(L0, lo, hi, R0, H)`` for every ``v < u``; exact rationals."""
    L0, R0 = params.interval(u, 4)
    ulo, uhi = params.interval(u, 1)
    pu = params.part(u)
    for v in range(1, u):
        vlo, vhi = params.interval(v, 1)
        H = max(pu, params.part(v))
        yield L0, ulo - vhi, uhi - vlo + pu, R0, H


def _active_ps(params: ShiftParameters, n_max: int):
    p = 1
    while params.b(p) <= n_max + 4 * p:
        yield p
        p += 1


def log2_product(params: ShiftParameters, n: int) -> Fraction:
    """Exact ``log2(w_0 ... w_{n-1})``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    best = Fraction(0)
    for p in _active_ps(params, n):
        b = params.b(p)
        j = max(1, (2 * n + b) // (2 * b))
        dist = min(abs(n - c * b) for c in (j - 1, j, j + 1) if c >= 1)
        val = min(Fraction(p), max(Fraction(0), p - Fraction(dist - 2 * p, 2)))
        best = max(best, val)
    u = _window_u(params, n, Fraction(4))
    if u is not None:
        for L0, lo, hi, R0, H in _uv_profiles(params, u):
            if lo <= n <= hi:
                val = Fraction(H)
            elif L0 <= n < lo:
                val = H * (n - L0) / (lo - L0)
            elif hi < n <= R0:
                val = H * (R0 - n) / (R0 - hi)
            else:
                val = Fraction(0)
            best = max(best, val)
    return best


def log2_product_array(params: ShiftParameters, start: int, stop: int) -> np.ndarray:
    """Floating ``log2P(n)`` for ``start <= n < stop``."""
    n = np.arange(start, stop, dtype=np.int64)
    out = np.zeros(n.size)
    if n.size == 0:
        return out
    for p in _active_ps(params, stop):
        b = params.b(p)
        centre = np.maximum(1, (2 * n + b) // (2 * b)) * b
        dist = np.abs(n - centre).astype(np.float64)
        np.maximum(out, np.clip(p - (dist - 2 * p) / 2, 0, p), out=out)
    for u, L0, R0 in ((u, lo, hi) for u, lo, hi in _windows(params, stop, Fraction(4))):
        i0 = max(0, math.ceil(L0) - start)
        i1 = min(n.size, math.floor(R0) - start + 1)
        if i0 >= i1:
            continue
        seg = n[i0:i1].astype(np.float64)
        for L0_, lo, hi, R0_, H in _uv_profiles(params, u):
            xp = [float(L0_), float(lo), float(hi), float(R0_)]
            np.maximum(out[i0:i1], np.interp(seg, xp, [0.0, H, H, 0.0]), out=out[i0:i1])
    return out


def weight_at(params: ShiftParameters, n: int) -> float:
    """``w_n = 2^{log2P(n+1) - log2P(n)}``."""
    d = log2_product(params, n + 1) - log2_product(params, n)
    return 2.0 ** float(d)


def weights_array(params: ShiftParameters, start: int, stop: int) -> np.ndarray:
    return np.exp2(np.diff(log2_product_array(params, start, stop + 1)))


@dataclass(frozen=True)
class ShiftProfile:
    params: ShiftParameters = DEFAULT

    def log2P(self, n: int) -> Fraction:
        return log2_product(self.params, n)

    def weight(self, n: int) -> float:
        return weight_at(self.params, n)

    def log2P_array(self, start: int, stop: int) -> np.ndarray:
        return log2_product_array(self.params, start, stop)


# ---------------------------------------------------------------------------
# the characterization conditions
# ---------------------------------------------------------------------------

MAX_WITNESSES = 20
FLOAT_SLACK = 1e-9


@dataclass
class HitReport:
    horizon: int
    pmax: int
    pairs_checked: int = 0
    flags: Dict[str, bool] = field(default_factory=dict)
    violations: List[tuple] = field(default_factory=list)
    windows: List[dict] = field(default_factory=list)
    counts: Dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.flags.values())

    def witness(self, cond, *values):
        if len(self.violations) < MAX_WITNESSES:
            self.violations.append((cond,) + tuple(int(v) for v in values))


def verify_characterization(params: ShiftParameters, horizon: int, pmax: int,
                            chunk: int = 256) -> HitReport:
    """Finite-horizon check of the four conditions plus the gap lemma.

    (a) every ``I_u^eps`` window with ``u in A_p`` that is at least ``b_p``
        wide and lies below ``horizon`` contains elements of ``E_p``; the
        per-window share ``|E_p cap [1, right end]| / right end`` is reported;
    (b) the sets ``E_p + [0, p]`` are pairwise disjoint;
    gap ``|n - m| > max(p, q)`` for distinct elements, checked on neighbours of
        the merged sorted union (non-neighbours follow by adding gaps);
    (c) ``log2P >= p`` on ``E_p + [0, p]``, with the minimum over each window
        non-decreasing in u;
    (d) ``log2P(m - n + t) >= log2(M(p) M(q))`` for all ``n in E_p``,
        ``m in E_q``, ``m > n``, ``0 <= t <= q``.

    Floating failures are re-evaluated exactly before they count.
    """
    if horizon < params.a ** 3:
        raise ValueError("horizon must be >= a^3")
    rep = HitReport(horizon, pmax)
    E = {p: ep_elements(params, p, horizon) for p in range(1, pmax + 1)}
    rep.counts = {p: int(e.size) for p, e in E.items()}
    logP = log2_product_array(params, 0, horizon + pmax + 2)

    # (a)
    ok_a = True
    for p in range(1, pmax + 1):
        b = params.b(p)
        populated = 0
        for u, lo, hi in _windows(params, horizon, Fraction(1)):
            if params.part(u) != p or hi > horizon:
                continue
            inside = E[p][(E[p] >= lo) & (E[p] <= hi)]
            share = np.count_nonzero(E[p] <= hi) / float(hi)
            rep.windows.append({"p": p, "u": u, "count": int(inside.size), "share": share})
            if inside.size:
                populated += 1
            elif hi - lo >= b:
                ok_a = False
                rep.witness("a", p, 0, u, 0, 0)
        if populated == 0:
            ok_a = False
            rep.witness("a", p, 0, 0, 0, 0)
    rep.flags["a"] = ok_a

    # (b)
    ok_b = True
    shifted = {p: np.unique((E[p][:, None] + np.arange(p + 1)[None, :]).ravel()) for p in E}
    for p in E:
        for q in E:
            if p < q:
                common = np.intersect1d(shifted[p], shifted[q])
                if common.size:
                    ok_b = False
                    rep.witness("b", p, q, common[0], common[0], 0)
    rep.flags["b"] = ok_b

    # gap lemma
    labels = np.concatenate([np.full(E[p].size, p) for p in E]) if E else np.zeros(0)
    allE = np.concatenate([E[p] for p in E]) if E else np.zeros(0, dtype=np.int64)
    order = np.argsort(allE, kind="stable")
    allE, labels = allE[order], labels[order]
    gaps = np.diff(allE)
    need = np.maximum(labels[:-1], labels[1:])
    bad = np.flatnonzero(gaps <= need)
    for i in bad[:MAX_WITNESSES]:
        rep.witness("gap", labels[i], labels[i + 1], allE[i], allE[i + 1], 0)
    rep.flags["gap"] = bad.size == 0

    # (c)
    ok_c = True
    for p in E:
        pts = shifted[p]
        pts = pts[pts <= horizon]
        vals = logP[pts]
        low = np.flatnonzero(vals < p - FLOAT_SLACK)
        for i in low:
            if log2_product(params, int(pts[i])) < p:
                ok_c = False
                rep.witness("c", p, 0, pts[i], 0, 0)
                break
        mins = []
        for w in rep.windows:
            if w["p"] == p and w["count"]:
                lo, hi = params.interval(w["u"], 1)
                sel = (pts >= lo) & (pts <= hi + p)
                mins.append(float(vals[sel].min()))
        if any(y < x - FLOAT_SLACK for x, y in zip(mins, mins[1:])):
            ok_c = False
            rep.witness("c", p, 0, 0, 0, 0)
    rep.flags["c"] = ok_c

    # (d)
    ok_d = True
    pairs = 0
    thr = {(p, q): math.log2(params.M(p) * params.M(q)) for p in E for q in E}
    for p in E:
        for q in E:
            m = E[q]
            t = np.arange(q + 1)
            for s in range(0, E[p].size, chunk):
                n = E[p][s:s + chunk]
                diff = m[None, :] - n[:, None]
                valid = diff > 0
                pairs += int(valid.sum()) * (q + 1)
                idx = np.where(valid, diff, 0)[:, :, None] + t[None, None, :]
                idx = np.minimum(idx, logP.size - 1)
                vals = logP[idx]
                low = valid[:, :, None] & (vals < thr[(p, q)] - FLOAT_SLACK)
                if low.any():
                    for i, j, tt in np.argwhere(low):
                        ex = log2_product(params, int(m[j] - n[i] + tt))
                        if float(ex) < thr[(p, q)]:
                            ok_d = False
                            rep.witness("d", p, q, n[i], m[j], tt)
                            if len(rep.violations) >= MAX_WITNESSES:
                                break
    rep.pairs_checked = pairs
    rep.flags["d"] = ok_d
    return rep


# ---------------------------------------------------------------------------
# density decay of F_p
# ---------------------------------------------------------------------------

def tail_bound(params: ShiftParameters, p: int, cutoff: float = 1e-15) -> float:
    """``T(p) = sum_{q>p} (4q+1)(2q+1) e^{2q} / b_q``, summed until terms < cutoff."""
    q = p + 1
    terms = []
    while True:
        term = math.exp(math.log((4 * q + 1) * (2 * q + 1)) + 2 * q - params.log_b(q))
        terms.append(term)
        if term < cutoff or q > 10 ** 8:
            break
        q += 1
    terms.sort()
    return math.fsum(terms)


@dataclass(frozen=True)
class FpDecayReport:
    r: float
    horizon: int
    tail: Dict[int, float]
    proxy: Dict[int, float]
    ends: Dict[int, List[int]]


def fp_decay_report(params: ShiftParameters, r: float, p_list: Sequence[int],
                    horizon: int) -> FpDecayReport:
    """Analytic ``T(p)`` and the A(r)-ratio of ``G_p = {n : log2P(n) > p}``.

    The ratio is read where the lower density is formed: at
    ``N = floor((1 - eps) a^u)`` for each ``u in A_p`` with ``u >= 2`` and
    ``N <= horizon``, i.e. just before the next window of class p.  The
    proxy is the smallest of these ratios (0 when G_p is empty there).
    """
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    logP = log2_product_array(params, 0, horizon + 1)[1:]
    lw = A_family(r).log_weights(horizon)
    _, den = prefix_logsumexp(lw)
    tail, proxy, ends = {}, {}, {}
    for p in p_list:
        tail[p] = tail_bound(params, p)
        mask = logP > p + FLOAT_SLACK
        _, num = prefix_logsumexp(np.where(mask, lw, -np.inf), ref=lw)
        Ns = [math.floor(lo) for u, lo, hi in _windows(params, horizon, Fraction(1))
              if u >= 2 and params.part(u) == p and math.floor(lo) <= horizon]
        ends[p] = Ns
        vals = [float(np.exp(num[N - 1] - den[N - 1])) for N in Ns]
        proxy[p] = min(vals) if vals else math.nan
    return FpDecayReport(r, horizon, tail, proxy, ends)


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

def orbit_hit_set(profile: ShiftProfile, x: Dict[int, float], radius: float, N: int) -> IntegerSet:
    """``{1 <= n <= N : ||B_w^n x - e_0||_inf <= radius}`` for finitely supported x.

    ``(B_w^n x)_j = w_{j+1} ... w_{j+n} x_{j+n} = P(j+n+1) / P(j+1) x_{j+n}``.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    support = sorted((int(i), float(v)) for i, v in x.items() if v != 0)
    if any(i < 0 for i, _ in support):
        raise ValueError("indices must be >= 0")
    hits = []
    top = support[-1][0] if support else 0
    candidates = range(1, N + 1) if radius >= 1 else sorted({i for i, _ in support if 1 <= i <= N})
    logP = log2_product_array(profile.params, 0, top + 2) if support else np.zeros(2)
    for n in candidates:
        coords = {}
        for i, v in support:
            if i >= n:
                coords[i - n] = 2.0 ** (logP[i + 1] - logP[i - n + 1]) * v
        dist = abs(coords.pop(0, 0.0) - 1.0)
        if coords:
            dist = max(dist, max(abs(c) for c in coords.values()))
        if dist <= radius:
            hits.append(n)
    return IntegerSet.from_sorted(np.array(hits, dtype=np.int64), name="N(x,U)")
