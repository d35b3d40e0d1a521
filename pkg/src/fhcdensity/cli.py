"""Command-line front end.

Every run writes one primary artifact (``--out``, CSV or JSON) and a JSON
summary next to it (``<stem>.summary.json``).  Exit status is 0 when every
verdict of the run passes, 1 on a failed verdict (the witness goes to stderr)
and 2 on usage errors.  Artifacts contain no timestamps, so reruns with the
same flags are byte-identical.

CSV schemas:
  density      k,n_k,ratio
  sequence     k,delta_k,n_k
  verify       k,closed,oracle          (mismatches only)
  separation   i,j,n_i,n_j              (witness only)
  regularity   quantity,value
  shift-build  n,log2P,weight
  shift-check  condition,status,witness
  fp-decay     p,tail_bound,proxy
  export       key,value   (JSON: the plain parameter file)
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import dyadic, shiftlab, weights

COMMANDS = ("density", "sequence", "verify", "separation", "regularity",
            "shift-build", "shift-check", "fp-decay", "export")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits for floats, exact text for ints and rationals."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else fmt(x)
    if isinstance(x, Fraction):
        return fmt(x)
    return x


def parse_set(text: str) -> weights.IntegerSet:
    parts = text.split(":")
    head = parts[0]
    try:
        if head == "nk":
            return dyadic.nk_set(dyadic.StepFunction.parse(":".join(parts[1:]) or "identity"))
        if head == "naturals" and len(parts) == 1:
            return weights.IntegerSet.naturals()
        if head == "multiples" and len(parts) == 2:
            return weights.IntegerSet.multiples(int(parts[1]))
        if head == "squares" and len(parts) == 1:
            return weights.IntegerSet.squares()
        if head == "powers" and len(parts) == 2:
            return weights.IntegerSet.powers(int(parts[1]))
        if head == "blocks4" and len(parts) == 1:
            return weights.IntegerSet.geometric_blocks(4, 2)
    except ValueError:
        pass
    raise UsageError(f"unknown set {text!r}")


def parse_family(text: str) -> weights.WeightFamily:
    try:
        return weights.parse_family(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_f(text: str) -> dyadic.StepFunction:
    try:
        return dyadic.StepFunction.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_params(text: str):
    if text == "default":
        return shiftlab.DEFAULT, None
    try:
        return shiftlab.ShiftParameters.from_json(Path(text).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read parameters {text!r}: {exc}") from None


def progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# ---------------------------------------------------------------------------
# commands; each returns (header, rows, summary, ok, witness)
# ---------------------------------------------------------------------------

def cmd_density(args):
    E = parse_set(args.set)
    fam = parse_family(args.family)
    if args.kmax:
        seq = E.first(args.kmax)
    else:
        seq = E.elements(args.horizon)
    if seq.size == 0:
        raise UsageError("the set has no elements below the horizon")
    res = weights.density_via_subsequence(seq, fam, seq.size)
    rows = [(k, n, r) for k, (n, r) in enumerate(zip(res.n, res.rho), 1)]
    lo = max(1, seq.size // 10)
    summary = {"set": E.name, "family": fam.name, "elements": int(seq.size),
               "last_element": int(seq[-1]), "tail_min": res.tail_min(lo),
               "tail_from": lo, "warning": res.warning, "last_row_entry": res.last_row_entry}
    return ("k", "n_k", "ratio"), rows, summary, True, None


def cmd_sequence(args):
    f = parse_f(args.f)
    n = dyadic.nk_recursive(f, args.kmax)
    d = dyadic.deltas(args.kmax)
    rows = [(k, int(dk), int(nk)) for k, (dk, nk) in enumerate(zip(d, n), 1)]
    summary = {"f": str(f), "kmax": args.kmax, "n_last": int(n[-1])}
    return ("k", "delta_k", "n_k"), rows, summary, True, None


def cmd_verify(args):
    kind = args.closed_form
    f = parse_f(args.f) if args.f else dyadic.StepFunction.identity()
    if kind == "identity" and f.kind != "identity":
        raise UsageError("--closed-form identity needs --f identity")
    progress(f"verifying {kind} closed form for k <= {args.kmax}")
    res = dyadic.verify_closed_form(kind, f, args.kmax, workers=args.workers)
    rows = [res.first_mismatch] if res.first_mismatch else []
    summary = {"closed_form": kind, "f": str(f), "checked": res.checked,
               "mismatches": res.mismatches}
    return ("k", "closed", "oracle"), rows, summary, res.mismatches == 0, res.first_mismatch


def cmd_separation(args):
    f = parse_f(args.f)
    res = dyadic.separation_check(f, args.kmax, exhaustive=args.exhaustive)
    rows = []
    if res.witness:
        n = dyadic.nk_recursive(f, args.kmax)
        i, j = res.witness
        rows.append((i, j, int(n[i - 1]), int(n[j - 1])))
    summary = {"f": str(f), "kmax": args.kmax, "exhaustive": args.exhaustive,
               "pairs_checked": res.pairs_checked, "ok": res.ok}
    return ("i", "j", "n_i", "n_j"), rows, summary, res.ok, res.witness


def cmd_regularity(args):
    fam = parse_family(args.family)
    try:
        rep = weights.regularity_report(fam, args.horizon)
    except weights.FamilyDomainError as exc:
        raise UsageError(str(exc)) from None
    ok = rep.row_sum_defect <= 1e-12
    if rep.max_entry_bound is not None:
        ok = ok and rep.max_entry_last_row <= 1.01 * rep.max_entry_bound
    fields = ["max_entry_last_row", "row_sum_defect", "sup_abs_row_sum",
              "first_column_entry", "max_entry_bound"]
    rows = [(k, getattr(rep, k)) for k in fields]
    summary = {"family": fam.name, "horizon": args.horizon, **dict(rows)}
    summary["phi_ratio"] = weights.asymptotic_ratio(fam, args.horizon)
    return ("quantity", "value"), rows, summary, ok, None if ok else rows


def cmd_shift_build(args):
    params, h = load_params(args.params)
    horizon = args.horizon or h or 10000
    logP = shiftlab.log2_product_array(params, 0, horizon + 2)
    w = np.exp2(np.diff(logP))
    rows = [(n, logP[n], w[n]) for n in range(horizon + 1)]
    ok = bool(np.all((w >= 0.5) & (w <= 2.0)))
    summary = {"params": json.loads(params.to_json()), "horizon": horizon,
               "weight_min": float(w.min()), "weight_max": float(w.max()), "weights_bounded": ok}
    return ("n", "log2P", "weight"), rows, summary, ok, None


def cmd_shift_check(args):
    params, h = load_params(args.params)
    horizon = args.horizon or h or 10 ** 6
    progress(f"checking conditions up to {horizon}, pmax={args.pmax}")
    try:
        rep = shiftlab.verify_characterization(params, horizon, args.pmax)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params_ok = [c for c in shiftlab.check_parameters(params)]
    rows = [("param:" + c.name, "pass" if c.ok else "fail", c.detail) for c in params_ok]
    for cond in ("a", "b", "c", "d", "gap"):
        wit = [v for v in rep.violations if v[0] == cond]
        rows.append((cond, "pass" if rep.flags[cond] else "fail",
                     " ".join(map(str, wit[0][1:])) if wit else ""))
    ok = rep.ok and all(c.ok for c in params_ok)
    summary = {"params": json.loads(params.to_json()), "horizon": horizon, "pmax": args.pmax,
               "flags": rep.flags, "pairs_checked": rep.pairs_checked,
               "counts": rep.counts, "windows": rep.windows, "violations": rep.violations}
    return ("condition", "status", "witness"), rows, summary, ok, rep.violations[:1] or None


def cmd_fp_decay(args):
    params, h = load_params(args.params)
    horizon = args.horizon or h or 10 ** 6
    ps = list(range(1, args.pmax + 1))
    rep = shiftlab.fp_decay_report(params, args.r, ps, horizon)
    rows = [(p, rep.tail[p], rep.proxy[p]) for p in ps]
    tails = [rep.tail[p] for p in ps]
    ok = all(x > y for x, y in zip(tails, tails[1:]))
    summary = {"r": args.r, "horizon": horizon, "tail": rep.tail, "proxy": rep.proxy,
               "ends": rep.ends, "tail_decreasing": ok}
    return ("p", "tail_bound", "proxy"), rows, summary, ok, None


def cmd_export(args):
    params, h = load_params(args.params)
    horizon = args.horizon or h
    doc = json.loads(params.to_json(horizon))
    rows = sorted(doc.items())
    return ("key", "value"), rows, doc, True, None


HANDLERS = {
    "density": cmd_density, "sequence": cmd_sequence, "verify": cmd_verify,
    "separation": cmd_separation, "regularity": cmd_regularity,
    "shift-build": cmd_shift_build, "shift-check": cmd_shift_check,
    "fp-decay": cmd_fp_decay, "export": cmd_export,
}


def _positive(text):
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fhcdensity", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="primary artifact path")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        return p

    p = common(sub.add_parser("density", help="density ratios of a set under a weight family"))
    p.add_argument("--set", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--horizon", type=_positive, default=10 ** 5)
    p.add_argument("--kmax", type=_positive)

    p = common(sub.add_parser("sequence", help="n_k(f) with delta_k"))
    p.add_argument("--f", default="identity")
    p.add_argument("--kmax", type=_positive, required=True)

    p = common(sub.add_parser("verify", help="closed forms against the recursion"))
    p.add_argument("--closed-form", choices=("identity", "general"), required=True)
    p.add_argument("--f")
    p.add_argument("--kmax", type=_positive, required=True)
    p.add_argument("--workers", type=_positive, default=1)

    p = common(sub.add_parser("separation", help="separation of n_k(f)"))
    p.add_argument("--f", default="identity")
    p.add_argument("--kmax", type=_positive, required=True)
    p.add_argument("--exhaustive", action="store_true")

    p = common(sub.add_parser("regularity", help="Toeplitz conditions of a weight family"))
    p.add_argument("--family", required=True)
    p.add_argument("--horizon", type=_positive, default=10 ** 5)

    for name, hlp in (("shift-build", "weight profile of the shift"),
                      ("shift-check", "characterization conditions"),
                      ("fp-decay", "tail bounds and A(r) proxies of G_p"),
                      ("export", "write the parameter file")):
        p = common(sub.add_parser(name, help=hlp))
        p.add_argument("--params", default="default")
        p.add_argument("--horizon", type=_positive)
        if name in ("shift-check", "fp-decay"):
            p.add_argument("--pmax", type=_positive, default=2 if name == "shift-check" else 3)
        if name == "fp-decay":
            p.add_argument("--r", type=float, default=0.5)
    return ap


def write_artifact(path: Path, fmt_name: str, header, rows, document=None) -> None:
    if fmt_name == "json" and document is not None:
        path.write_text(json.dumps(document, indent=1, sort_keys=True) + "\n")
    elif fmt_name == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])
        path.write_text(buf.getvalue())
    else:
        doc = {"columns": list(header), "rows": [[_jsonable(v) for v in row] for row in rows]}
        path.write_text(json.dumps(doc, indent=1) + "\n")


def summary_path(out: Path) -> Path:
    return out.with_name(out.stem + ".summary.json")


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt_name = args.format
    out = Path(args.out) if args.out else None
    if fmt_name is None:
        fmt_name = "json" if out is not None and out.suffix == ".json" else "csv"
    if out is None:
        out = Path(f"{args.command}.{fmt_name}")
    if args.command == "fp-decay" and not 0 < args.r < 1:
        parser.error("--r must lie in (0, 1)")
    try:
        header, rows, summary, ok, witness = HANDLERS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    # the exported parameter file is the document itself, loadable by --params
    document = summary if args.command == "export" else None
    write_artifact(out, fmt_name, header, rows, document)
    meta = {"command": args.command,
            "argv": [a for a in (argv if argv is not None else sys.argv[1:])],
            "artifact": out.name, "format": fmt_name, "ok": ok}
    summary_path(out).write_text(json.dumps(_jsonable({**meta, **summary}), indent=1,
                                            sort_keys=True) + "\n")
    if not ok:
        print(f"verdict failed; witness: {witness}", file=sys.stderr)
        return 1
    return 0


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
