"""Command-line front end.

Exit status: 0 on success, 1 on bad input or a domain error, 2 when a check
finds a counterexample (details go to stderr as JSON).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import cf, deviations as dev, folding, korobov, sl2, zm
from .cache import CacheError, cache_upsert, read_cache
from .errors import InvariantViolation


class UsageError(Exception):
    pass


class Finding(Exception):
    """A check failed; carries the rows to print and diagnostics."""

    def __init__(self, message, rows=(), diagnostics=None):
        super().__init__(message)
        self.rows = list(rows)
        self.diagnostics = diagnostics or {}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def emit(rows, fmt: str, out=None) -> None:
    out = out or sys.stdout
    rows = [_jsonable(r) for r in rows]
    if fmt == "json":
        for r in rows:
            out.write(json.dumps(r, sort_keys=False, allow_nan=False) + "\n")
        return
    if not rows:
        return
    cols = list(rows[0])
    out.write("\t".join(cols) + "\n")
    for r in rows:
        cells = []
        for c in cols:
            v = r.get(c)
            cells.append(json.dumps(v) if isinstance(v, (list, dict)) else
                         "" if v is None else str(v))
        out.write("\t".join(cells) + "\n")


def _word(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in s.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {s!r}")


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# ------------------------------------------------------------ handlers

def cmd_cf(a):
    if a.action == "expand":
        w = cf.expand(a.num, a.den)
        return [{"num": a.num, "den": a.den, "word": str(w), "quotients": list(w)}]
    w = cf.CFWord(a.word)
    if a.action == "eval":
        f = cf.cf_eval(w)
        return [{"word": str(w), "num": f.numerator, "den": f.denominator}]
    if a.action == "continuant":
        return [{"word": list(w), "continuant": cf.continuant(w)}]
    if a.action == "convergents":
        return [{"nu": i, "p": p, "q": q} for i, (p, q) in enumerate(cf.convergents(w).pq)]
    if a.action == "normalize":
        return [{"word": str(w), "normalized": str(cf.normalize(w))}]
    rev, val = cf.cf_reverse(w)
    num = cf.cf_eval(w).numerator
    s = len(w)
    return [{"word": str(w), "reversed": str(rev), "value": str(val),
             "sign": (-1) ** (s - 1),
             "law_holds": (num * val.numerator - (-1) ** (s - 1)) % val.denominator == 0}]


def cmd_korobov(a):
    if a.action == "witness":
        w = korobov.min_hyperbola_product(a.a, a.q, a.x_max)
        return [{"a": a.a, "q": a.q, "x": w.x, "y": w.y, "product": w.product}]
    if a.action == "forward":
        return [{"a": a.a, "q": a.q, "M": a.M, "criterion": korobov.korobov_forward(a.a, a.q, a.M),
                 "max_quotient": cf.max_quotient(a.a, a.q)}]
    if a.action == "backward":
        r = korobov.korobov_backward(a.a, a.q)
        return [{"a": a.a, "q": a.q, "ratio": r, "ratio_float": float(r)}]
    rep = korobov.hyperbola_sweep(a.q_max, a.q_min, a.workers)
    row = rep.as_dict()
    if not rep.ok:
        raise Finding("hyperbola criterion failed", [row],
                      {"forward": rep.forward_failures[:50],
                       "backward": rep.backward_failures[:50]})
    return [row]


def cmd_search(a):
    if a.action == "exhaustive":
        return [korobov.search_exhaustive(a.q).as_dict()]
    if a.action == "guided":
        if a.M is None:
            hit = korobov.smallest_guided(a.q)
            if hit is None:
                return [{"q": a.q, "found": False}]
            M, r = hit
        else:
            M, r = a.M, korobov.search_guided(a.q, a.M)
            if r is None:
                return [{"q": a.q, "M": M, "found": False}]
        return [{**r.as_dict(), "M": M, "t": zm.guided_t(a.q, M), "found": True,
                 "bound_4M": 4 * M}]
    cached = read_cache(a.cache) if a.cache else {}
    new = korobov.bound_table(a.q_min, a.q_max, a.filter, a.workers, skip=set(cached))
    if a.cache:
        n = cache_upsert(a.cache, new)
        print(f"cache: {n} new rows in {a.cache}", file=sys.stderr)
    wanted = set(korobov.admissible(a.q_min, a.q_max, a.filter))
    rows = sorted([r for q, r in cached.items() if q in wanted] + new, key=lambda r: r.q)
    if a.summary:
        return [{"rows": len(rows), "max_m_min": max(r.m_min for r in rows),
                 "growth_slope": korobov.growth_slope(rows) if len(rows) > 1 else None}]
    return [r.as_dict() for r in rows]


def cmd_sets(a):
    if a.action in ("qm", "qm-bar"):
        fn = zm.enumerate_QM if a.action == "qm" else zm.enumerate_QM_bar
        s = fn(a.M, a.t)
        if a.count_only:
            return [{"M": a.M, "t": a.t, "count": len(s)}]
        return [{"word": str(w), "value": str(f)} for w, f in s.members]
    if a.action == "zm":
        z = zm.build_ZM(a.q, a.M, a.t, a.convention)
        return [{"q": a.q, "M": a.M, "t": a.t, "convention": a.convention,
                 "size": int(z.size), "runs": len(zm.runs(z))}]
    if a.action == "decompose":
        try:
            d = zm.decompose_ZM(a.q, a.M, a.t, a.block_const, a.convention)
        except InvariantViolation as e:
            raise Finding(str(e), [], e.diagnostics)
        row = d.as_dict()
        if a.intervals:
            row["intervals"] = [list(iv) for iv in d.intervals]
        if a.strict_leftover and not d.leftover_within_bound:
            raise Finding("leftover exceeds block * T", [row], row)
        return [row]
    w, pts = zm.estimate_wM(a.M, a.t_max)
    if a.format == "tsv":
        return [{"log2_t": x, "log2_count": y} for x, y in pts]
    return [{"M": a.M, "t_max": a.t_max, "w_estimate": w, "points": pts}]


def cmd_fold(a):
    if a.audit:
        rep = folding.audit(a.base, a.power)
        if not rep["ok"]:
            raise Finding("folding audit failed", [rep], rep)
        return [rep]
    rec = folding.fold_record(a.base, a.power)
    f = rec.fraction
    return [{"base": a.base, "power": a.power, "word": str(rec.canonical),
             "raw_word": list(rec.raw.word), "numerator": f.numerator,
             "denominator": f.denominator, "max_quotient": rec.max_quotient}]


def cmd_deviate(a):
    if a.lyapunov:
        return [dev.lyapunov_report(a.N, a.n, a.trials, a.seed, a.workers)]
    vals = dev.sample_log_qn(a.N, a.n, a.trials, a.seed, a.mode, a.workers)
    if a.hist:
        return [{"lo": lo, "hi": hi, "count": c} for lo, hi, c in dev.histogram(vals, a.hist)]
    rep = dev.run_deviation(a.N, a.n, a.trials, a.delta, a.seed, a.mode, a.kappa,
                            values=vals)
    return [rep.as_dict()]


def _element(s: str, m: int) -> sl2.GroupElement:
    e = _word(s)
    if len(e) != 4:
        raise ValueError("--g needs four entries a,b,c,d")
    return sl2.GroupElement(*e, m)


def cmd_sl2(a):
    if a.action == "generators":
        return [{"j": j + 1, "entries": list(g.entries), "det": g.det_mod}
                for j, g in enumerate(sl2.generator_family(a.N, a.modulus, a.det))]
    if a.action == "girth":
        g = sl2.girth(None if a.integers else a.p, a.N, a.L_max)
        return [{"p": None if a.integers else a.p, "N": a.N, **g.as_dict()}]
    if a.action == "walk":
        ws = sl2.walk_stats(a.p, a.N, a.m, a.samples, a.cyclic, a.seed)
        if a.hist:
            return [{"r": r, "elements": k} for r, k in sl2.r_histogram(ws)]
        return [ws.as_dict()]
    if a.action == "action":
        devs = sl2.action_trials(a.p, a.N, a.size, a.sets, a.seed)
        return [{"p": a.p, "N": a.N, "size": a.size, "sets": a.sets, "seed": a.seed,
                 "mean_deviation": float(np.mean(devs)), "max_deviation": float(np.max(devs))}]
    if a.action == "padic":
        d = sl2.padic_decompose(_element(a.g, a.p ** a.n), a.p, a.n)
        return [{"g": list(d.g.entries), "half_trace": d.half_trace, "r": d.r,
                 "gprime": list(d.gprime), "central": d.central, "trace_ok": d.trace_ok}]
    if a.action == "stab":
        g = _element(a.g, a.p ** a.n)
        d = sl2.padic_decompose(g, a.p, a.n)
        c, nz = sl2.stab_sizes(g, a.p, a.n)
        bc, bn = sl2.stabilizer_bounds(a.p, a.n, d.r)
        return [{"g": list(g.entries), "r": d.r, "centralizer": c, "normalizer": nz,
                 "centralizer_bound": bc, "normalizer_bound": bn,
                 "ok": c <= bc and nz <= bn}]
    rep = sl2.stabilizer_sweep(a.p, a.n)
    row = rep.as_dict()
    if rep.violations:
        raise Finding("stabilizer bound violated", [row], {"violations": rep.violations[:50]})
    return [row]


# -------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--workers", type=_positive, default=1)

    p = _Parser(prog="zaremba", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def group(name, handler, help):
        g = sub.add_parser(name, help=help)
        g.set_defaults(handler=handler)
        return g.add_subparsers(dest="action", required=True, parser_class=_Parser)

    def leaf(parent, name, **kw):
        return parent.add_parser(name, parents=[common], **kw)

    c = group("cf", cmd_cf, "continued fractions and continuants")
    x = leaf(c, "expand")
    x.add_argument("--num", type=int, required=True)
    x.add_argument("--den", type=int, required=True)
    for name in ("eval", "continuant", "convergents", "reverse", "normalize"):
        leaf(c, name).add_argument("--word", type=_word, required=True)

    k = group("korobov", cmd_korobov, "hyperbola criterion")
    for name in ("witness", "forward", "backward"):
        x = leaf(k, name)
        x.add_argument("--a", type=int, required=True)
        x.add_argument("--q", type=int, required=True)
        if name == "witness":
            x.add_argument("--x-max", type=int)
        if name == "forward":
            x.add_argument("--M", type=_positive, required=True)
    x = leaf(k, "sweep")
    x.add_argument("--q-max", type=int, required=True)
    x.add_argument("--q-min", type=int, default=2)

    s = group("search", cmd_search, "numerators with small partial quotients")
    leaf(s, "exhaustive").add_argument("--q", type=int, required=True)
    x = leaf(s, "guided")
    x.add_argument("--q", type=int, required=True)
    x.add_argument("--M", type=int, help="default: smallest M that succeeds")
    x = leaf(s, "table")
    x.add_argument("--q-min", type=int, default=2)
    x.add_argument("--q-max", type=int, required=True)
    x.add_argument("--filter", choices=korobov.FILTERS, default="primes")
    x.add_argument("--cache", help="TSV results cache to read and extend")
    x.add_argument("--summary", action="store_true")

    z = group("sets", cmd_sets, "bounded-quotient sets")
    for name in ("qm", "qm-bar"):
        x = leaf(z, name)
        x.add_argument("--M", type=_positive, required=True)
        x.add_argument("--t", type=int, required=True)
        x.add_argument("--count-only", action="store_true")
    for name in ("zm", "decompose"):
        x = leaf(z, name)
        x.add_argument("--q", type=int, required=True)
        x.add_argument("--M", type=_positive, required=True)
        x.add_argument("--t", type=int, required=True)
        x.add_argument("--convention", choices=zm.CONVENTIONS, default=zm.PREFIX)
        if name == "decompose":
            x.add_argument("--block-const", type=float, default=1.0)
            x.add_argument("--intervals", action="store_true")
            x.add_argument("--strict-leftover", action="store_true",
                           help="exit 2 when the leftover exceeds block * T")
    x = leaf(z, "dimension")
    x.add_argument("--M", type=_positive, required=True)
    x.add_argument("--t-max", type=int, default=2048)

    f = sub.add_parser("fold", parents=[common], help="denominators b**n with small quotients")
    f.set_defaults(handler=cmd_fold)
    f.add_argument("--base", type=int, required=True)
    f.add_argument("--power", type=_positive, required=True)
    f.add_argument("--audit", action="store_true")

    d = sub.add_parser("deviate", parents=[common], help="large deviations of log q_n")
    d.set_defaults(handler=cmd_deviate)
    d.add_argument("--N", type=_positive, required=True)
    d.add_argument("--n", type=_positive, required=True)
    d.add_argument("--trials", type=_positive, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--delta", type=float, default=0.2)
    d.add_argument("--mode", choices=dev.MODES, default=dev.PLAIN)
    d.add_argument("--kappa", type=float, default=0.01)
    d.add_argument("--hist", type=_positive, metavar="BINS")
    d.add_argument("--lyapunov", action="store_true")

    g = group("sl2", cmd_sl2, "SL2 experiments")
    x = leaf(g, "generators")
    x.add_argument("--N", type=_positive, required=True)
    x.add_argument("--modulus", type=int)
    x.add_argument("--det", type=int, choices=(1, -1), default=1)
    x = leaf(g, "girth")
    x.add_argument("--N", type=_positive, required=True)
    where = x.add_mutually_exclusive_group(required=True)
    where.add_argument("--p", type=int)
    where.add_argument("--integers", action="store_true")
    x.add_argument("--L-max", type=_positive, default=40)
    x = leaf(g, "walk")
    x.add_argument("--p", type=int, required=True)
    x.add_argument("--N", type=_positive, required=True)
    x.add_argument("--m", type=_positive, required=True)
    x.add_argument("--seed", type=int, required=True)
    x.add_argument("--samples", type=int, default=64)
    x.add_argument("--cyclic", type=int, default=4)
    x.add_argument("--hist", action="store_true")
    x = leaf(g, "action")
    x.add_argument("--p", type=int, required=True)
    x.add_argument("--N", type=_positive, required=True)
    x.add_argument("--size", type=_positive, default=100)
    x.add_argument("--sets", type=_positive, default=50)
    x.add_argument("--seed", type=int, required=True)
    for name in ("padic", "stab"):
        x = leaf(g, name)
        x.add_argument("--p", type=int, required=True)
        x.add_argument("--n", type=_positive, required=True)
        x.add_argument("--g", required=True, help="entries a,b,c,d")
    x = leaf(g, "stabilizers")
    x.add_argument("--p", type=int, required=True)
    x.add_argument("--n", type=_positive, required=True)
    return p


def dispatch(args: argparse.Namespace, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        rows = args.handler(args)
    except Finding as e:
        emit(e.rows, args.format, out)
        err.write(f"finding: {e}\n")
        err.write(json.dumps(_jsonable(e.diagnostics)) + "\n")
        return 2
    except InvariantViolation as e:
        err.write(f"finding: {e}\n")
        err.write(json.dumps(_jsonable(e.diagnostics)) + "\n")
        return 2
    except (CacheError, ValueError, ArithmeticError) as e:
        err.write(f"error: {e}\n")
        return 1
    emit(rows, args.format, out)
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
