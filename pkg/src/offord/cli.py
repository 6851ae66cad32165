"""Command-line entry point: ``offord <command> [flags]``.

Records go to stdout as newline-delimited JSON (default) or CSV with a
header row.  Rationals are always ``p/q`` strings.  Every record carries a
``config`` echo of the command and flags, so identical invocations print
identical bytes.

Exit status: 0 ok, 2 bad input, 3 budget exceeded, 64 unknown command.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import detector, gap as gapmod, linear, multilinear, randsym
from .errors import BudgetError, OffordError
from .numeric import parse_rational, rank_exact

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64

COMMANDS = (
    "rho-linear",
    "rho-bilinear",
    "rho-quadratic",
    "decoupling-check",
    "halasz",
    "stanley",
    "pigeonhole",
    "gap-reduce",
    "gap-properize",
    "detect",
    "qn-exact",
    "qn-mc",
    "odlyzko",
    "rank-increase",
    "cofactor",
    "kernel-height",
    "plant",
)

PLANT_KINDS = (
    "bilinear-additive",
    "bilinear-algebraic",
    "bilinear-combined",
    "quadratic-additive",
    "quadratic-algebraic",
    "quadratic-combined",
    "ilo-rank1",
    "all-ones",
)
_PLANT_ALIASES = {
    "example-4.2": "bilinear-additive",
    "example-4.3": "bilinear-algebraic",
    "example-4.5": "bilinear-combined",
    "example-5.2": "quadratic-additive",
    "example-5.3": "quadratic-algebraic",
    "example-5.4": "quadratic-combined",
}

USAGE = "usage: offord {" + ",".join(COMMANDS) + "} [flags]\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except OffordError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parser(command: str) -> argparse.ArgumentParser:
    p = _Parser(prog=f"offord {command}")
    p.add_argument("--input", help="multiset, matrix, GAP JSON or parameter file")
    p.add_argument("--elements", help="multiset file of GAP elements (gap-reduce)")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int, default=None, help="tuple length for halasz")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--mu", type=_rational, default=None, help="lazy-sign parameter p/q")
    p.add_argument("--radius", type=_rational, default=None)
    p.add_argument("--rmax", type=int, default=2)
    p.add_argument("--nprime", type=int, default=0)
    p.add_argument("--kind", default=None, help="plant kind: " + ", ".join(PLANT_KINDS))
    return p


def _config(command: str, args: argparse.Namespace) -> dict:
    cfg = {"command": command}
    for key, val in sorted(vars(args).items()):
        if key == "format" or val is None:
            continue
        cfg[key] = str(val) if isinstance(val, Fraction) else val
    return cfg


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise OffordError("missing required flag(s): " + " ".join(missing))


def _law(args) -> linear.StepLaw:
    return linear.BERNOULLI if args.mu is None else linear.StepLaw.lazy(args.mu)


def _matrix_strings(m) -> list[list[str]]:
    return [[str(v) for v in row] for row in m]


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise OffordError(f"{path}: invalid JSON: {exc}") from None


# -- commands -------------------------------------------------------------------


def cmd_rho_linear(args):
    _need(args, "input")
    a = linear.read_multiset(args.input)
    law = _law(args)
    rho, at = linear.rho_linear(a, law, args.budget)
    rec = {"n": len(a), "rho": rho, "argmax": at, "erdos_bound": linear.erdos_bound(len(a)) if a else None}
    if args.radius is not None:
        rec["radius"] = args.radius
        rec["small_ball"] = linear.small_ball_linear(a, args.radius, law, args.budget)
    return [rec]


def cmd_rho_bilinear(args):
    _need(args, "input")
    m = multilinear.read_matrix(args.input)
    rho, at = multilinear.rho_bilinear(m, _law(args), args.budget, args.workers)
    return [{"n": len(m), "rho_b": rho, "argmax": at}]


def cmd_rho_quadratic(args):
    _need(args, "input")
    m = multilinear.read_matrix(args.input, symmetric=True)
    rho, at = multilinear.rho_quadratic(m, _law(args), args.budget)
    return [{"n": len(m), "rho_q": rho, "argmax": at}]


def cmd_decoupling(args):
    _need(args, "input")
    m = multilinear.read_matrix(args.input, symmetric=True)
    r = multilinear.decoupling_check(m, args.budget)
    return [{"n": len(m), "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds, "rhs_min": r.rhs_min, "holds_min": r.holds_min}]


def cmd_halasz(args):
    _need(args, "input")
    a = linear.read_multiset(args.input)
    l = 1 if args.l is None else args.l
    return [{"n": len(a), "l": l, "R_l": linear.halasz_Rl(a, l, args.budget)}]


def cmd_stanley(args):
    _need(args, "n")
    return [{"n": args.n, "set": [str(x) for x in linear.stanley_set(args.n)], "rho": linear.stanley_reference(args.n, _law(args))}]


def cmd_pigeonhole(args):
    _need(args, "input", "n")
    g = gapmod.Gap.from_json(_read_json(args.input))
    return [{"n": args.n, "rank": g.rank, "volume": g.volume, "bound": linear.pigeonhole_lower_bound(g, args.n)}]


def cmd_gap_reduce(args):
    _need(args, "input", "elements")
    g = gapmod.Gap.from_json(_read_json(args.input))
    u = linear.read_multiset(args.elements)
    out, coords = gapmod.rank_reduce(g, u, args.budget)
    return [
        {
            "rank_in": g.rank,
            "rank_out": out.rank,
            "gap": out.to_json(),
            "coords": [[str(c.element), list(c.coords)] for c in coords],
        }
    ]


def cmd_gap_properize(args):
    _need(args, "input")
    g = gapmod.Gap.from_json(_read_json(args.input))
    out, status = gapmod.properize(g, args.budget)
    return [{"status": status, "rank_in": g.rank, "rank_out": out.rank, "volume": out.volume, "gap": out.to_json()}]


def cmd_detect(args):
    _need(args, "input")
    a = linear.read_multiset(args.input)
    rep = detector.detect_structure(a, args.rmax, args.nprime)
    rec = rep.record()
    if rep.found:
        rec["ratio"] = detector.validate_against_ilo(rep, a).ratio
    return [rec]


def _qn_record(est: randsym.QnEstimate) -> dict:
    rec = est.record()
    rec["two_rows_curve"] = randsym.two_rows_curve(est.n)
    rec["conjecture_curve"] = randsym.conjecture_curve(est.n)
    return rec


def cmd_qn_exact(args):
    _need(args, "n")
    return [_qn_record(randsym.qn_exact(args.n, args.budget))]


def cmd_qn_mc(args):
    _need(args, "n", "trials")
    spec = randsym.RngSpec(args.seed, args.workers)
    return [_qn_record(randsym.qn_montecarlo(args.n, args.trials, spec))]


def cmd_odlyzko(args):
    _need(args, "input")
    rows = multilinear.read_rows(args.input)
    n = args.n if args.n is not None else (len(rows[0]) if rows else None)
    count = randsym.odlyzko_count(rows, n, args.budget)
    r = rank_exact(rows) if rows else 0
    return [{"n": n, "rows": len(rows), "rank": r, "count": count, "bound": 2**r, "holds": count <= 2**r}]


def cmd_rank_increase(args):
    _need(args, "n", "k", "trials")
    res = randsym.rank_increase_experiment(args.n, args.k, args.trials, randsym.RngSpec(args.seed, args.workers))
    return [
        {
            "n": res.n,
            "k": res.k,
            "trials": res.trials,
            "jumps": res.jumps,
            "frequency": res.frequency,
            "bound": res.bound,
            "candidates_drawn": res.candidates_drawn,
        }
    ]


def cmd_cofactor(args):
    _need(args, "input")
    m = multilinear.read_matrix(args.input)
    cof = randsym.cofactor_matrix(m)
    fac = randsym.rank1_factor(cof)
    return [
        {
            "n": len(m),
            "rank": rank_exact(m),
            "cofactor": _matrix_strings(cof),
            "cofactor_rank": rank_exact(cof),
            "rank1_factor": None if fac is None else [str(v) for v in fac],
        }
    ]


def cmd_kernel_height(args):
    _need(args, "input")
    kh = randsym.kernel_height_check(multilinear.read_matrix(args.input))
    return [
        {
            "vector": [str(v) for v in kh.vector],
            "max_num": kh.max_num,
            "max_den": kh.max_den,
            "hadamard_bound": kh.hadamard_bound,
            "within_bound": max(kh.max_num, kh.max_den) <= kh.hadamard_bound,
        }
    ]


def _plant_params(args) -> dict:
    params = _read_json(args.input) if args.input else {}
    if "gap" in params:
        params["gap"] = gapmod.Gap.from_json(params["gap"])
    if args.n is not None:
        params["n"] = args.n
    params.setdefault("seed", args.seed)
    return params


def cmd_plant(args):
    _need(args, "kind")
    kind = _PLANT_ALIASES.get(args.kind, args.kind)
    if kind not in PLANT_KINDS:
        raise OffordError(f"unknown plant kind {args.kind!r}; choose from {', '.join(PLANT_KINDS)}")
    if kind == "ilo-rank1":
        _need(args, "n")
        ns = [n for n in (2**e for e in range(2, 31)) if n <= args.n]
        return detector.ilo_ratio_table(ns, seed=args.seed)
    if kind == "all-ones":
        _need(args, "n")
        return multilinear.all_ones_table(range(1, args.n + 1))
    family, sub = kind.split("-")
    params = _plant_params(args)
    try:
        if family == "bilinear":
            m, cert = multilinear.plant_bilinear(sub, **params)
            rho, at = multilinear.rho_bilinear(m, budget=args.budget, workers=args.workers)
            dist = multilinear.bilinear_distribution(m, budget=args.budget) if cert.target is not None else None
        else:
            m, cert = multilinear.plant_quadratic(sub, **params)
            rho, at = multilinear.rho_quadratic(m, budget=args.budget)
            dist = multilinear.quadratic_distribution(m, budget=args.budget) if cert.target is not None else None
    except KeyError as exc:
        raise OffordError(f"missing plant parameter {exc}") from None
    observed = rho if dist is None else dist.get(cert.target, Fraction(0))
    return [
        {
            "kind": cert.kind,
            "n": len(m),
            "matrix": _matrix_strings(m),
            "bound": cert.bound,
            "target": cert.target,
            "observed": observed,
            "rho": rho,
            "argmax": at,
            "holds": observed >= cert.bound,
        }
    ]


HANDLERS = {
    "rho-linear": cmd_rho_linear,
    "rho-bilinear": cmd_rho_bilinear,
    "rho-quadratic": cmd_rho_quadratic,
    "decoupling-check": cmd_decoupling,
    "halasz": cmd_halasz,
    "stanley": cmd_stanley,
    "pigeonhole": cmd_pigeonhole,
    "gap-reduce": cmd_gap_reduce,
    "gap-properize": cmd_gap_properize,
    "detect": cmd_detect,
    "qn-exact": cmd_qn_exact,
    "qn-mc": cmd_qn_mc,
    "odlyzko": cmd_odlyzko,
    "rank-increase": cmd_rank_increase,
    "cofactor": cmd_cofactor,
    "kernel-height": cmd_kernel_height,
    "plant": cmd_plant,
}


# -- output ---------------------------------------------------------------------


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def render(records: list[dict], fmt: str) -> str:
    records = [_plain(r) for r in records]
    if fmt == "json":
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)
    cols: list[str] = []
    for r in records:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def run(argv: list[str], out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    if not argv or argv[0] not in HANDLERS:
        if argv and argv[0] in ("-h", "--help"):
            out.write(USAGE)
            return EXIT_OK
        err.write(USAGE)
        if argv:
            err.write(f"offord: unknown command {argv[0]!r}\n")
        return EXIT_USAGE
    command = argv[0]
    try:
        args = _parser(command).parse_args(argv[1:])
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    cfg = _config(command, args)
    try:
        records = HANDLERS[command](args)
    except BudgetError as exc:
        err.write(f"offord: budget error: {exc}\n")
        return EXIT_BUDGET
    except (OffordError, ValueError, OSError) as exc:
        err.write(f"offord: input error: {exc}\n")
        return EXIT_INPUT
    for r in records:
        r["config"] = cfg
    out.write(render(records, args.format))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
