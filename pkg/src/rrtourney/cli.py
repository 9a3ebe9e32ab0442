"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 enumeration budget exceeded,
3 a checked property failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

from rrtourney import asymptotics as asy
from rrtourney.exact import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    assertion1_check,
    chain_is_monotone,
    decoupling_chain,
    nlod_scan,
    unique_max,
    unique_max_mc,
    w_closed_form,
    w_table,
)
from rrtourney.io import (
    family_from_json,
    load_model_file,
    model_from_json,
    render_csv,
    render_jsonl,
    write_atomic,
)
from rrtourney.model import (
    ModelError,
    ModelFamily,
    OutcomePmf,
    format_prob,
    model_moments,
    parse_prob,
    preset,
)
from rrtourney.montecarlo import PropertyViolation, run_convergence

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_PROPERTY = 0, 1, 2, 3
TOL = 1e-12
W_FLOOR = -1e-15
SECONDS_PER_PAIR_DRAW = 3e-8


class PropertyFailure(Exception):
    """Raised after output is written when a checked property fails."""


class _Parser(argparse.ArgumentParser):
    # usage errors share the invalid-input exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


PRESET_FLAGS = ("m", "p", "q", "ps", "mw", "mb")


def _add_model_args(p: argparse.ArgumentParser, need_n: bool = True) -> None:
    g = p.add_argument_group("model source (exactly one of --preset / --model)")
    g.add_argument("--preset", help="uniform|binomial|binary|chess|circular|three-class|"
                                    "triangular|ex7 (aliases ex1..ex7)")
    g.add_argument("--model", help="model JSON document")
    if need_n:
        g.add_argument("--n", type=int, help="number of players")
    g.add_argument("--m", type=int, help="points per pairing")
    g.add_argument("--p", help="probability parameter (decimal or num/den)")
    g.add_argument("--q", help="second probability (three-class)")
    g.add_argument("--ps", type=_str_list, help="circular distances p_1,...,p_k")
    g.add_argument("--mw", type=int, help="points within a class (three-class)")
    g.add_argument("--mb", type=int, help="points between classes (three-class)")
    g.add_argument("--float", dest="float_mode", action="store_true",
                   help="use double arithmetic even for rational inputs")


def _add_output_args(p: argparse.ArgumentParser, formats=("csv", "jsonl"), default="csv") -> None:
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=default)


def _preset_params(args) -> dict:
    return {k: getattr(args, k) for k in PRESET_FLAGS if getattr(args, k, None) is not None}


def _check_source(args) -> None:
    if bool(args.preset) == bool(args.model):
        raise ModelError("give exactly one of --preset or --model")
    if args.model and _preset_params(args):
        raise ModelError("preset parameters cannot be combined with --model")


def _model(args):
    _check_source(args)
    if args.preset:
        if args.n is None:
            raise ModelError("--preset needs --n")
        model = preset(args.preset, args.n, **_preset_params(args))
    else:
        doc = load_model_file(args.model)
        if args.n is not None and doc.get("n", args.n) != args.n:
            raise ModelError(f"--n {args.n} disagrees with the model document")
        model = model_from_json(doc, args.n)
    return model.as_float() if args.float_mode else model


def _family(args):
    _check_source(args)
    if args.preset:
        return ModelFamily.of(args.preset, **_preset_params(args))
    return family_from_json(load_model_file(args.model))


def _emit(args, header, rows, records=None) -> None:
    if args.format == "jsonl":
        recs = records if records is not None else [dict(zip(header, r)) for r in rows]
        text = render_jsonl(recs)
    else:
        text = render_csv(header, rows)
    write_atomic(args.out, text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _pair_values(x) -> tuple[str, str]:
    """(rational string or '', 17-digit decimal)."""
    return (format_prob(x) if isinstance(x, Fraction) else "", f"{float(x):.17g}")


# subcommands -----------------------------------------------------------------

def cmd_nlod_scan(args) -> int:
    model = _model(args)
    grid = args.grid if args.grid == "full" else int(args.grid)
    scan = nlod_scan(model, grid, strict=args.strict, budget=args.budget, seed=args.seed,
                     keep_reports=True)
    header = [f"k{i + 1}" for i in range(model.n)] + ["joint", "product", "margin", "holds"]
    rows = [list(r.k) + [r.joint, r.product, r.margin, r.holds] for r in scan.reports]
    _emit(args, header, rows, [r.to_dict() for r in scan.reports])
    w = scan.worst
    _note(f"thresholds={scan.n_thresholds} violations={len(scan.violations)} "
          f"worst_margin={format_prob(w.margin)} at k={','.join(map(str, w.k))}")
    if not scan.ok:
        raise PropertyFailure(f"{len(scan.violations)} threshold vectors violate joint <= product")
    return EXIT_OK


def cmd_decouple_chain(args) -> int:
    model = _model(args)
    rep = decoupling_chain(model, args.k, strict=args.strict, budget=args.budget)
    header = ["t", "F_t", "F_t_decimal"]
    rows = [[t, *_pair_values(v)] for t, v in enumerate(rep.chain)]
    rows.append(["product", *_pair_values(rep.product)])
    _emit(args, header, rows)
    if not chain_is_monotone(rep.chain, TOL) or abs(float(rep.chain[-1] - rep.product)) > TOL:
        raise PropertyFailure("decoupling chain is not nondecreasing up to the marginal product")
    return EXIT_OK


def _wtable_pmf(args) -> OutcomePmf:
    if args.pmf is not None:
        if args.preset or args.model:
            raise ModelError("--pmf excludes --preset/--model")
        pmf = OutcomePmf(tuple(parse_prob(x) for x in args.pmf))
    else:
        model = _model(args)
        i, j = (x - 1 for x in args.pair)
        pmf = model.pmf(i, j)
    return pmf.as_float() if args.float_mode else pmf


def cmd_wtable(args) -> int:
    pmf = _wtable_pmf(args)
    k1 = pmf.m if args.k1 is None else args.k1
    k2 = pmf.m if args.k2 is None else args.k2
    W = w_table(pmf, k1, k2)
    rows, bad = [], 0
    for g in range(k1 + 1):
        for h in range(k2 + 1):
            closed = w_closed_form(pmf, g, h)
            diff = abs(float(W[g, h] - closed))
            if diff > TOL or W[g, h] < W_FLOOR:
                bad += 1
            rows.append([g, h, W[g, h], closed, diff])
    _emit(args, ["g", "h", "value", "closed_form", "abs_diff"], rows)
    if bad:
        raise PropertyFailure(f"{bad} W entries disagree with the closed form or are negative")
    return EXIT_OK


def cmd_assertion1(args) -> int:
    model = _model(args)
    a, b = (x - 1 for x in args.players)
    res = assertion1_check(model, args.k1, args.k2, (a, b), budget=args.budget)
    header = ["k1", "k2", "lhs", "rhs", "abs_diff"]
    _emit(args, header, [[args.k1, args.k2, res.lhs, res.rhs, res.error]])
    if res.error > TOL:
        raise PropertyFailure(f"F_1 - F and sum R W differ by {res.error:.3g}")
    return EXIT_OK


def cmd_unique_max(args) -> int:
    if args.mc:
        if args.seed is None:
            raise ModelError("--mc needs --seed")
        est = unique_max_mc(args.n, args.trials, args.seed)
        print(f"{est.hits} / {est.trials} = {est.estimate:.10f} +- {est.stderr:.10f}")
        if args.out:
            _emit(args, ["n", "trials", "seed", "hits", "estimate", "stderr"],
                  [[est.n, est.trials, est.seed, est.hits, est.estimate, est.stderr]])
        return EXIT_OK
    rep = unique_max(args.n, workers=args.workers)
    print(rep.line())
    if args.out:
        _emit(args, ["n", "favorable", "total", "r_n", "r_n_decimal"],
              [[rep.n, rep.favorable, rep.total, format_prob(rep.r_n), f"{rep.value:.17g}"]])
    return EXIT_OK


def cmd_simulate(args) -> int:
    family = _family(args)
    if any(n < 4 for n in args.grid):
        raise ModelError("simulate needs every grid n >= 4 (band thresholds need log log(n-1) > 0)")
    if args.trials < 100:
        raise ModelError("simulate needs --trials >= 100")
    projected = args.trials * sum(n * (n - 1) / 2 for n in args.grid) * SECONDS_PER_PAIR_DRAW
    if projected > 600:
        _note(f"warning: projected runtime {projected / 60:.0f} min exceeds 10 min")
    reports = run_convergence(family, args.grid, args.trials, args.epsilon, args.seed,
                              workers=args.workers)
    stats = list(reports[0].statistics())
    if args.format == "jsonl":
        records = [{"n": r.n, "statistic": k, "value": v, "normalization": r.normalization,
                    "seed": r.seed, "epsilon": r.epsilon}
                   for r in reports for k, v in r.statistics().items()]
        write_atomic(args.out, render_jsonl(records))
    else:
        rows = [[r.n] + list(r.statistics().values()) for r in reports]
        write_atomic(args.out, render_csv(["n"] + stats, rows))
    return EXIT_OK


def cmd_asymptote(args) -> int:
    eps = args.epsilon
    if args.mode == "thresholds":
        ns = args.grid or [args.n or 101]
        rows = []
        for n in ns:
            t = asy.thresholds(n, eps)
            rows.append([n, eps, t.x_minus, t.x_plus, t.center])
            _note(f"n={n} eps={eps}: x_minus={t.x_minus:.6f} x_plus={t.x_plus:.6f}")
        _emit(args, ["n", "epsilon", "x_minus", "x_plus", "sqrt_2log"], rows)
    elif args.mode == "bounds":
        consts = asy.BoundConstants(args.c_prime, args.c_double_prime)
        ns = args.grid or [10, 100, 1000, 10**4, 10**5]
        table = asy.bound_table(ns, eps, consts)
        _emit(args, list(table[0]), [list(r.values()) for r in table])
    elif args.mode == "mills":
        xs = args.x or [2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6, 6.5, 7, 7.5, 8]
        rows = [[c.x, c.tail, c.approx, c.rel_err] for c in map(asy.mills_ratio_check, xs)]
        _emit(args, ["x", "tail", "approx", "rel_err"], rows)
    elif args.mode == "center":
        if not args.preset:
            raise ModelError("--center needs --preset")
        params = _preset_params(args)
        ns = args.grid or [args.n or 50]
        rows = []
        for n in ns:
            c = asy.predicted_center(args.preset, n, **params)
            check = asy.moment_center(preset(args.preset, n, **params))
            rows.append([c.example, n, c.mean_term, c.fluctuation_term, c.center, check,
                         abs(c.center - check)])
        _emit(args, ["example", "n", "mean_term", "fluctuation_term", "center",
                     "moments_center", "abs_diff"], rows)
    else:  # cramer
        args.n = None
        family = _family(args)
        ns = args.grid or [50, 200, 800]
        rows = [r for n in ns for r in asy.cramer_tail_table(family(n), eps)]
        _emit(args, list(rows[0]), [list(r.values()) for r in rows])
    return EXIT_OK


def cmd_moments(args) -> int:
    model = _model(args)
    lat = model_moments(model)
    disp = model_moments(model, display=True)
    rows = []
    for i in range(model.n):
        rows.append([i + 1, *_pair_values(lat.means[i]), *_pair_values(lat.variances[i]),
                     *_pair_values(disp.means[i]), *_pair_values(disp.variances[i])])
    header = ["player", "mean", "mean_decimal", "variance", "variance_decimal",
              "display_mean", "display_mean_decimal", "display_variance",
              "display_variance_decimal"]
    _emit(args, header, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rrtourney", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nlod-scan", help="check joint CDF <= product of marginals on a grid")
    _add_model_args(p)
    p.add_argument("--grid", default="full", help="'full' or a count of random thresholds")
    p.add_argument("--strict", action="store_true", help="use s_i < k_i")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--seed", type=int, default=0, help="seed for random threshold grids")
    _add_output_args(p)
    p.set_defaults(func=cmd_nlod_scan)

    p = sub.add_parser("decouple-chain", help="F_0..F_N as pairs are decoupled")
    _add_model_args(p)
    p.add_argument("--k", type=_int_list, required=True, help="thresholds k1,...,kn")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_output_args(p)
    p.set_defaults(func=cmd_decouple_chain)

    p = sub.add_parser("wtable", help="W(g,h) with closed-form cross-check")
    _add_model_args(p)
    p.add_argument("--pmf", type=_str_list, help="p_0,...,p_m (instead of a model)")
    p.add_argument("--pair", type=_int_list, default=[1, 2], help="pair i,j of the model")
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    _add_output_args(p)
    p.set_defaults(func=cmd_wtable)

    p = sub.add_parser("assertion1", help="F_1 - F against sum of R(g,h) W(g,h)")
    _add_model_args(p)
    p.add_argument("--k1", type=int, required=True)
    p.add_argument("--k2", type=int, required=True)
    p.add_argument("--players", type=_int_list, default=[1, 2])
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_output_args(p)
    p.set_defaults(func=cmd_assertion1)

    p = sub.add_parser("unique-max", help="probability of a unique top scorer")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mc", action="store_true", help="Monte Carlo instead of exact count")
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", "--threads", type=int, default=1)
    _add_output_args(p)
    p.set_defaults(func=cmd_unique_max)

    p = sub.add_parser("simulate", help="Monte Carlo study of the normalised maximal score")
    _add_model_args(p, need_n=False)
    p.add_argument("--grid", type=_int_list, default=[50, 200, 800, 2000])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--workers", "--threads", type=int, default=1)
    _add_output_args(p, default="jsonl")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("asymptote", help="thresholds, bounds, Mills ratio, centres, tail ratios")
    mode = p.add_mutually_exclusive_group()
    for name in ("thresholds", "bounds", "mills", "center", "cramer"):
        mode.add_argument(f"--{name}", dest="mode", action="store_const", const=name)
    _add_model_args(p)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--grid", type=_int_list)
    p.add_argument("--x", type=_float_list, help="points for --mills")
    p.add_argument("--c-prime", type=float, default=0.3)
    p.add_argument("--c-double-prime", type=float, default=0.25)
    _add_output_args(p)
    p.set_defaults(func=cmd_asymptote, mode="thresholds")

    p = sub.add_parser("moments", help="per-player score mean and variance")
    _add_model_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_moments)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, ValueError, IndexError) as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT
    except BudgetExceeded as exc:
        _note(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    except (PropertyFailure, PropertyViolation) as exc:
        _note(f"property violated: {exc}")
        return EXIT_PROPERTY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
