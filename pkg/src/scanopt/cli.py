"""Command-line interface.

Subcommands:
  priors build     write a prior file from letter frequencies
  layout build     build a named layout and write its document
  layout eval      print EQPD, expected trials and per-symbol codewords
  karp             run the exact optimizer (fixed n or unbounded)
  model accuracy   expected character accuracy for a user model
  model grid       accuracy grid over pd/pfa values as CSV
  model time       expected error-free decision time
  simulate         seeded Monte Carlo session, prints the summary record
  oracle           brute-force optimum for tiny alphabets
  serve            run the HTTP service for the browser UI
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import karp as karp_mod
from . import layouts as layouts_mod
from .errors import ScanoptError
from .perf import (
    TimingParams,
    UserModel,
    accuracy_grid,
    expected_accuracy,
    expected_decision_time,
    grid_to_csv,
)
from .priors import CharacterPrior, build_english_prior, load_prior, save_prior
from .service import DEFAULT_SCAN_DELAY_S, ScanService, load_layout_files, make_server
from .sim import SimConfig, simulate_session
from .tree import (
    codeword_cost,
    eqpd,
    expected_trials,
    parse_layout,
    serialize_layout,
    tree_to_codewords,
)


def _load_prior_arg(path: str | None) -> CharacterPrior:
    if path is None:
        return build_english_prior()
    return load_prior(path)


def _load_layout_arg(path: str):
    return parse_layout(Path(path).read_text(encoding="utf-8"))


def _values_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _cmd_priors_build(args: argparse.Namespace) -> int:
    freqs = None
    if args.letter_freqs:
        raw = json.loads(Path(args.letter_freqs).read_text(encoding="utf-8"))
        freqs = raw.get("frequencies", raw)
    prior = build_english_prior(
        letter_freqs=freqs, avg_word_len=args.avg_word_len, backspace_p=args.backspace_p
    )
    save_prior(prior, args.out)
    print(f"wrote {len(prior)}-symbol prior to {args.out}")
    return 0


def _cmd_layout_build(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    tree = layouts_mod.build_layout(args.type, prior)
    Path(args.out).write_text(serialize_layout(tree, args.type), encoding="utf-8")
    print(f"wrote layout {args.type!r} to {args.out} (eqpd {eqpd(tree, prior):.6g})")
    return 0


def _cmd_layout_eval(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    layout = _load_layout_arg(args.layout)
    probs = prior.as_dict()
    print(f"layout: {layout.name}")
    print(f"eqpd: {eqpd(layout.tree, prior):.9g}")
    print(f"expected_trials: {expected_trials(layout.tree, prior):.9g}")
    shape = layouts_mod.describe_grid(layout.tree)
    if shape is not None:
        if shape.row_lengths:
            print("shape: rows " + ",".join(map(str, shape.row_lengths)))
        else:
            blocks = " | ".join(",".join(map(str, rows)) for rows in shape.block_shapes)
            print(f"shape: blocks {blocks}")
    print("symbol\tp\tcodeword\tcost")
    for sym, cw in sorted(tree_to_codewords(layout.tree).items()):
        print(f"{sym}\t{probs.get(sym, 0.0):.6g}\t{list(cw)}\t{codeword_cost(cw)}")
    return 0


def _cmd_karp(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    if args.n is not None:
        result = karp_mod.karp_optimize(prior, args.n)
    else:
        result = karp_mod.karp_optimize_unbounded(prior)
    print(
        f"eqpd: {result.eqpd:.9g}\nn_used: {result.n_used}\n"
        f"max_codeword_cost: {result.max_codeword_cost}"
    )
    if args.out:
        Path(args.out).write_text(serialize_layout(result.tree, "karp"), encoding="utf-8")
        print(f"wrote layout to {args.out}")
    return 0


def _cmd_model_accuracy(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    layout = _load_layout_arg(args.layout)
    user = UserModel(pd=args.pd, pfa=args.pfa)
    print(f"{expected_accuracy(layout.tree, prior, user):.9g}")
    return 0


def _cmd_model_grid(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    layout = _load_layout_arg(args.layout)
    pd_values = _values_list(args.pd_values)
    pfa_values = _values_list(args.pfa_values)
    grid = accuracy_grid(layout.tree, prior, pd_values, pfa_values)
    csv = grid_to_csv(grid, pd_values, pfa_values)
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
        print(f"wrote {len(pd_values)}x{len(pfa_values)} grid to {args.out}")
    else:
        sys.stdout.write(csv)
    return 0


def _cmd_model_time(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    layout = _load_layout_arg(args.layout)
    timing = TimingParams(mode=args.mode, t_scan=args.t_scan, t_yes=args.t_yes, t_no=args.t_no)
    print(f"{expected_decision_time(layout.tree, prior, timing):.9g}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    layout = _load_layout_arg(args.layout)
    config = SimConfig(
        user=UserModel(pd=args.pd, pfa=args.pfa),
        timing=TimingParams(mode=args.mode, t_scan=args.t_scan, t_yes=args.t_yes, t_no=args.t_no),
        seed=args.seed,
        max_queries_per_decision=args.max_queries,
    )
    summary = simulate_session(layout.tree, prior, config, args.decisions)
    print(summary.to_json())
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    result = karp_mod.brute_force_optimal(prior, args.max_cost)
    print(f"eqpd: {result.eqpd:.9g}\nmax_codeword_cost: {result.max_codeword_cost}")
    for sym, cw in sorted(tree_to_codewords(result.tree).items()):
        print(f"{sym}\t{list(cw)}\t{codeword_cost(cw)}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    prior = _load_prior_arg(args.prior)
    layouts = None
    if args.layout_file:
        layouts = load_layout_files(args.layout_file)
    print("building layouts (the exact optimizer may take a little while)...", flush=True)
    service = ScanService(
        prior=prior,
        layouts=layouts,
        log_path=args.log,
        scan_delay_s=args.scan_delay,
    )
    server = make_server(service, args.port, host=args.host, static_dir=args.static)
    print(f"serving on http://{args.host}:{args.port} (log: {args.log})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scanopt",
        description="Switch-scanning decision trees: optimization, modeling, simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("priors", help="prior construction")
    psub = p.add_subparsers(dest="subcommand", required=True)
    pb = psub.add_parser("build", help="write a prior file")
    pb.add_argument("--letter-freqs", help="JSON file of letter relative frequencies")
    pb.add_argument("--avg-word-len", type=float, default=4.79)
    pb.add_argument("--backspace-p", type=float, default=0.05)
    pb.add_argument("--out", required=True)
    pb.set_defaults(func=_cmd_priors_build)

    lay = sub.add_parser("layout", help="layout construction and evaluation")
    lsub = lay.add_subparsers(dest="subcommand", required=True)
    lb = lsub.add_parser("build", help="build a layout by name")
    lb.add_argument("--type", required=True, choices=layouts_mod.LAYOUT_NAMES)
    lb.add_argument("--prior", help="prior file (defaults to the English prior)")
    lb.add_argument("--out", required=True)
    lb.set_defaults(func=_cmd_layout_build)
    le = lsub.add_parser("eval", help="evaluate a layout file")
    le.add_argument("--layout", required=True)
    le.add_argument("--prior")
    le.set_defaults(func=_cmd_layout_eval)

    pk = sub.add_parser("karp", help="exact minimum-EQPD optimizer")
    pk.add_argument("--prior")
    group = pk.add_mutually_exclusive_group()
    group.add_argument("--n", type=int, help="restrict trial costs to 1..n")
    group.add_argument("--unbounded", action="store_true", help="iterate n until provably optimal")
    pk.add_argument("--out", help="write the resulting layout document")
    pk.set_defaults(func=_cmd_karp)

    model = sub.add_parser("model", help="closed-form user performance")
    msub = model.add_subparsers(dest="subcommand", required=True)
    ma = msub.add_parser("accuracy", help="expected character accuracy")
    ma.add_argument("--layout", required=True)
    ma.add_argument("--prior")
    ma.add_argument("--pd", type=float, required=True)
    ma.add_argument("--pfa", type=float, required=True)
    ma.set_defaults(func=_cmd_model_accuracy)
    mg = msub.add_parser("grid", help="accuracy grid CSV")
    mg.add_argument("--layout", required=True)
    mg.add_argument("--prior")
    mg.add_argument("--pd-values", required=True, help="comma-separated pd values")
    mg.add_argument("--pfa-values", required=True, help="comma-separated pfa values")
    mg.add_argument("--out")
    mg.set_defaults(func=_cmd_model_grid)
    mt = msub.add_parser("time", help="expected decision time")
    mt.add_argument("--layout", required=True)
    mt.add_argument("--prior")
    mt.add_argument("--mode", choices=("timed", "binary"), default="timed")
    mt.add_argument("--t-scan", type=float, default=1.2)
    mt.add_argument("--t-yes", type=float, default=0.5)
    mt.add_argument("--t-no", type=float, default=0.5)
    mt.set_defaults(func=_cmd_model_time)

    sim = sub.add_parser("simulate", help="Monte Carlo scanning session")
    sim.add_argument("--layout", required=True)
    sim.add_argument("--prior")
    sim.add_argument("--mode", choices=("timed", "binary"), default="timed")
    sim.add_argument("--decisions", type=int, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--pd", type=float, required=True)
    sim.add_argument("--pfa", type=float, required=True)
    sim.add_argument("--t-scan", type=float, default=1.2)
    sim.add_argument("--t-yes", type=float, default=0.5)
    sim.add_argument("--t-no", type=float, default=0.5)
    sim.add_argument("--max-queries", type=int, default=1000)
    sim.set_defaults(func=_cmd_simulate)

    orc = sub.add_parser("oracle", help="brute-force optimum (tiny alphabets)")
    orc.add_argument("--prior")
    orc.add_argument("--max-cost", type=int, required=True)
    orc.set_defaults(func=_cmd_oracle)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--port", type=int, required=True)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--log", required=True, help="append-only session log path")
    srv.add_argument("--prior")
    srv.add_argument(
        "--layout-file",
        action="append",
        help="serve these layout documents instead of building the roster",
    )
    srv.add_argument("--scan-delay", type=float, default=DEFAULT_SCAN_DELAY_S)
    srv.add_argument("--static", help="directory of UI files to serve at /")
    srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScanoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
