"""Command-line front end: parse, rob, prune, learn, eval, f1-derive."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from .data import (
    DataError,
    RankingDataset,
    derive_f1_signals,
    load_feedback,
    load_signals,
    read_valuation,
    write_signal_csv,
    write_valuation,
)
from .encode import EncodingError, SemanticObjective, dataset_pairs
from .evaluate import kendall_accuracy, mean_std, pairwise_accuracy, prefix_curve, write_curve_csv
from .formula import FormulaSyntaxError, Valuation, collect_parameters, parse, to_pnf, to_string
from .learn import LearnConfig, learn
from .pruning import prune
from .rct import MissingChannelError, MissingParameterError, SignalTooShortError, build_rct, robustness, weighted_robustness
from .solve import SamplerConfig, rs_trials

log = logging.getLogger("wstl")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _read_formula(arg: str):
    """A formula given inline or as a path to a text file."""
    p = Path(arg)
    text = p.read_text(encoding="utf-8") if p.is_file() else arg
    return parse(text.strip())


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.10g}"


def _emit(args, payload: dict | str, csv_rows: list[dict] | None = None) -> None:
    """Print (or write to --output) in the chosen format."""
    if isinstance(payload, str):
        text = payload if payload.endswith("\n") else payload + "\n"
    elif args.format == "csv" and csv_rows is not None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(csv_rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, default=_json_default) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _single_signal(path: str):
    store = load_signals(path)
    if len(store) != 1:
        raise DataError(f"{path}: expected one signal, found {len(store)}")
    return next(iter(store.values()))


# -- commands ---------------------------------------------------------------

def cmd_parse(args) -> int:
    f = _read_formula(args.formula)
    pnf = to_pnf(f)
    out = {"formula": to_string(f), "pnf": to_string(pnf)}
    if args.length is not None or not _has_unbounded(pnf):
        table = collect_parameters(pnf, args.length)
        out["parameters"] = {pid: e.describe() for pid, e in table.entries.items()}
    rows = [{"param": k, "operand": v} for k, v in out.get("parameters", {}).items()] or None
    _emit(args, out, rows)
    return EXIT_OK


def _has_unbounded(f) -> bool:
    return any(n.interval is not None and n.interval[1] is None for _, n in f.walk())


def cmd_rob(args) -> int:
    f = to_pnf(_read_formula(args.formula))
    sig = _single_signal(args.signal)
    tree = build_rct(f, args.time, sig.length)
    lines = [f"rho = {_fmt(robustness(tree, sig))}"]
    if args.weights:
        lines.append(f"r = {_fmt(weighted_robustness(tree, sig, read_valuation(args.weights)))}")
    if args.tree:
        lines.append(tree.dump())
    _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_prune(args) -> int:
    f = to_pnf(_read_formula(args.formula))
    sig = _single_signal(args.signal)
    tree = build_rct(f, args.time, sig.length)
    robustness(tree, sig)
    pr = prune(tree)
    table = collect_parameters(f, sig.length)
    if args.format == "json":
        _emit(args, {
            "rho": pr.value if math.isfinite(pr.value) else _fmt(pr.value),
            "sign": pr.root_sign,
            "constant": pr.constant,
            "nodes_kept": pr.kept,
            "nodes_deleted": pr.deleted,
            "active_parameters": [p for p in table if p in pr.active_params],
            "inactive_parameters": [p for p in table if p not in pr.active_params],
        })
    else:
        _emit(args, pr.root.dump())
    return EXIT_OK


def _learn_config(args) -> LearnConfig:
    return LearnConfig(
        samples=args.samples,
        seed=args.seed,
        v_bound=args.v_bound,
        time_limit=args.time_limit,
        solver=args.solver,
        lp_path=args.lp,
        solution_path=args.solution,
    )


def cmd_learn(args) -> int:
    f = _read_formula(args.formula)
    store = load_signals(args.signals)
    data = load_feedback(args.feedback, args.mode, store)
    cfg = _learn_config(args)
    if cfg.solver == "lp-export" and not cfg.lp_path:
        raise DataError("--solver lp-export needs --lp PATH")
    res = learn(f, store, data, cfg)
    if args.output:
        write_valuation(args.output, res.valuation, res.objective, res.status)
    report = dict(res.report)
    if args.lp:
        report["lp_file"] = str(args.lp)
    if not args.time_report:
        report.pop("wall_time", None)
    text = json.dumps(report, indent=2, default=_json_default) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.output:
        sys.stdout.write(text)
    else:
        payload = {"weights": dict(res.valuation), "objective": res.objective, "status": res.status}
        sys.stdout.write(json.dumps(payload, indent=2, default=_json_default) + "\n")
        sys.stderr.write(text)
    return EXIT_OK


def cmd_eval(args) -> int:
    f = _read_formula(args.formula)
    store = load_signals(args.signals)
    data = load_feedback(args.feedback, None, store)
    if args.rs_trials:
        objective = SemanticObjective(f, store, data)
        cfg = SamplerConfig(args.samples, args.seed, (-args.v_bound, args.v_bound))
        results = rs_trials(objective, cfg, args.rs_trials)
        total = len(objective.pairs) or 1
        accs = [r / total for r in results] if objective.pairs else results
        mean, std = mean_std(accs)
        out = {"trials": args.rs_trials, "samples": args.samples, "seed": args.seed,
               "accuracy": accs, "mean": mean, "std": std}
        rows = [{"trial": i, "accuracy": a} for i, a in enumerate(accs)]
        _emit(args, out, rows)
        return EXIT_OK
    if not args.weights:
        raise DataError("eval needs --weights (or --rs-trials)")
    valuation = Valuation(read_valuation(args.weights))
    if args.prefix_sweep:
        if not isinstance(data, RankingDataset):
            raise DataError("--prefix-sweep needs a ranking feedback file")
        truth = list(data.ordered)
        length = max(store[i].length for i in truth)
        table = collect_parameters(to_pnf(f), length)
        rows = prefix_curve(valuation, f, store, truth, range(1, length + 1), table)
        _emit(args, write_curve_csv(rows))
        return EXIT_OK
    if isinstance(data, RankingDataset):
        rep = kendall_accuracy(valuation, f, data, store)
    else:
        rep = pairwise_accuracy(valuation, f, dataset_pairs(data), store)
    d = rep.to_dict()
    _emit(args, d, [d])
    return EXIT_OK


def cmd_f1_derive(args) -> int:
    store, groups, standings = derive_f1_signals(args.laps, args.c_per_lap, normalize=not args.no_normalize)
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for sid, sig in store.items():
        write_signal_csv(sig, out / f"{sid}.csv")
        manifest[sid] = f"{sid}.csv"
    (out / "signals.json").write_text(json.dumps({"signals": manifest}, indent=2) + "\n", encoding="utf-8")
    for g, ids in standings.items():
        (out / f"ranking_{g}.json").write_text(json.dumps({"ranking": ids}, indent=2) + "\n", encoding="utf-8")
    sys.stdout.write(json.dumps({"signals": len(store), "groups": sorted(standings)}, indent=2) + "\n")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root RNG seed")
    common.add_argument("--output", "-o", help="output file (or directory for f1-derive)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wstl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse a formula; print PNF and its parameters")
    p.add_argument("formula", help="formula text or a file holding it")
    p.add_argument("--length", type=int, help="signal length used to resolve unbounded intervals")
    p.set_defaults(func=cmd_parse)

    for name, func, helptext in (
        ("rob", cmd_rob, "robustness of one signal"),
        ("prune", cmd_prune, "pruned robustness computation tree of one signal"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--formula", "-f", required=True)
        p.add_argument("--signal", "-s", required=True, help="signal CSV")
        p.add_argument("--time", "-t", type=int, default=0)
        if name == "rob":
            p.add_argument("--weights", "-w", help="valuation JSON")
            p.add_argument("--tree", action="store_true", help="dump the tree with node values")
        p.set_defaults(func=func)

    def solver_flags(p):
        p.add_argument("--samples", type=int, default=10000, help="random-search samples")
        p.add_argument("--v-bound", type=float, default=3.0, help="log-weights lie in [-b, b]")

    p = sub.add_parser("learn", parents=[common], help="learn weights from feedback")
    p.add_argument("--formula", "-f", required=True)
    p.add_argument("--signals", required=True, help="CSV, directory of CSVs, or JSON manifest")
    p.add_argument("--feedback", required=True, help="feedback JSON (pairs, ranking or demos)")
    p.add_argument("--mode", choices=("preferences", "ranking", "demonstrations"))
    p.add_argument("--solver", choices=("internal", "lp-export"), default="internal")
    p.add_argument("--time-limit", type=float, help="seconds for branch-and-bound")
    p.add_argument("--lp", help="also write the MILP to this LP file")
    p.add_argument("--solution", help="import '<var> <value>' lines from an external solver")
    p.add_argument("--report", help="write the run report JSON here")
    p.add_argument("--time-report", action="store_true", help="include wall time in the report")
    solver_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("eval", parents=[common], help="score a valuation against feedback")
    p.add_argument("--formula", "-f", required=True)
    p.add_argument("--signals", required=True)
    p.add_argument("--feedback", required=True)
    p.add_argument("--weights", "-w", help="valuation JSON")
    p.add_argument("--prefix-sweep", action="store_true", help="emit the K,accuracy curve")
    p.add_argument("--rs-trials", type=int, default=0, help="rerun the random-search baseline T times")
    solver_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("f1-derive", parents=[common], help="derive per-car signals from a lap table")
    p.add_argument("laps", help="lap CSV")
    p.add_argument("--c-per-lap", type=float, required=True, help="fuel burn in kg per lap")
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_f1_derive)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except MissingChannelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FormulaSyntaxError, DataError, EncodingError, SignalTooShortError, MissingParameterError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
