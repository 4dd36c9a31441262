"""Command-line front end: one subcommand per pipeline stage, plus ``pipeline`` and ``compare``.

Exit codes: 0 on success, 1 when a stage fails, 2 for bad configuration or input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .attack import (AttackResult, crouting_attack, proximity_attack, score_ccr,
                     score_crouting)
from .defense import (DEFAULT_LIFT_LAYER, SwapLedger, attach_correction_cells, naive_lift,
                      protected_placement, randomize, restore)
from .netlist import NetlistError, write_bench
from .physical import (Placement, SplitView, place, read_layout, route, split,
                       split_with_truth, write_layout)
from .report import (DEFAULT_SPLIT_LAYERS, MODES, ConfigError, ExperimentConfig, MetricsReport,
                     StageError, compare, load_benchmark, run_pipeline)
from .sim import DEFAULT_PATTERNS, OER_TARGET, PatternSet, score

EXIT_OK, EXIT_STAGE, EXIT_CONFIG = 0, 1, 2


class _InputError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _InputError(f"cannot read {path}: {e.strerror}") from e


def _write(args, name: str, text: str) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    print(path)
    return path


def _bench(spec: str):
    try:
        return load_benchmark(spec)
    except NetlistError as e:
        raise _InputError(f"{spec}: {e}") from e


def _ledger(path: str) -> SwapLedger:
    try:
        return SwapLedger.from_json(_read(path))
    except (ValueError, KeyError, TypeError) as e:
        raise _InputError(f"{path}: not a swap ledger ({e})") from e


def _placement(path: str) -> Placement:
    try:
        return Placement.from_text(_read(path))
    except (ValueError, IndexError) as e:
        raise _InputError(f"{path}: not a placement ({e})") from e


def _layout(path: str):
    try:
        return read_layout(_read(path))
    except (ValueError, IndexError) as e:
        raise _InputError(f"{path}: not a layout ({e})") from e


def _view(path: str) -> SplitView:
    try:
        return SplitView.from_text(_read(path))
    except (ValueError, IndexError, KeyError) as e:
        raise _InputError(f"{path}: not a split view ({e})") from e


def cmd_randomize(args) -> None:
    n = _bench(args.bench)
    n_rand, ledger = randomize(n, oer_target=args.oer_target, max_swaps=args.max_swaps,
                               num_patterns=args.patterns, seed=args.seed)
    _write(args, "randomized.bench", write_bench(n_rand))
    _write(args, "ledger.json", ledger.to_json())
    if not ledger.reached_target:
        print(f"warning: OER {ledger.oer_achieved:.4f} below target ({ledger.stop_reason})",
              file=sys.stderr)


def cmd_place(args) -> None:
    n = _bench(args.bench)
    if args.ledger:
        p = protected_placement(n, _ledger(args.ledger), seed=args.seed,
                                utilization=args.utilization)
    else:
        p = place(n, utilization=args.utilization, seed=args.seed)
    _write(args, "placement.txt", p.to_text())


def cmd_route(args) -> None:
    layout = route(_placement(args.placement), _bench(args.bench))
    _write(args, "layout.txt", write_layout(layout))


def cmd_lift(args) -> None:
    n = _bench(args.bench)
    p = _placement(args.placement)
    ledger = _ledger(args.ledger)
    if args.naive:
        plan = naive_lift(n, ledger.randomized_nets, args.layer)
        _write(args, "layout_naive.txt", write_layout(route(p, n, **plan.route_args())))
        return
    plan, ledger = attach_correction_cells(n, ledger, p, args.layer)
    _write(args, "layout_erroneous.txt", write_layout(route(p, n, **plan.route_args())))
    _write(args, "ledger.json", ledger.to_json())


def cmd_restore(args) -> None:
    restored = restore(_layout(args.layout), _ledger(args.ledger))
    _write(args, "layout_restored.txt", write_layout(restored))


def cmd_split(args) -> None:
    view = split(_layout(args.layout), args.layer)
    _write(args, f"view_M{args.layer}.txt", view.to_text())


def cmd_attack(args) -> None:
    view = _view(args.view)
    if args.kind == "proximity":
        result = proximity_attack(view)
        _write(args, "attack.json", result.to_json())
        _write(args, "recovered.bench", write_bench(result.netlist))
    else:
        report = crouting_attack(view, args.bboxes)
        _write(args, "crouting.json", report.to_json())


def cmd_score(args) -> None:
    layout = _layout(args.layout)
    golden = _bench(args.original)
    recovered = _bench(args.recovered)
    view, truth = split_with_truth(layout, args.layer)
    try:
        result = AttackResult.from_json(_read(args.attack), recovered)
    except (ValueError, KeyError, TypeError) as e:
        raise _InputError(f"{args.attack}: not an attack result ({e})") from e
    nets = _ledger(args.ledger).randomized_nets if args.ledger else None
    ccr = score_ccr(result, view, truth, nets)
    func = score(golden, recovered, PatternSet.for_budget(golden.inputs, args.patterns,
                                                          args.seed))
    crouting = score_crouting(crouting_attack(view, args.bboxes), view, truth)
    out = {"layer": args.layer, **ccr.to_json(), "oer": round(func.oer, 4),
           "hd": round(func.hd, 4), "crouting": json.loads(crouting.to_json())}
    _write(args, f"score_M{args.layer}.json", json.dumps(out, indent=1, sort_keys=True) + "\n")


def cmd_pipeline(args) -> None:
    if args.config:
        try:
            d = json.loads(_read(args.config))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{args.config}: {e}") from e
        cfg = ExperimentConfig.from_json(d, out=args.out)
    else:
        if not args.bench:
            raise ConfigError("pipeline needs a benchmark or --config")
        cfg = ExperimentConfig(args.bench, seed=args.seed, mode=args.mode,
                               split_layers=args.split_layers, lift_layer=args.lift_layer,
                               oer_target=args.oer_target, max_swaps=args.max_swaps,
                               patterns=args.patterns, bboxes=args.bboxes,
                               utilization=args.utilization, budget=args.budget, out=args.out)
    report = run_pipeline(cfg)
    print(Path(args.out) / "report.json")
    avg = report.average
    ccr = "n/a" if avg["ccr"] is None else f"{avg['ccr']:.4f}"
    print(f"{report.benchmark} {cfg.mode}: ccr {ccr} oer {avg['oer']:.4f} hd {avg['hd']:.4f}")


def cmd_compare(args) -> None:
    reports = []
    for path in args.reports:
        try:
            reports.append(MetricsReport.from_json(_read(path)))
        except json.JSONDecodeError as e:
            raise _InputError(f"{path}: not a report ({e})") from e
    try:
        table = compare(reports)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    _write(args, "compare.csv", table)


def build_parser() -> argparse.ArgumentParser:
    def globals_(defaults: bool) -> argparse.ArgumentParser:
        # Subcommands accept the global flags too; their copies default to
        # SUPPRESS so they never overwrite a value given before the subcommand.
        g = argparse.ArgumentParser(add_help=False)
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        g.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
        g.add_argument("--out", default=d("."), help="output directory (default .)")
        g.add_argument("--patterns", type=int, default=d(DEFAULT_PATTERNS),
                       help=f"simulation pattern budget (default {DEFAULT_PATTERNS})")
        return g

    common = globals_(False)
    ap = argparse.ArgumentParser(prog="splitguard", parents=[globals_(True)],
                                 description="Netlist-randomization defense for split "
                                             "manufacturing, and attacks on it.")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    p = cmd("randomize", cmd_randomize, "swap sinks until the output error rate hits a target")
    p.add_argument("bench")
    p.add_argument("--oer-target", type=float, default=OER_TARGET)
    p.add_argument("--max-swaps", type=int, default=None)

    p = cmd("place", cmd_place, "place a netlist; with --ledger, weight swapped connections")
    p.add_argument("bench")
    p.add_argument("--ledger", default=None)
    p.add_argument("--utilization", type=float, default=0.6)

    p = cmd("route", cmd_route, "route a placed netlist without constraints")
    p.add_argument("bench")
    p.add_argument("placement")

    p = cmd("lift", cmd_lift, "insert correction cells and route the erroneous layout "
                              "(or, with --naive, lift the ledger's nets in place)")
    p.add_argument("bench", help="randomized netlist, or the original one with --naive")
    p.add_argument("placement")
    p.add_argument("ledger")
    p.add_argument("--layer", type=int, default=DEFAULT_LIFT_LAYER)
    p.add_argument("--naive", action="store_true", default=False)

    p = cmd("restore", cmd_restore, "reroute the correction cells' BEOL to the true netlist")
    p.add_argument("layout")
    p.add_argument("ledger")

    p = cmd("split", cmd_split, "write the attacker's FEOL view below a split layer")
    p.add_argument("layout")
    p.add_argument("--layer", type=int, required=True)

    p = cmd("attack", cmd_attack, "run an attack on a split view")
    p.add_argument("kind", choices=("proximity", "crouting"))
    p.add_argument("view")
    p.add_argument("--bboxes", type=_int_list, default=(15, 30, 45))

    p = cmd("score", cmd_score, "grade an attack against the full layout")
    p.add_argument("layout")
    p.add_argument("attack", help="attack.json from 'attack proximity'")
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--original", required=True, help="golden netlist")
    p.add_argument("--recovered", required=True, help="recovered.bench from the attack")
    p.add_argument("--ledger", default=None, help="score only the randomized nets")
    p.add_argument("--bboxes", type=_int_list, default=(15, 30, 45))

    p = cmd("pipeline", cmd_pipeline, "run a whole experiment and write report.json")
    p.add_argument("bench", nargs="?", default=None)
    p.add_argument("--config", default=None, help="JSON experiment config")
    p.add_argument("--mode", choices=MODES, default="proposed")
    p.add_argument("--split-layers", type=_int_list, default=DEFAULT_SPLIT_LAYERS)
    p.add_argument("--lift-layer", type=int, default=DEFAULT_LIFT_LAYER)
    p.add_argument("--oer-target", type=float, default=OER_TARGET)
    p.add_argument("--max-swaps", type=int, default=None)
    p.add_argument("--bboxes", type=_int_list, default=(15, 30, 45))
    p.add_argument("--utilization", type=float, default=0.6)
    p.add_argument("--budget", type=float, default=None)

    p = cmd("compare", cmd_compare, "tabulate reports of one benchmark with percent deltas")
    p.add_argument("reports", nargs="+")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        args.func(args)
    except (ConfigError, _InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE
    except Exception as e:  # noqa: BLE001 - any other failure is a stage failure
        print(f"error: {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
