"""Experiment configuration, the end-to-end pipeline, and report comparison."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__
from .attack import (DEFAULT_BBOXES, crouting_attack, proximity_attack, score_ccr,
                     score_crouting)
from .defense import DEFAULT_LIFT_LAYER, naive_lift, protect
from .netlist import Netlist, parse_bench, read_bench, write_bench
from .physical import distance_stats, layer_stats, place, route, split_with_truth, write_layout
from .physical.layout import NUM_LAYERS
from .physical.stats import net_connections
from .sim import DEFAULT_PATTERNS, OER_TARGET, PatternSet, score
from .synth import synthesize

MODES = ("original", "naive-lift", "proposed")
DEFAULT_SPLIT_LAYERS = (3, 4, 5)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class ExperimentConfig:
    """One pipeline run.

    ``benchmark`` is a ``.bench`` path, the name of a bundled ISCAS-85
    circuit (``c432``), or ``synth:GATES[:SEED[:RENT]]`` for a generated
    design.  ``out`` is where artifacts go; it does not affect results and
    is left out of the config hash.
    """

    benchmark: str
    seed: int = 0
    mode: str = "proposed"
    split_layers: tuple[int, ...] = DEFAULT_SPLIT_LAYERS
    lift_layer: int = DEFAULT_LIFT_LAYER
    oer_target: float = OER_TARGET
    max_swaps: int | None = None
    patterns: int = DEFAULT_PATTERNS
    bboxes: tuple[int, ...] = DEFAULT_BBOXES
    utilization: float = 0.6
    budget: float | None = None
    out: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "split_layers", tuple(int(k) for k in self.split_layers))
        object.__setattr__(self, "bboxes", tuple(int(b) for b in self.bboxes))
        self.validate()

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, not {self.mode!r}")
        if not self.split_layers:
            raise ConfigError("need at least one split layer")
        if any(not 1 <= k < NUM_LAYERS for k in self.split_layers):
            raise ConfigError(f"split layers must lie in 1..{NUM_LAYERS - 1}")
        if len(set(self.split_layers)) != len(self.split_layers):
            raise ConfigError("split layers must be distinct")
        if not self.lift_layer <= NUM_LAYERS:
            raise ConfigError(f"lift layer must be at most {NUM_LAYERS}")
        if self.lift_layer <= max(self.split_layers):
            raise ConfigError("lift layer must lie above every split layer")
        if not 0 < self.oer_target <= 1:
            raise ConfigError("oer_target must lie in (0, 1]")
        if self.max_swaps is not None and self.max_swaps < 0:
            raise ConfigError("max_swaps must be non-negative")
        if self.patterns < 1:
            raise ConfigError("need at least one pattern")
        if not self.bboxes or any(b < 0 for b in self.bboxes):
            raise ConfigError("bounding boxes must be a non-empty list of non-negative sizes")
        if not 0 < self.utilization <= 1:
            raise ConfigError("utilization must lie in (0, 1]")
        if self.budget is not None and self.budget < 0:
            raise ConfigError("budget must be non-negative")
        if not self.benchmark:
            raise ConfigError("no benchmark given")

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d["split_layers"] = list(self.split_layers)
        d["bboxes"] = list(self.bboxes)
        return d

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @classmethod
    def from_json(cls, d: dict, out: str | None = None) -> ExperimentConfig:
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__ and k != "out"}
        unknown = sorted(set(d) - set(known) - {"out"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**known, out=out if out is not None else d.get("out"))
        except TypeError as e:
            raise ConfigError(str(e)) from e


def load_benchmark(spec: str) -> Netlist:
    """Resolve a benchmark spec (see :class:`ExperimentConfig`) to a netlist."""
    if spec.startswith("synth:"):
        parts = spec.split(":")[1:]
        try:
            gates = int(parts[0])
            seed = int(parts[1]) if len(parts) > 1 else 0
            rent = float(parts[2]) if len(parts) > 2 else 0.6
        except (ValueError, IndexError) as e:
            raise ConfigError(f"bad synthetic spec {spec!r}") from e
        if len(parts) > 3:
            raise ConfigError(f"bad synthetic spec {spec!r}")
        try:
            return synthesize(gates, rent=rent, seed=seed)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    path = Path(spec)
    if path.is_file():
        return read_bench(path)
    bundled = resources.files("splitguard.benchmarks").joinpath(spec + ".bench")
    if bundled.is_file():
        return parse_bench(bundled.read_text(encoding="utf-8"), spec)
    raise ConfigError(f"no benchmark file or bundled circuit named {spec!r}")


def _round(value):
    if isinstance(value, float):
        return value if math.isinf(value) or math.isnan(value) else round(value, 4)
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def _mean(values):
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def average_rows(rows: list[dict]) -> dict:
    """Field-wise arithmetic mean of per-layer rows; ``None`` entries are skipped."""
    out: dict = {}
    for key in rows[0]:
        vals = [r[key] for r in rows]
        if key == "layer":
            continue
        if all(v == vals[0] for v in vals):
            out[key] = vals[0]
        elif isinstance(vals[0], dict):
            out[key] = average_rows(vals)
        elif all(v is None or isinstance(v, (int, float)) and not isinstance(v, bool)
                 for v in vals):
            out[key] = _mean(vals)
        else:
            out[key] = vals[0]
    return out


@dataclass(frozen=True)
class MetricsReport:
    data: dict

    @property
    def benchmark(self) -> str:
        return self.data["benchmark"]

    @property
    def average(self) -> dict:
        return self.data["average"]

    @property
    def layers(self) -> list[dict]:
        return self.data["layers"]

    def to_json(self) -> str:
        return json.dumps(_round(self.data), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> MetricsReport:
        return cls(json.loads(text))


class _Artifacts:
    def __init__(self, out: str | None):
        self.root = Path(out) if out else None
        if self.root:
            self.root.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.root:
            (self.root / name).write_text(text, encoding="utf-8")


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (ConfigError, StageError):
        raise
    except Exception as e:  # noqa: BLE001 - re-raised with the stage attached
        raise StageError(name, e) from e


def run_pipeline(cfg: ExperimentConfig) -> MetricsReport:
    """Run one configuration end to end and write its artifacts under ``cfg.out``.

    The attacker stages only ever see the split view; the ledger and the
    hidden truth reach the scorer alone.
    """
    cfg.validate()
    art = _Artifacts(cfg.out)
    n = load_benchmark(cfg.benchmark)
    art.write("original.bench", write_bench(n))

    p0 = _stage("place", place, n, utilization=cfg.utilization, seed=cfg.seed)
    base = _stage("route", route, p0, n)
    baseline_wl = layer_stats(base).total_wirelength
    design: dict = {"gates": len(n.gates), "inputs": len(n.inputs), "outputs": len(n.outputs),
                    "baseline_wirelength": baseline_wl}

    ledger = None
    if cfg.mode == "original":
        placement, layout = p0, base
    else:
        prot = _stage("protect", protect, n, seed=cfg.seed, lift_layer=cfg.lift_layer,
                      oer_target=cfg.oer_target, num_patterns=cfg.patterns,
                      max_swaps=cfg.max_swaps, utilization=cfg.utilization, budget=cfg.budget,
                      baseline_wirelength=baseline_wl)
        ledger = prot.ledger
        design.update(swaps=len(ledger.entries), rounds=prot.rounds,
                      oer_randomized=ledger.oer_achieved, oer_target_reached=ledger.reached_target,
                      lifted_nets=len(set(ledger.randomized_nets)))
        art.write("randomized.bench", write_bench(prot.randomized))
        art.write("ledger.json", ledger.to_json())
        if cfg.mode == "proposed":
            placement, layout = prot.placement, prot.restored
            art.write("layout_erroneous.txt", write_layout(prot.erroneous))
        else:
            plan = _stage("lift", naive_lift, n, ledger.randomized_nets, cfg.lift_layer)
            placement = p0
            layout = _stage("route", route, p0, n, **plan.route_args())
    art.write("placement.txt", placement.to_text())
    art.write("layout.txt", write_layout(layout))

    stats = layer_stats(layout)
    overhead = stats.total_wirelength / baseline_wl - 1 if baseline_wl else 0.0
    dist_all = distance_stats(placement, net_connections(n)).to_json()
    dist_prot = dist_prot_orig = None
    if ledger is not None and ledger.entries:
        moved = ledger.moved_connections()
        dist_prot = distance_stats(placement, moved).to_json()
        dist_prot_orig = distance_stats(p0, moved).to_json()
    scored_nets = None if ledger is None else ledger.randomized_nets
    patterns = PatternSet.for_budget(n.inputs, cfg.patterns, cfg.seed)

    rows = []
    for k in cfg.split_layers:
        view, truth = _stage("split", split_with_truth, layout, k)
        art.write(f"view_M{k}.txt", view.to_text())
        result = _stage("attack proximity", proximity_attack, view)
        crouting = _stage("attack crouting", crouting_attack, view, cfg.bboxes)
        art.write(f"attack_M{k}.json", result.to_json())
        art.write(f"recovered_M{k}.bench", write_bench(result.netlist))
        ccr = _stage("score", score_ccr, result, view, truth, scored_nets)
        func = _stage("score", score, n, result.netlist, patterns)
        crouting = _stage("score", score_crouting, crouting, view, truth)
        art.write(f"crouting_M{k}.json", crouting.to_json())
        rows.append({
            "layer": k,
            "ccr": ccr.per_net,
            "ccr_per_sink": ccr.per_sink,
            "scored_nets": ccr.num_nets,
            "oer": func.oer,
            "hd": func.hd,
            "num_vpins": len(view.vpins),
            "num_sink_vpins": crouting.num_sink_vpins,
            "expected_list_size": {str(r.bbox): r.expected_list_size for r in crouting.rows},
            "match_in_list": {str(r.bbox): r.match_in_list for r in crouting.rows},
            "vias_above_split": stats.vias_above(k),
            "wirelength_above_split": stats.wirelength_above(k),
            "distance": dist_all,
            "distance_protected": dist_prot,
            "distance_protected_original": dist_prot_orig,
            "layer_stats": stats.to_json(),
            "wirelength_overhead": overhead,
            "seed": cfg.seed,
        })
    data = {
        "tool": "splitguard",
        "version": __version__,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "benchmark": n.name,
        "mode": cfg.mode,
        "config": cfg.to_json(),
        "design": design,
        "layers": rows,
        "average": average_rows(rows),
    }
    report = MetricsReport(_round(data))
    art.write("report.json", report.to_json())
    return report


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def compare(reports: list[MetricsReport]) -> str:
    """CSV of the averaged metrics side by side, with percent change against the first report.

    A delta is empty when the reference value is zero or missing.
    """
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    names = {r.benchmark for r in reports}
    if len(names) != 1:
        raise ValueError(f"reports cover different benchmarks: {', '.join(sorted(names))}")
    flat = [_flatten(r.average) for r in reports]
    labels = [f"{r.data['mode']}@{r.data['seed']}" for r in reports]
    keys = [k for k in flat[0] if all(isinstance(f.get(k), (int, float, type(None)))
                                      and not isinstance(f.get(k), bool) for f in flat)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["metric"] + labels + [f"delta_pct:{lab}" for lab in labels[1:]]
    w.writerow(header)
    for key in keys:
        vals = [f.get(key) for f in flat]
        ref = vals[0]
        deltas = []
        for v in vals[1:]:
            if ref is None or v is None or ref == 0:
                deltas.append(0.0 if v == ref and v is not None else None)
            else:
                deltas.append(100.0 * (v - ref) / abs(ref))
        w.writerow([key] + [_fmt(v) for v in vals] + [_fmt(d) for d in deltas])
    return buf.getvalue()
