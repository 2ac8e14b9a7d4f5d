"""Command-line interface.

Subcommands: ingest, explain, metrics, faithfulness, report, run.
Exit codes: 0 success, 1 validation/usage error, 2 runtime or transport
error.  The seed resolution order is config file < CLI flag < the
RATIONEVAL_SEED environment variable.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from pathlib import Path

from .corpus import aggregate_rationales, corpus_stats, parse_dataset, serialize_dataset
from .errors import (
    ConfigError,
    DomainError,
    EmptyInputError,
    MissingAnnotationError,
    ParseError,
    RationevalError,
    ValidationError,
)
from .explainers import ExplainerConfig, Explanation, explain
from .faithfulness import faithfulness_accuracy
from .harness import (
    DEFAULT_EPSILON_GRIDS,
    RunConfig,
    build_summaries,
    instance_seed,
    read_metrics_csv,
    run_matrix,
)
from .metrics import score_explanation
from .model import open_model
from .text import PerturbationStrategy, load_pos_lexicon

VALIDATION_ERRORS = (
    ParseError,
    ValidationError,
    ConfigError,
    DomainError,
    MissingAnnotationError,
    EmptyInputError,
    ValueError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _strategy_from_args(args) -> PerturbationStrategy:
    lexicon = load_pos_lexicon(args.pos_lexicon) if args.pos_lexicon else None
    return PerturbationStrategy(
        kind=args.strategy, unk_token=args.unk_token, pos_lexicon=lexicon
    )


def _dataset_format(args) -> str:
    if args.format:
        return args.format
    return "tsv" if Path(args.data).suffix.lower() == ".tsv" else "jsonl"


def _resolve_seed(cli_seed: int | None, config_seed: int = 0) -> int:
    seed = config_seed if cli_seed is None else cli_seed
    env = os.environ.get("RATIONEVAL_SEED")
    if env is not None:
        seed = int(env)
    return seed


def cmd_ingest(args) -> int:
    instances = parse_dataset(Path(args.data), format=_dataset_format(args), lenient=args.lenient)
    print(f"parsed {len(instances)} instances from {args.data}")
    if args.stats:
        print(corpus_stats(instances).render())
    if args.out:
        Path(args.out).write_bytes(serialize_dataset(instances))
        print(f"wrote canonical JSONL to {args.out}")
    return 0


def cmd_explain(args) -> int:
    instances = parse_dataset(Path(args.data), format=_dataset_format(args), lenient=args.lenient)
    if args.ids:
        wanted = set(_names(args.ids))
        missing = wanted - {i.id for i in instances}
        if missing:
            raise ValidationError(f"unknown instance ids: {sorted(missing)}")
        instances = [i for i in instances if i.id in wanted]
    seed = _resolve_seed(args.seed)
    ecfg = ExplainerConfig(num_samples=args.samples, seed=seed)
    strategy = _strategy_from_args(args)
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        with open_model(args.model) as model:
            for inst in instances:
                icfg = ecfg.with_seed(instance_seed(seed, inst.id))
                expl = explain(args.explainer, model, inst, icfg, strategy=strategy)
                out.write(json.dumps(expl.to_json(), ensure_ascii=False) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _load_explanations(path: str) -> list[Explanation]:
    out = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if raw.strip():
            out.append(Explanation.from_json(json.loads(raw)))
    return out


def cmd_metrics(args) -> int:
    from .harness import write_metrics_csv, metrics_row

    instances = {i.id: i for i in parse_dataset(Path(args.data), format=_dataset_format(args))}
    explanations = _load_explanations(args.explanations)
    rows = []
    skipped = 0
    for expl in explanations:
        inst = instances.get(expl.instance_id)
        if inst is None:
            raise ValidationError(f"explanation for unknown instance {expl.instance_id!r}")
        if inst.difficulty == 4 and not args.include_difficulty4:
            skipped += 1
            continue
        for mode in _names(args.modes):
            rationale = aggregate_rationales(inst, mode)
            record = score_explanation(expl, rationale, inst, norm=args.norm)
            rows.append(metrics_row(inst, args.model_name, expl, record))
    write_metrics_csv(rows, Path(args.out))
    print(f"wrote {len(rows)} metric rows to {args.out} ({skipped} difficulty-4 skipped)")
    return 0


def cmd_faithfulness(args) -> int:
    import csv as _csv

    instances = {i.id: i for i in parse_dataset(Path(args.data), format=_dataset_format(args))}
    explanations = _load_explanations(args.explanations)
    pairs = []
    for expl in explanations:
        inst = instances.get(expl.instance_id)
        if inst is None:
            raise ValidationError(f"explanation for unknown instance {expl.instance_id!r}")
        pairs.append((inst, expl))
    if not pairs:
        raise ValidationError("no explanations to evaluate")
    explainer = pairs[0][1].explainer
    grid = _floats(args.epsilons) if args.epsilons else [0.0]
    if explainer == "anchors":
        grid = [0.0]
    with open_model(args.model) as model:
        records = [faithfulness_accuracy(model, pairs, eps, args.reference) for eps in grid]
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["model", "explainer", "epsilon", "accuracy_on_rationales",
             "baseline_accuracy", "delta", "num_instances", "num_empty_rationales"]
        )
        for rec in records:
            writer.writerow(
                [rec.model, rec.explainer,
                 "" if rec.epsilon is None else repr(rec.epsilon),
                 repr(rec.accuracy_on_rationales), repr(rec.baseline_accuracy),
                 repr(rec.delta), rec.num_instances, rec.num_empty_rationales]
            )
    print(f"wrote {len(records)} faithfulness rows to {args.out}")
    return 0


def cmd_report(args) -> int:
    rows = read_metrics_csv(Path(args.metrics))
    summaries = build_summaries(rows)
    payload = json.dumps(summaries, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"wrote summaries to {args.out}")
    else:
        sys.stdout.write(payload)
    return 0


def _run_config_from_file(path: Path) -> dict:
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    cfg: dict = {}
    if parser.has_section("run"):
        run = parser["run"]
        if "dataset" in run:
            cfg["dataset"] = run["dataset"]
        if "format" in run:
            cfg["dataset_format"] = run["format"]
        if "models" in run:
            cfg["models"] = _names(run["models"])
        if "explainers" in run:
            cfg["explainers"] = _names(run["explainers"])
        if "output" in run:
            cfg["output_dir"] = run["output"]
        if "seed" in run:
            cfg["seed"] = run.getint("seed")
        if "parallelism" in run:
            cfg["parallelism"] = run.getint("parallelism")
        if "aggregation_modes" in run:
            cfg["aggregation_modes"] = _names(run["aggregation_modes"])
        if "difficulty_filter" in run:
            cfg["difficulty_filter"] = [int(x) for x in _names(run["difficulty_filter"])]
        if "include_difficulty4" in run:
            cfg["include_difficulty4"] = run.getboolean("include_difficulty4")
        if "weight_norm" in run:
            cfg["weight_norm"] = run["weight_norm"]
        if "lenient" in run:
            cfg["lenient"] = run.getboolean("lenient")
        if "reference" in run:
            cfg["reference"] = run["reference"]
    if parser.has_section("explainer"):
        sec = parser["explainer"]
        kwargs = {}
        for key in ("num_samples", "shap_exact_threshold", "beam_width",
                    "anchor_budget", "seed"):
            if key in sec:
                kwargs[key] = sec.getint(key)
        for key in ("kernel_width_sigma", "ridge_lambda", "anchor_tau", "anchor_delta"):
            if key in sec:
                kwargs[key] = sec.getfloat(key)
        cfg["explainer_kwargs"] = kwargs
    if parser.has_section("epsilons"):
        cfg["epsilon_grids"] = {
            name: _floats(value) for name, value in parser["epsilons"].items()
        }
    if parser.has_section("perturbation"):
        sec = parser["perturbation"]
        if "kind" in sec:
            cfg["perturbation_kind"] = sec["kind"]
        if "unk_token" in sec:
            cfg["unk_token"] = sec["unk_token"]
        if "pos_lexicon" in sec:
            cfg["pos_lexicon"] = sec["pos_lexicon"]
    return cfg


def cmd_run(args) -> int:
    file_cfg = _run_config_from_file(Path(args.config)) if args.config else {}
    explainer_kwargs = file_cfg.pop("explainer_kwargs", {})

    if args.data:
        file_cfg["dataset"] = args.data
    if args.model:
        file_cfg["models"] = list(args.model)
    if args.out:
        file_cfg["output_dir"] = args.out
    if args.explainers:
        file_cfg["explainers"] = _names(args.explainers)
    if args.parallelism is not None:
        file_cfg["parallelism"] = args.parallelism
    if args.samples is not None:
        explainer_kwargs["num_samples"] = args.samples
    if args.include_difficulty4:
        file_cfg["include_difficulty4"] = True

    seed = _resolve_seed(args.seed, file_cfg.pop("seed", 0))
    file_cfg["seed"] = seed
    explainer_kwargs["seed"] = seed
    file_cfg["explainer"] = ExplainerConfig(**explainer_kwargs)

    missing = [k for k in ("dataset", "models", "output_dir") if k not in file_cfg]
    if missing:
        raise ConfigError(f"missing run configuration: {', '.join(missing)}")

    manifest = run_matrix(RunConfig(**file_cfg))
    print(f"run complete: {manifest['metrics_rows']} metric rows, "
          f"{len(manifest['cells'])} cells, outputs in {file_cfg['output_dir']}")
    return 0


def _add_data_args(p: _Parser):
    p.add_argument("--data", required=True, help="dataset path (JSONL or TSV)")
    p.add_argument("--format", choices=["tsv", "jsonl"], default=None,
                   help="dataset format (default: by file suffix)")
    p.add_argument("--lenient", action="store_true",
                   help="downgrade unknown-rationale-word errors to warnings")


def _add_strategy_args(p: _Parser):
    p.add_argument("--strategy", choices=["drop", "unk_replace", "pos_preserving"],
                   default="unk_replace")
    p.add_argument("--unk-token", dest="unk_token", default="UNK")
    p.add_argument("--pos-lexicon", dest="pos_lexicon", default=None,
                   help="POS lexicon file (#TAG sections, one word per line)")


def build_parser() -> _Parser:
    parser = _Parser(prog="rationeval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[], help="validate a dataset, print stats")
    _add_data_args(p)
    p.add_argument("--stats", action="store_true", help="print per-difficulty statistics")
    p.add_argument("--out", default=None, help="write canonical JSONL here")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("explain", help="produce explanations as JSONL")
    _add_data_args(p)
    _add_strategy_args(p)
    p.add_argument("--model", required=True,
                   help="builtin-nb:<train.jsonl> | cmd:<command> | http:<url>")
    p.add_argument("--explainer", required=True, choices=["lime", "shap", "anchors"])
    p.add_argument("--ids", default=None, help="comma-separated instance ids")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("metrics", help="score explanations against rationales")
    _add_data_args(p)
    p.add_argument("--explanations", required=True)
    p.add_argument("--modes", default="union,intersection")
    p.add_argument("--norm", choices=["max", "none"], default="max")
    p.add_argument("--include-difficulty4", action="store_true")
    p.add_argument("--model-name", default="-", help="model column value for the CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("faithfulness", help="rationale-only accuracy sweep")
    _add_data_args(p)
    p.add_argument("--explanations", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--epsilons", default="0.1,0.2,0.3")
    p.add_argument("--reference", choices=["gold", "model"], default="gold")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_faithfulness)

    p = sub.add_parser("report", help="summaries from a metrics CSV")
    p.add_argument("--metrics", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("run", help="full evaluation matrix")
    p.add_argument("--config", default=None, help="INI-style config file")
    p.add_argument("--data", default=None)
    p.add_argument("--model", action="append", default=None,
                   help="model spec (repeatable)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--explainers", default=None, help="comma-separated explainer names")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--parallelism", type=int, default=None)
    p.add_argument("--include-difficulty4", action="store_true",
                   help="score difficulty-4 instances in plausibility too")
    p.set_defaults(fn=cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RationevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
