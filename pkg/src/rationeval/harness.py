"""Evaluation-matrix orchestration and report emission.

Runs (model x explainer) over a corpus, computing each explanation once
and reusing it for plausibility metrics and the faithfulness sweep, then
writes deterministic artifacts: explanations JSONL per cell, a long-form
metrics CSV, a faithfulness table with one row per model, distribution
summaries, and a run manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .corpus import (
    AGGREGATION_MODES,
    Instance,
    aggregate_rationales,
    parse_dataset,
)
from .errors import ConfigError, MissingAnnotationError, RationevalError
from .explainers import EXPLAINER_NAMES, ExplainerConfig, Explanation, explain
from .faithfulness import faithfulness_accuracy
from .metrics import MetricsRecord, score_explanation
from .model import ModelHandle, open_model
from .text import PerturbationStrategy, load_pos_lexicon

DEFAULT_EPSILON_GRIDS: dict[str, list[float]] = {
    "lime": [0.1, 0.2, 0.3],
    "anchors": [],
    "shap": [0.1, 0.2, 0.3, 0.5],
}

METRIC_FIELDS = ("precision", "recall", "fallout", "precision_w", "recall_w", "fallout_w")

METRICS_CSV_COLUMNS = (
    "instance_id",
    "model",
    "explainer",
    "mode",
    "difficulty",
    *METRIC_FIELDS,
    "size_e",
    "size_l",
    "size_s",
    "size_l_and_e",
)


@dataclass
class RunConfig:
    dataset: Path
    models: list[str]
    output_dir: Path
    dataset_format: str | None = None  # inferred from suffix when None
    explainers: list[str] = field(default_factory=lambda: list(EXPLAINER_NAMES))
    explainer: ExplainerConfig = field(default_factory=ExplainerConfig)
    epsilon_grids: dict[str, list[float]] = field(
        default_factory=lambda: {k: list(v) for k, v in DEFAULT_EPSILON_GRIDS.items()}
    )
    aggregation_modes: list[str] = field(default_factory=lambda: list(AGGREGATION_MODES))
    difficulty_filter: list[int] | None = None
    include_difficulty4: bool = False
    weight_norm: str = "max"
    perturbation_kind: str = "unk_replace"
    unk_token: str = "UNK"
    pos_lexicon: Path | None = None
    seed: int = 0
    parallelism: int = 1
    lenient: bool = False
    reference: str = "gold"

    def __post_init__(self):
        self.dataset = Path(self.dataset)
        self.output_dir = Path(self.output_dir)
        if self.pos_lexicon is not None:
            self.pos_lexicon = Path(self.pos_lexicon)
        if not self.models:
            raise ConfigError("at least one model spec is required")
        for name in self.explainers:
            if name not in EXPLAINER_NAMES:
                raise ConfigError(f"unknown explainer {name!r}")
        if self.epsilon_grids.get("anchors"):
            raise ConfigError("the epsilon grid for anchors must be empty")
        for mode in self.aggregation_modes:
            if mode not in AGGREGATION_MODES:
                raise ConfigError(f"unknown aggregation mode {mode!r}")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")

    @property
    def format(self) -> str:
        if self.dataset_format:
            return self.dataset_format
        return "tsv" if self.dataset.suffix.lower() == ".tsv" else "jsonl"

    def strategy(self) -> PerturbationStrategy:
        lexicon = load_pos_lexicon(self.pos_lexicon) if self.pos_lexicon else None
        return PerturbationStrategy(
            kind=self.perturbation_kind, unk_token=self.unk_token, pos_lexicon=lexicon
        )

    def canonical(self, dataset_digest: str) -> dict:
        """Everything that determines the outputs; excludes output paths and
        parallelism, which must not affect results."""
        return {
            "dataset_sha256": dataset_digest,
            "dataset_format": self.format,
            "models": list(self.models),
            "explainers": list(self.explainers),
            "explainer_config": asdict(self.explainer),
            "epsilon_grids": {k: list(v) for k, v in sorted(self.epsilon_grids.items())},
            "aggregation_modes": list(self.aggregation_modes),
            "difficulty_filter": self.difficulty_filter,
            "include_difficulty4": self.include_difficulty4,
            "weight_norm": self.weight_norm,
            "perturbation": {
                "kind": self.perturbation_kind,
                "unk_token": self.unk_token,
                "pos_lexicon": str(self.pos_lexicon) if self.pos_lexicon else None,
            },
            "seed": self.seed,
            "lenient": self.lenient,
            "reference": self.reference,
        }


def instance_seed(global_seed: int, instance_id: str) -> int:
    """Stable per-instance seed so scheduling cannot perturb results."""
    digest = hashlib.sha256(f"{global_seed}:{instance_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def sanitize_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_metrics_csv(rows: Iterable[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in METRICS_CSV_COLUMNS])


def faithfulness_columns(explainers: Sequence[str], grids: dict[str, list[float]]) -> list[str]:
    cols = []
    for name in explainers:
        grid = grids.get(name, DEFAULT_EPSILON_GRIDS.get(name, []))
        if grid:
            cols.extend(f"{name}_eps{eps:g}" for eps in grid)
        else:
            cols.append(name)
    return cols


def write_faithfulness_csv(
    table: dict[str, dict[str, float]],
    explainers: Sequence[str],
    grids: dict[str, list[float]],
    path: Path,
) -> None:
    """One row per model: baseline accuracy, then explainer x epsilon columns."""
    cols = faithfulness_columns(explainers, grids)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "baseline"] + cols)
        for model_name in table:
            row = table[model_name]
            writer.writerow(
                [model_name, _fmt(row.get("baseline"))] + [_fmt(row.get(c)) for c in cols]
            )


@dataclass(frozen=True)
class GroupSummary:
    key: dict
    count: int
    metrics: dict
    skipped: dict

    def to_json(self) -> dict:
        return {"key": self.key, "count": self.count, "metrics": self.metrics,
                "skipped": self.skipped}


def summarize(
    records: Sequence[dict],
    group_by: Sequence[str],
    value_fields: Sequence[str] = METRIC_FIELDS,
) -> list[GroupSummary]:
    """Deterministic five-number summaries per group, skipping UNDEFINED."""
    groups: dict[tuple, list[dict]] = {}
    for rec in records:
        key = tuple(rec.get(k) for k in group_by)
        groups.setdefault(key, []).append(rec)

    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        rows = groups[key]
        metrics: dict[str, dict] = {}
        skipped: dict[str, int] = {}
        for fieldname in value_fields:
            values = [r[fieldname] for r in rows if r.get(fieldname) is not None]
            skipped[fieldname] = len(rows) - len(values)
            if values:
                arr = np.asarray(values, dtype=np.float64)
                q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
                metrics[fieldname] = {
                    "min": float(q[0]),
                    "q1": float(q[1]),
                    "median": float(q[2]),
                    "q3": float(q[3]),
                    "max": float(q[4]),
                    "mean": float(arr.mean()),
                    "count": int(arr.size),
                }
            else:
                metrics[fieldname] = {
                    "min": None, "q1": None, "median": None, "q3": None,
                    "max": None, "mean": None, "count": 0,
                }
        out.append(
            GroupSummary(
                key=dict(zip(group_by, key)), count=len(rows), metrics=metrics, skipped=skipped
            )
        )
    return out


SUMMARY_GROUPINGS: dict[str, tuple[str, ...]] = {
    # explainer-centric pooled view and per-model / per-difficulty strata
    "by_explainer_mode": ("explainer", "mode"),
    "by_model_explainer_mode": ("model", "explainer", "mode"),
    "by_explainer_mode_difficulty": ("explainer", "mode", "difficulty"),
    "by_model_mode": ("model", "mode"),
    "full": ("model", "explainer", "mode", "difficulty"),
}


def build_summaries(metrics_rows: Sequence[dict]) -> dict:
    return {
        name: [g.to_json() for g in summarize(metrics_rows, list(keys))]
        for name, keys in SUMMARY_GROUPINGS.items()
    }


def _explain_cell(
    model: ModelHandle,
    instances: Sequence[Instance],
    explainer_name: str,
    cfg: RunConfig,
    strategy: PerturbationStrategy,
) -> tuple[list[tuple[Instance, Explanation]], list[dict]]:
    """Explanations for one (model, explainer) cell, instance-parallel."""

    def work(inst: Instance):
        ecfg = cfg.explainer.with_seed(instance_seed(cfg.seed, inst.id))
        try:
            return inst, explain(explainer_name, model, inst, ecfg, strategy=strategy), None
        except RationevalError as exc:
            return inst, None, f"{type(exc).__name__}: {exc}"

    if cfg.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            results = list(pool.map(work, instances))
    else:
        results = [work(inst) for inst in instances]

    pairs = [(inst, expl) for inst, expl, err in results if expl is not None]
    errors = [
        {"instance_id": inst.id, "error": err} for inst, _, err in results if err is not None
    ]
    return pairs, errors


def run_matrix(cfg: RunConfig) -> dict:
    """Run the full (model x explainer x epsilon x mode) matrix; returns the manifest."""
    started = time.perf_counter()
    dataset_bytes = Path(cfg.dataset).read_bytes()
    dataset_digest = hashlib.sha256(dataset_bytes).hexdigest()
    instances = parse_dataset(dataset_bytes, format=cfg.format, lenient=cfg.lenient)
    if cfg.difficulty_filter:
        instances = [i for i in instances if i.difficulty in cfg.difficulty_filter]

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    strategy = cfg.strategy()

    canonical = cfg.canonical(dataset_digest)
    config_hash = hashlib.sha256(
        json.dumps(canonical, sort_keys=True).encode("utf-8")
    ).hexdigest()

    plaus_instances = [
        i for i in instances if cfg.include_difficulty4 or i.difficulty != 4
    ]
    rationales = {
        mode: {} for mode in cfg.aggregation_modes
    }  # mode -> instance_id -> RationaleSet
    annotation_skips: list[dict] = []
    for inst in plaus_instances:
        for mode in cfg.aggregation_modes:
            try:
                rationales[mode][inst.id] = aggregate_rationales(inst, mode)
            except MissingAnnotationError as exc:
                annotation_skips.append({"instance_id": inst.id, "error": str(exc)})

    metrics_rows: list[dict] = []
    faith_table: dict[str, dict[str, float]] = {}
    cells = []
    files: list[str] = []

    # every handshake must succeed before any computation starts
    models = []
    try:
        for model_spec in cfg.models:
            models.append(open_model(model_spec))
    except Exception:
        for model in models:
            model.close()
        raise

    for model in models:
        model_key = sanitize_name(model.name)
        faith_row: dict[str, float] = {}
        try:
            # model-level baseline over every instance, independent of any
            # explainer's per-instance failures; in fidelity mode the full
            # sentences agree with themselves by definition
            if cfg.reference == "gold":
                full_texts = [" ".join(t.surface for t in inst.tokens) for inst in instances]
                full_probs = model.predict_batch(full_texts)
                faith_row["baseline"] = sum(
                    1
                    for p, inst in zip(full_probs, instances)
                    if (1 if p >= 0.5 else 0) == inst.gold_label
                ) / len(instances)
            else:
                faith_row["baseline"] = 1.0
            for explainer_name in cfg.explainers:
                cell_start = time.perf_counter()
                pairs, errors = _explain_cell(model, instances, explainer_name, cfg, strategy)

                expl_file = cfg.output_dir / f"explanations-{model_key}-{explainer_name}.jsonl"
                with open(expl_file, "w", encoding="utf-8", newline="\n") as fh:
                    for _, expl in pairs:
                        fh.write(json.dumps(expl.to_json(), ensure_ascii=False) + "\n")
                files.append(expl_file.name)

                by_id = {inst.id: (inst, expl) for inst, expl in pairs}
                for inst in plaus_instances:
                    if inst.id not in by_id:
                        continue
                    _, expl = by_id[inst.id]
                    for mode in cfg.aggregation_modes:
                        rat = rationales[mode].get(inst.id)
                        if rat is None:
                            continue
                        record = score_explanation(expl, rat, inst, norm=cfg.weight_norm)
                        metrics_rows.append(metrics_row(inst, model.name, expl, record))

                grid = cfg.epsilon_grids.get(
                    explainer_name, DEFAULT_EPSILON_GRIDS[explainer_name]
                )
                if pairs:
                    if grid:
                        for eps in grid:
                            rec = faithfulness_accuracy(model, pairs, eps, cfg.reference)
                            faith_row[f"{explainer_name}_eps{eps:g}"] = rec.accuracy_on_rationales
                    else:
                        rec = faithfulness_accuracy(model, pairs, 0.0, cfg.reference)
                        faith_row[explainer_name] = rec.accuracy_on_rationales

                cells.append(
                    {
                        "model": model.name,
                        "explainer": explainer_name,
                        "instances": len(pairs),
                        "errors": errors,
                        "explanations_file": expl_file.name,
                        "seconds": round(time.perf_counter() - cell_start, 3),
                    }
                )
        finally:
            model.close()
        faith_table[model.name] = faith_row

    write_metrics_csv(metrics_rows, cfg.output_dir / "metrics.csv")
    files.append("metrics.csv")
    write_faithfulness_csv(
        faith_table, cfg.explainers, cfg.epsilon_grids, cfg.output_dir / "faithfulness.csv"
    )
    files.append("faithfulness.csv")

    summaries = build_summaries(metrics_rows)
    with open(cfg.output_dir / "summaries.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summaries, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append("summaries.json")

    manifest = {
        "created": datetime.now(timezone.utc).isoformat(),
        "config": canonical,
        "config_hash": config_hash,
        "seed": cfg.seed,
        "kernel_backend": _kernels.BACKEND,
        "dataset": {
            "path": str(cfg.dataset),
            "sha256": dataset_digest,
            "instances": len(instances),
            "plausibility_eligible": len(plaus_instances),
            "difficulty4_excluded": len(instances) - len(plaus_instances),
            "missing_annotations": annotation_skips,
        },
        "cells": cells,
        "metrics_rows": len(metrics_rows),
        "files": files,
        "seconds": round(time.perf_counter() - started, 3),
    }
    with open(cfg.output_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def metrics_row(
    inst: Instance, model_name: str, expl: Explanation, record: MetricsRecord
) -> dict:
    return {
        "instance_id": inst.id,
        "model": model_name,
        "explainer": expl.explainer,
        "mode": record.aggregation_mode,
        "difficulty": inst.difficulty,
        "precision": record.precision,
        "recall": record.recall,
        "fallout": record.fallout,
        "precision_w": record.precision_w,
        "recall_w": record.recall_w,
        "fallout_w": record.fallout_w,
        "size_e": record.size_e,
        "size_l": record.size_l,
        "size_s": record.size_s,
        "size_l_and_e": record.size_l_and_e,
    }


def read_metrics_csv(path: Path) -> list[dict]:
    """Read back a metrics CSV, restoring None for empty cells."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for raw in csv.DictReader(fh):
            row: dict = dict(raw)
            for col in METRIC_FIELDS:
                row[col] = float(raw[col]) if raw.get(col) else None
            for col in ("size_e", "size_l", "size_s", "size_l_and_e", "difficulty"):
                if raw.get(col):
                    row[col] = int(raw[col])
            rows.append(row)
    return rows
