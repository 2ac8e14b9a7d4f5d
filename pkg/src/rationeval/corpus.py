"""Annotated-rationale corpus: parsing, validation, aggregation, statistics.

Rationales are sets of normalized token types (lowercased surface forms),
not positions; duplicates count once.  The canonical on-disk format is
JSONL, with a TSV importer matching the published aggregated layout.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

from .errors import MissingAnnotationError, ParseError, ValidationError
from .text import Token, tokenize

logger = logging.getLogger(__name__)

DIFFICULTIES = (1, 2, 3, 4)
AGGREGATION_MODES = ("union", "intersection")

# JSONL field names, also the canonical serialization order.
_JSON_FIELDS = ("id", "text", "label", "difficulty", "labelers", "union", "intersection")


@dataclass(frozen=True)
class Instance:
    """One corpus sentence with its gold label and rationale annotations."""

    id: str
    text: str
    tokens: tuple[Token, ...]
    gold_label: int
    difficulty: int
    labeler_rationales: tuple[frozenset[str], ...] = ()
    pre_aggregated: tuple[frozenset[str], frozenset[str]] | None = None

    @property
    def token_types(self) -> frozenset[str]:
        return frozenset(t.normalized for t in self.tokens)


@dataclass(frozen=True)
class RationaleSet:
    mode: str  # union | intersection
    words: frozenset[str]


@dataclass(frozen=True)
class StatsBucket:
    sentences: int
    words_per_sentence: float
    union_words: float
    intersection_words: float
    empty_intersections: int


@dataclass(frozen=True)
class StatsReport:
    by_difficulty: dict[int, StatsBucket]
    total: StatsBucket

    def render(self) -> str:
        """Five-row report, one column per difficulty plus the total."""
        diffs = sorted(self.by_difficulty)
        header = ["Difficulty"] + [str(d) for d in diffs] + ["Total"]
        rows = [
            ("Number of Sentences", "sentences", "{:d}"),
            ("Words per sentence", "words_per_sentence", "{:.2f}"),
            ("Words per explanation (union)", "union_words", "{:.2f}"),
            ("Words per explanation (intersection)", "intersection_words", "{:.2f}"),
            ("Number of Empty intersections", "empty_intersections", "{:d}"),
        ]
        lines = ["\t".join(header)]
        for label, attr, fmt in rows:
            cells = [fmt.format(getattr(self.by_difficulty[d], attr)) for d in diffs]
            cells.append(fmt.format(getattr(self.total, attr)))
            lines.append("\t".join([label] + cells))
        return "\n".join(lines)


def _normalize_words(words: Iterable[str]) -> frozenset[str]:
    return frozenset(w.lower() for w in words if w)


def _check_instance(inst: Instance, lenient: bool) -> Instance:
    """Enforce the structural invariants; lenient mode drops unknown words."""
    if inst.gold_label not in (0, 1):
        raise ValidationError(f"instance {inst.id}: gold label must be 0 or 1")
    if inst.difficulty not in DIFFICULTIES:
        raise ValidationError(
            f"instance {inst.id}: difficulty {inst.difficulty} outside {{1,2,3,4}}"
        )
    if not inst.tokens:
        raise ValidationError(f"instance {inst.id}: no tokens")

    types = inst.token_types

    def filter_set(words: frozenset[str], origin: str) -> frozenset[str]:
        unknown = words - types
        if not unknown:
            return words
        if lenient:
            for w in sorted(unknown):
                logger.warning(
                    "instance %s: dropping rationale word %r (%s) not present in sentence",
                    inst.id, w, origin,
                )
            return words - unknown
        raise ValidationError(
            f"instance {inst.id}: rationale word {sorted(unknown)[0]!r} ({origin}) "
            "not present in sentence"
        )

    labelers = tuple(filter_set(s, f"labeler {i}") for i, s in enumerate(inst.labeler_rationales))
    pre = inst.pre_aggregated
    if pre is not None:
        pre = (filter_set(pre[0], "union"), filter_set(pre[1], "intersection"))
        if not pre[1] <= pre[0]:
            raise ValidationError(
                f"instance {inst.id}: intersection rationale is not a subset of the union"
            )

    if inst.difficulty == 4:
        nonempty = any(labelers) or (pre is not None and (pre[0] or pre[1]))
        if nonempty:
            raise ValidationError(
                f"instance {inst.id}: difficulty 4 requires empty rationale sets"
            )

    return Instance(
        id=inst.id,
        text=inst.text,
        tokens=inst.tokens,
        gold_label=inst.gold_label,
        difficulty=inst.difficulty,
        labeler_rationales=labelers,
        pre_aggregated=pre,
    )


def _build_instance(
    *,
    id: str,
    text: str,
    label: int,
    difficulty: int,
    labelers: Sequence[Sequence[str]] | None,
    union: Sequence[str] | None,
    intersection: Sequence[str] | None,
    lenient: bool,
    line: int,
) -> Instance:
    try:
        tokens = tuple(tokenize(text))
    except Exception as exc:
        raise ParseError(f"cannot tokenize sentence: {exc}", line=line) from exc
    labeler_sets = tuple(_normalize_words(s) for s in (labelers or []))
    pre = None
    if union is not None or intersection is not None:
        pre = (_normalize_words(union or []), _normalize_words(intersection or []))
    inst = Instance(
        id=id,
        text=text,
        tokens=tokens,
        gold_label=label,
        difficulty=difficulty,
        labeler_rationales=labeler_sets,
        pre_aggregated=pre,
    )
    return _check_instance(inst, lenient=lenient)


def _split_rationale_field(raw: str) -> list[str]:
    raw = raw.strip()
    if not raw or raw == "-":
        return []
    return raw.split()


def _parse_tsv(lines: list[str], lenient: bool) -> list[Instance]:
    instances = []
    start = 0
    if lines:
        cols = lines[0].rstrip("\n").split("\t")
        # header detection: the label column of a data row is numeric
        if len(cols) >= 2 and not cols[1].strip().lstrip("+-").isdigit():
            start = 1
    row_no = 0
    for ln in range(start, len(lines)):
        raw = lines[ln].rstrip("\n")
        if not raw.strip():
            continue
        row_no += 1
        cols = raw.split("\t")
        if len(cols) < 3:
            raise ParseError(
                f"expected at least 3 tab-separated columns, got {len(cols)}", line=ln + 1
            )
        cols += [""] * (5 - len(cols))
        sentence, label_s, diff_s = cols[0], cols[1].strip(), cols[2].strip()
        try:
            label = int(label_s)
            difficulty = int(diff_s)
        except ValueError as exc:
            raise ParseError(f"non-integer label or difficulty: {exc}", line=ln + 1) from exc
        instances.append(
            _build_instance(
                id=f"s{row_no}",
                text=sentence,
                label=label,
                difficulty=difficulty,
                labelers=None,
                union=_split_rationale_field(cols[3]),
                intersection=_split_rationale_field(cols[4]),
                lenient=lenient,
                line=ln + 1,
            )
        )
    return instances


def _parse_jsonl(lines: list[str], lenient: bool) -> list[Instance]:
    instances = []
    for ln, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line=ln) from exc
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object per line", line=ln)
        missing = [k for k in ("text", "label", "difficulty") if k not in obj]
        if missing:
            raise ParseError(f"missing fields: {', '.join(missing)}", line=ln)
        try:
            label = int(obj["label"])
            difficulty = int(obj["difficulty"])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"non-integer label or difficulty: {exc}", line=ln) from exc
        instances.append(
            _build_instance(
                id=str(obj.get("id", f"s{len(instances) + 1}")),
                text=str(obj["text"]),
                label=label,
                difficulty=difficulty,
                labelers=obj.get("labelers"),
                union=obj.get("union"),
                intersection=obj.get("intersection"),
                lenient=lenient,
                line=ln,
            )
        )
    return instances


def parse_dataset(
    source: BinaryIO | bytes | str | Path,
    format: str = "jsonl",
    lenient: bool = False,
) -> list[Instance]:
    """Parse and validate a rationale dataset from a byte stream or path."""
    if format not in ("tsv", "jsonl"):
        raise ValueError(f"unsupported format {format!r}")
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    try:
        textdata = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"stream is not valid UTF-8: {exc}") from exc
    lines = textdata.splitlines()
    instances = _parse_tsv(lines, lenient) if format == "tsv" else _parse_jsonl(lines, lenient)
    seen: set[str] = set()
    for inst in instances:
        if inst.id in seen:
            raise ValidationError(f"duplicate instance id {inst.id!r}")
        seen.add(inst.id)
    return instances


def instance_to_json(inst: Instance) -> dict:
    obj: dict = {
        "id": inst.id,
        "text": inst.text,
        "label": inst.gold_label,
        "difficulty": inst.difficulty,
    }
    if inst.labeler_rationales:
        obj["labelers"] = [sorted(s) for s in inst.labeler_rationales]
    if inst.pre_aggregated is not None:
        obj["union"] = sorted(inst.pre_aggregated[0])
        obj["intersection"] = sorted(inst.pre_aggregated[1])
    return obj


def serialize_dataset(instances: Sequence[Instance], stream: BinaryIO | None = None) -> bytes:
    """Canonical JSONL serialization; inverse of ``parse_dataset`` (jsonl)."""
    buf = io.BytesIO()
    for inst in instances:
        buf.write(json.dumps(instance_to_json(inst), ensure_ascii=False).encode("utf-8"))
        buf.write(b"\n")
    payload = buf.getvalue()
    if stream is not None:
        stream.write(payload)
    return payload


def aggregate_rationales(instance: Instance, mode: str) -> RationaleSet:
    """Disjunction (union) or conjunction (intersection) across labelers."""
    if mode not in AGGREGATION_MODES:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    if instance.labeler_rationales:
        sets = instance.labeler_rationales
        if mode == "union":
            words: frozenset[str] = frozenset().union(*sets)
        else:
            words = frozenset.intersection(*sets)
    elif instance.pre_aggregated is not None:
        words = instance.pre_aggregated[0 if mode == "union" else 1]
    else:
        raise MissingAnnotationError(
            f"instance {instance.id} has neither labeler rationales nor pre-aggregated sets"
        )
    return RationaleSet(mode=mode, words=words)


def corpus_stats(instances: Sequence[Instance]) -> StatsReport:
    """Per-difficulty and total sentence/rationale statistics.

    Means are left unrounded; rounding happens at presentation time.
    """
    groups: dict[int, list[Instance]] = {d: [] for d in DIFFICULTIES}
    for inst in instances:
        groups[inst.difficulty].append(inst)

    def bucket(insts: Sequence[Instance]) -> StatsBucket:
        n = len(insts)
        if n == 0:
            return StatsBucket(0, 0.0, 0.0, 0.0, 0)
        words = sum(len(i.tokens) for i in insts)
        union_sizes = [len(aggregate_rationales(i, "union").words) for i in insts]
        inter_sizes = [len(aggregate_rationales(i, "intersection").words) for i in insts]
        return StatsBucket(
            sentences=n,
            words_per_sentence=words / n,
            union_words=sum(union_sizes) / n,
            intersection_words=sum(inter_sizes) / n,
            empty_intersections=sum(1 for s in inter_sizes if s == 0),
        )

    return StatsReport(
        by_difficulty={d: bucket(groups[d]) for d in DIFFICULTIES},
        total=bucket(list(instances)),
    )
