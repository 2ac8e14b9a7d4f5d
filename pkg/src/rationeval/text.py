"""Tokenization and perturbation primitives shared by all explainers.

The corpus ships pre-tokenized, so tokenization is whitespace splitting
only; anything subword-level belongs to the explained model behind the
black-box boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyInputError, StrategyError

STRATEGY_KINDS = ("drop", "unk_replace", "pos_preserving")

# Tag assigned to words the POS lexicon does not list; the lexicon must
# provide a section for it before pos_preserving can perturb such words.
FALLBACK_TAG = "OTHER"


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    position: int


def tokenize(text: str) -> list[Token]:
    """Split on runs of whitespace, keeping punctuation glued to its word."""
    parts = text.split()
    if not parts:
        raise EmptyInputError("cannot tokenize empty or whitespace-only text")
    return [Token(surface=p, normalized=p.lower(), position=i) for i, p in enumerate(parts)]


def token_types(tokens: Sequence[Token]) -> frozenset[str]:
    return frozenset(t.normalized for t in tokens)


@dataclass(frozen=True)
class PerturbationStrategy:
    """How masked-out tokens are realized in the perturbed sentence.

    ``pos_preserving`` draws a random same-tag word for each masked
    position; the tag of a word is found by reverse lookup in the lexicon
    (first section listing the word wins), with unlisted words assigned
    ``FALLBACK_TAG``.
    """

    kind: str = "unk_replace"
    unk_token: str = "UNK"
    pos_lexicon: Mapping[str, tuple[str, ...]] | None = None
    _word_tags: dict[str, str] = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise StrategyError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "pos_preserving":
            if not self.pos_lexicon:
                raise StrategyError("pos_preserving requires a non-empty pos_lexicon")
            for tag, words in self.pos_lexicon.items():
                if not words:
                    raise StrategyError(f"empty lexicon entry for tag {tag!r}")
                for w in words:
                    self._word_tags.setdefault(w.lower(), tag)

    def tag_of(self, word: str) -> str:
        return self._word_tags.get(word.lower(), FALLBACK_TAG)


DROP = PerturbationStrategy(kind="drop")
UNK_REPLACE = PerturbationStrategy(kind="unk_replace")


def load_pos_lexicon(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Read a coarse-POS lexicon: sections headed ``#TAG``, one word per line."""
    lexicon: dict[str, list[str]] = {}
    tag = None
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line[1:].strip()
            lexicon.setdefault(tag, [])
        elif tag is None:
            raise StrategyError(f"lexicon word {line!r} appears before any #TAG header")
        else:
            lexicon[tag].append(line)
    return {t: tuple(ws) for t, ws in lexicon.items()}


def apply_mask(
    tokens: Sequence[Token],
    keep: Sequence[int] | np.ndarray,
    strategy: PerturbationStrategy = UNK_REPLACE,
    rng: np.random.Generator | None = None,
) -> str:
    """Realize a keep-mask over ``tokens`` as a perturbed sentence."""
    keep = np.asarray(keep)
    if keep.shape[0] != len(tokens):
        raise ValueError(f"mask length {keep.shape[0]} != token count {len(tokens)}")
    out: list[str] = []
    for tok, bit in zip(tokens, keep):
        if bit:
            out.append(tok.surface)
        elif strategy.kind == "drop":
            continue
        elif strategy.kind == "unk_replace":
            out.append(strategy.unk_token)
        else:  # pos_preserving
            tag = strategy.tag_of(tok.normalized)
            pool = (strategy.pos_lexicon or {}).get(tag)
            if not pool:
                raise StrategyError(f"no lexicon entry for tag {tag!r} (token {tok.surface!r})")
            if rng is None:
                raise StrategyError("pos_preserving perturbation requires a seeded rng")
            out.append(pool[int(rng.integers(len(pool)))])
    return " ".join(out)


def sample_masks(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli(0.5) keep-masks, shape (count, n); first row is all ones."""
    if n < 1 or count < 1:
        raise ValueError("n and count must be >= 1")
    masks = (rng.random((count, n)) < 0.5).astype(np.uint8)
    masks[0, :] = 1
    return masks
