import numpy as np
import pytest

from rationeval.errors import EmptyInputError, StrategyError
from rationeval.text import (
    DROP,
    PerturbationStrategy,
    UNK_REPLACE,
    apply_mask,
    load_pos_lexicon,
    sample_masks,
    tokenize,
)

from hypothesis import given, strategies as st


def test_tokenize_basic():
    toks = tokenize("none of this is very original")
    assert len(toks) == 6
    assert [t.position for t in toks] == list(range(6))
    assert toks[0].surface == "none"


def test_tokenize_keeps_contractions_and_punct():
    toks = tokenize("it isn't particularly funny .")
    surfaces = [t.surface for t in toks]
    assert "isn't" in surfaces
    assert "." in surfaces


def test_tokenize_pretokenized_negation():
    toks = tokenize("is n't")
    assert [t.surface for t in toks] == ["is", "n't"]


def test_tokenize_normalizes_lowercase():
    toks = tokenize("Beautiful CHARM")
    assert [t.normalized for t in toks] == ["beautiful", "charm"]


def test_tokenize_empty_rejected():
    with pytest.raises(EmptyInputError):
        tokenize("   \t ")


def test_apply_mask_identity():
    toks = tokenize("a b c d")
    for strategy in (DROP, UNK_REPLACE):
        assert apply_mask(toks, [1, 1, 1, 1], strategy) == "a b c d"


def test_apply_mask_all_zero_drop():
    toks = tokenize("a b c")
    assert apply_mask(toks, [0, 0, 0], DROP) == ""


def test_apply_mask_unk_replace():
    toks = tokenize("t0 t1 t2")
    assert apply_mask(toks, [1, 0, 1], UNK_REPLACE) == "t0 UNK t2"


def test_apply_mask_length_mismatch():
    toks = tokenize("a b")
    with pytest.raises(ValueError):
        apply_mask(toks, [1], DROP)


def test_pos_preserving_draws_from_tag_pool(tmp_path):
    lex = tmp_path / "tags.txt"
    lex.write_text("#ADJ\ngood\nbad\nfine\n#OTHER\nthing\n", encoding="utf-8")
    strategy = PerturbationStrategy(kind="pos_preserving", pos_lexicon=load_pos_lexicon(lex))
    toks = tokenize("good stuff")
    rng = np.random.default_rng(0)
    out = apply_mask(toks, [0, 1], strategy, rng).split()
    assert out[0] in {"good", "bad", "fine"}
    assert out[1] == "stuff"


def test_pos_preserving_missing_tag_errors(tmp_path):
    lex = tmp_path / "tags.txt"
    lex.write_text("#ADJ\ngood\n", encoding="utf-8")
    strategy = PerturbationStrategy(kind="pos_preserving", pos_lexicon=load_pos_lexicon(lex))
    toks = tokenize("mystery word")
    with pytest.raises(StrategyError) as exc:
        apply_mask(toks, [0, 1], strategy, np.random.default_rng(0))
    assert "OTHER" in str(exc.value)


def test_pos_preserving_requires_lexicon():
    with pytest.raises(StrategyError):
        PerturbationStrategy(kind="pos_preserving")


def test_sample_masks_first_all_ones():
    rng = np.random.default_rng(5)
    masks = sample_masks(4, 1, rng)
    assert masks.shape == (1, 4)
    assert (masks[0] == 1).all()


def test_sample_masks_deterministic():
    a = sample_masks(6, 50, np.random.default_rng(42))
    b = sample_masks(6, 50, np.random.default_rng(42))
    assert (a == b).all()


def test_sample_masks_mean_near_half():
    # law-of-large-numbers check by direct simulation
    masks = sample_masks(8, 10000, np.random.default_rng(123))
    assert 0.48 <= masks[1:].mean() <= 0.52


@given(st.integers(1, 8), st.integers(0, 2**16))
def test_mask_word_count_properties(n, seed):
    rng = np.random.default_rng(seed)
    toks = tokenize(" ".join(f"w{i}" for i in range(n)))
    keep = (rng.random(n) < 0.5).astype(np.uint8)
    dropped = apply_mask(toks, keep, DROP)
    unked = apply_mask(toks, keep, UNK_REPLACE)
    assert len(dropped.split()) == int(keep.sum())
    assert len(unked.split()) == n


def test_roundtrip_through_mask():
    text = "beautiful to watch and holds a certain charm"
    toks = tokenize(text)
    rejoined = apply_mask(toks, np.ones(len(toks), dtype=np.uint8), DROP)
    assert [t.surface for t in tokenize(rejoined)] == [t.surface for t in toks]


def test_load_pos_lexicon_format(tmp_path):
    lex = tmp_path / "tags.txt"
    lex.write_text("#NOUN\nfilm\nstory\n\n#ADJ\ngood\n", encoding="utf-8")
    parsed = load_pos_lexicon(lex)
    assert parsed == {"NOUN": ("film", "story"), "ADJ": ("good",)}


def test_load_pos_lexicon_word_before_header(tmp_path):
    lex = tmp_path / "tags.txt"
    lex.write_text("film\n#NOUN\nstory\n", encoding="utf-8")
    with pytest.raises(StrategyError):
        load_pos_lexicon(lex)
