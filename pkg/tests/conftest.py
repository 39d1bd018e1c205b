import json
from pathlib import Path

import numpy as np
import pytest

from bivert import (EmbeddingTable, LexiconBundle, SentencePairRecord,
                    TokenizedSentence, Word, bundled_lexicons, load_sense_graph,
                    write_dataset)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def graph_store():
    return load_sense_graph(FIXTURES / "sense_graph.tsv")


@pytest.fixture(scope="session")
def lexicons() -> LexiconBundle:
    return bundled_lexicons()


def make_sentence(surfaces, lang="eng", tokens_per_word=None, text=None):
    """Build a TokenizedSentence with contiguous token indices."""
    tokens_per_word = tokens_per_word or [1] * len(surfaces)
    words = []
    cursor = 0
    for surface, count in zip(surfaces, tokens_per_word):
        words.append(Word(surface, tuple(range(cursor, cursor + count))))
        cursor += count
    return TokenizedSentence(lang, tuple(words), text or " ".join(surfaces))


# Deterministic distinct unit-ish vectors per word of a pooled vocabulary.
_VOCAB_RNG = np.random.default_rng(424242)
_VOCAB_VECTORS: dict[str, np.ndarray] = {}


def word_vector(surface: str, dim: int = 4) -> np.ndarray:
    key = f"{surface}|{dim}"
    if key not in _VOCAB_VECTORS:
        vec = _VOCAB_RNG.normal(size=dim)
        vec /= np.linalg.norm(vec)
        _VOCAB_VECTORS[key] = vec
    return _VOCAB_VECTORS[key]


def make_record(rec_id, system, src_surfaces, back_surfaces, lang="eng",
                human_score=None, dim=4):
    """Record whose tokens (one per word) embed each word to a fixed vector."""
    src = make_sentence(src_surfaces, lang=lang)
    back = make_sentence(back_surfaces, lang=lang)
    src_emb = EmbeddingTable([word_vector(s, dim) for s in src_surfaces])
    back_emb = EmbeddingTable([word_vector(s, dim) for s in back_surfaces])
    return SentencePairRecord(id=rec_id, system=system, source=src, back=back,
                              source_emb=src_emb, back_emb=back_emb,
                              human_score=human_score)


SRC_POOL = [
    ["the", "plan", "met", "a", "big", "challenge"],
    ["we", "found", "the", "answer", "today"],
    ["she", "faced", "a", "hard", "problem"],
    ["the", "happy", "child", "ran", "home"],
    ["a", "long", "story", "about", "success"],
]


def synthetic_labeled_records(n=50, seed=0, edit_rate=0.6):
    """Labeled records with controlled edits; score falls with each edit."""
    rng = np.random.default_rng(seed)
    extras = ["extra", "more", "still", "quite", "really"]
    records = []
    for i in range(n):
        src = list(SRC_POOL[int(rng.integers(len(SRC_POOL)))])
        back = list(src)
        edits = 0
        if rng.random() < edit_rate:
            kind = int(rng.integers(3))
            if kind == 0 and len(back) > 2:
                back.pop(int(rng.integers(len(back))))
                edits += 1
            elif kind == 1:
                back.insert(int(rng.integers(len(back) + 1)),
                            extras[int(rng.integers(len(extras)))])
                edits += 1
            else:
                back[int(rng.integers(len(back)))] = extras[int(rng.integers(len(extras)))]
                edits += 1
            if rng.random() < 0.4 and len(back) > 2:
                back.pop(int(rng.integers(len(back))))
                edits += 1
        score = 10.0 - 2.5 * edits + float(rng.normal(scale=0.05))
        records.append(make_record(f"s{i:03d}", f"sys{i % 3}", src, back,
                                   human_score=score))
    return records


@pytest.fixture()
def synthetic_dataset_path(tmp_path):
    path = tmp_path / "train.jsonl"
    write_dataset(synthetic_labeled_records(), path)
    return path
