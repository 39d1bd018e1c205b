"""Sentence-pair data model, language-specific preprocessing, and dataset IO.

Tokenization is an input: word boundaries and subword token indices arrive in
the dataset file, so this module never runs a tokenizer or an encoder. The
assumption throughout is that text was preprocessed *before* embeddings were
extracted, so every word surface in a dataset must be a fixed point of
:func:`preprocess`.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DegenerateSentence, ParseError, SchemaError

# Unicode Han script ranges (CJK unified ideographs and extensions). CJK
# punctuation is deliberately not included: Chinese preprocessing keeps
# ideographs only.
_HAN_PATTERN = re.compile(
    "[㐀-䶿一-鿿豈-﫿"
    "\U00020000-\U0002a6df\U0002a700-\U0002ebef\U0002f800-\U0002fa1f]"
)

_APOSTROPHES = str.maketrans({"’": "'", "ʼ": "'"})


@lru_cache(maxsize=1)
def _contraction_table() -> dict[str, str]:
    text = resources.files("bivert").joinpath("data/contractions/eng.tsv").read_text("utf-8")
    table = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        surface, expansion = line.split("\t")
        table[surface] = expansion
    return table


def preprocess(text: str, lang: str) -> str:
    """Normalize raw text for one language.

    English is lowercased, contractions are expanded from the bundled table
    (unknown apostrophe forms pass through), and whitespace is collapsed.
    Chinese keeps Han-script characters only. Every other language is
    lowercased verbatim. Raises :class:`DegenerateSentence` when nothing
    survives.
    """
    if lang == "zho":
        out = "".join(_HAN_PATTERN.findall(text))
    elif lang == "eng":
        lowered = text.lower().translate(_APOSTROPHES)
        table = _contraction_table()
        out = " ".join(table.get(tok, tok) for tok in lowered.split())
    else:
        out = text.lower()
    if not out.strip():
        raise DegenerateSentence(f"nothing left after preprocessing {text!r} for lang {lang!r}")
    return out


@dataclass(frozen=True)
class Word:
    """One preprocessed word and the indices of its subword tokens."""

    surface: str
    token_indices: tuple[int, ...]

    def __post_init__(self):
        if not self.surface:
            raise ValueError("word surface must be non-empty")
        if not self.token_indices:
            raise ValueError(f"word {self.surface!r} has no token indices")


@dataclass(frozen=True)
class TokenizedSentence:
    """A preprocessed sentence with its word/token partition.

    Token indices across all words must be disjoint, contiguous and cover
    ``0..T-1`` in order; this is validated on construction.
    """

    lang: str
    words: tuple[Word, ...]
    raw_text: str

    def __post_init__(self):
        if not self.words:
            raise ValueError("sentence has no words")
        flat = [t for w in self.words for t in w.token_indices]
        if flat != list(range(len(flat))):
            raise ValueError(
                f"token indices must cover 0..{len(flat) - 1} in order, got {flat}"
            )

    @property
    def num_tokens(self) -> int:
        return sum(len(w.token_indices) for w in self.words)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(w.surface for w in self.words)

    def __len__(self) -> int:
        return len(self.words)


class EmbeddingTable:
    """Per-token dense vectors for one sentence, aligned to token indices."""

    __slots__ = ("_vectors",)

    def __init__(self, vectors):
        arr = np.asarray(vectors, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"embedding table must be (tokens, dim), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding table contains non-finite values")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self._vectors = arr

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def dim(self) -> int:
        return self._vectors.shape[1]

    def __len__(self) -> int:
        return self._vectors.shape[0]

    def __getitem__(self, index: int) -> np.ndarray:
        return self._vectors[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return self._vectors.shape == other._vectors.shape and bool(
            np.array_equal(self._vectors, other._vectors)
        )

    def __repr__(self) -> str:
        return f"EmbeddingTable(tokens={len(self)}, dim={self.dim})"


@dataclass(frozen=True)
class SentencePairRecord:
    """One source sentence with its back-translation and both embedding tables."""

    id: str
    system: str
    source: TokenizedSentence
    back: TokenizedSentence
    source_emb: EmbeddingTable
    back_emb: EmbeddingTable
    human_score: float | None = None

    def __post_init__(self):
        if self.source.lang != self.back.lang:
            raise ValueError(
                f"source lang {self.source.lang!r} != back lang {self.back.lang!r}"
            )
        if len(self.source_emb) != self.source.num_tokens:
            raise ValueError("source embedding table does not match source token count")
        if len(self.back_emb) != self.back.num_tokens:
            raise ValueError("back embedding table does not match back token count")
        if self.source_emb.dim != self.back_emb.dim:
            raise ValueError("source and back embeddings have different dimensions")


def _parse_sentence(obj, lang: str, lineno: int, side: str) -> tuple[TokenizedSentence, list]:
    if not isinstance(obj, dict):
        raise ParseError(lineno, f"{side} must be a map")
    for key in ("text", "words", "emb"):
        if key not in obj:
            raise ParseError(lineno, f"{side} is missing key {key!r}")
    words = []
    if not isinstance(obj["words"], list):
        raise ParseError(lineno, f"{side}.words must be a list")
    for w in obj["words"]:
        if not isinstance(w, dict) or "surface" not in w or "tokens" not in w:
            raise ParseError(lineno, f"{side}.words entries need 'surface' and 'tokens'")
        if not isinstance(w["surface"], str) or not isinstance(w["tokens"], list):
            raise ParseError(lineno, f"bad word entry in {side}")
        try:
            words.append(Word(w["surface"], tuple(int(t) for t in w["tokens"])))
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc), line=lineno) from exc
    try:
        sentence = TokenizedSentence(lang, tuple(words), str(obj["text"]))
    except ValueError as exc:
        raise SchemaError(str(exc), line=lineno) from exc
    for word in sentence.words:
        if any(ch.isspace() for ch in word.surface):
            raise SchemaError(f"word {word.surface!r} contains whitespace", line=lineno)
        try:
            normalized = preprocess(word.surface, lang)
        except DegenerateSentence as exc:
            raise SchemaError(
                f"word {word.surface!r} is not valid preprocessed {lang} text", line=lineno
            ) from exc
        if normalized != word.surface:
            raise SchemaError(
                f"word {word.surface!r} is not preprocessed ({normalized!r} expected)",
                line=lineno,
            )
    return sentence, obj["emb"]


def _parse_embeddings(raw, sentence: TokenizedSentence, expected_dim: int | None,
                      lineno: int, side: str) -> tuple[EmbeddingTable, int]:
    if not isinstance(raw, list) or not raw:
        raise ParseError(lineno, f"{side}.emb must be a non-empty list of vectors")
    dim = expected_dim
    vectors = []
    for vec in raw:
        if not isinstance(vec, list):
            raise ParseError(lineno, f"{side}.emb entries must be lists")
        if dim is None:
            dim = len(vec)
        if len(vec) != dim:
            raise SchemaError(
                f"{side}.emb vector has dim {len(vec)}, expected {dim}", line=lineno
            )
        row = []
        for value in vec:
            if not isinstance(value, (int, float)) or isinstance(value, bool) \
                    or not math.isfinite(value):
                raise SchemaError(f"non-finite or non-numeric embedding value in {side}",
                                  line=lineno)
            row.append(float(value))
        vectors.append(row)
    if len(vectors) != sentence.num_tokens:
        raise SchemaError(
            f"{side} has {len(vectors)} embedding vectors for {sentence.num_tokens} tokens",
            line=lineno,
        )
    return EmbeddingTable(vectors), dim


def load_dataset(path) -> list[SentencePairRecord]:
    """Read a line-delimited dataset file into validated records.

    The embedding dimension is inferred from the first vector and enforced for
    the whole file. Malformed lines raise :class:`ParseError`, invariant
    violations raise :class:`SchemaError`; both carry the 1-based line number.
    """
    records: list[SentencePairRecord] = []
    expected_dim: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(lineno, "record must be a map")
            for key in ("id", "system", "lang", "src", "back"):
                if key not in obj:
                    raise ParseError(lineno, f"record is missing key {key!r}")
            lang = str(obj["lang"])
            source, src_emb_raw = _parse_sentence(obj["src"], lang, lineno, "src")
            back, back_emb_raw = _parse_sentence(obj["back"], lang, lineno, "back")
            source_emb, expected_dim = _parse_embeddings(
                src_emb_raw, source, expected_dim, lineno, "src")
            back_emb, expected_dim = _parse_embeddings(
                back_emb_raw, back, expected_dim, lineno, "back")
            human_score = obj.get("human_score")
            if human_score is not None:
                if not isinstance(human_score, (int, float)) or isinstance(human_score, bool):
                    raise ParseError(lineno, "human_score must be a number")
                human_score = float(human_score)
            try:
                record = SentencePairRecord(
                    id=str(obj["id"]),
                    system=str(obj["system"]),
                    source=source,
                    back=back,
                    source_emb=source_emb,
                    back_emb=back_emb,
                    human_score=human_score,
                )
            except ValueError as exc:
                raise SchemaError(str(exc), line=lineno) from exc
            records.append(record)
    return records


def _sentence_to_obj(sentence: TokenizedSentence, emb: EmbeddingTable) -> dict:
    return {
        "text": sentence.raw_text,
        "words": [
            {"surface": w.surface, "tokens": list(w.token_indices)} for w in sentence.words
        ],
        "emb": [[float(x) for x in row] for row in emb.vectors],
    }


def record_to_obj(record: SentencePairRecord) -> dict:
    obj = {
        "id": record.id,
        "system": record.system,
        "lang": record.source.lang,
        "src": _sentence_to_obj(record.source, record.source_emb),
        "back": _sentence_to_obj(record.back, record.back_emb),
    }
    if record.human_score is not None:
        obj["human_score"] = record.human_score
    return obj


def write_dataset(records, path) -> None:
    """Serialize records to the line-delimited dataset format (inverse of load)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record_to_obj(record), ensure_ascii=False))
            handle.write("\n")
