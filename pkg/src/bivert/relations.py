"""Relation classification for aligned word pairs.

Every pair (or unmatched word) falls into exactly one of seven categories via
a fixed decision cascade: Missing, Extra, Same, Stopword, Inflection,
Derivation, Sense. Identical stopwords are Same, not Stopword; a pair with
only one stopword falls through to the lemma-based checks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

from .corpus import TokenizedSentence
from .word_align import WordPairing

# (src surface, back surface, representative similarity) -> cost in [0, 1]
SenseCostFn = Callable[[str, str, float], float]


class RelationCategory(enum.Enum):
    SAME = "Same"
    EXTRA = "Extra"
    MISSING = "Missing"
    STOPWORD = "Stopword"
    INFLECTION = "Inflection"
    DERIVATION = "Derivation"
    SENSE = "Sense"


@dataclass(frozen=True)
class RelationRecord:
    """One classified word pair with its cost contribution."""

    category: RelationCategory
    src_word: str | None
    back_word: str | None
    cost: float

    def __post_init__(self):
        if self.category is RelationCategory.EXTRA and self.src_word is not None:
            raise ValueError("Extra records carry no source word")
        if self.category is RelationCategory.MISSING and self.back_word is not None:
            raise ValueError("Missing records carry no back word")
        if self.category not in (RelationCategory.EXTRA, RelationCategory.MISSING):
            if self.src_word is None or self.back_word is None:
                raise ValueError(f"{self.category.value} records need both words")
        if self.cost < 0.0:
            raise ValueError("relation cost must be non-negative")


def _read_lines(text: str) -> list[str]:
    return [line.strip() for line in text.splitlines() if line.strip()]


def _parse_pairs(text: str, what: str) -> list[tuple[str, str]]:
    pairs = []
    for line in _read_lines(text):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{what} lines must have two tab-separated fields: {line!r}")
        pairs.append((parts[0], parts[1]))
    return pairs


@dataclass(frozen=True)
class LexiconBundle:
    """Per-language stopword sets, lemma tables and derivation pair sets.

    All lookups are total: a missing entry means identity lemma or
    non-membership.
    """

    stopwords: Mapping[str, frozenset[str]]
    lemmas: Mapping[str, Mapping[str, str]]
    derivations: Mapping[str, frozenset[frozenset[str]]]

    def is_stopword(self, word: str, lang: str) -> bool:
        return word in self.stopwords.get(lang, frozenset())

    def lemma(self, word: str, lang: str) -> str:
        return self.lemmas.get(lang, {}).get(word, word)

    def is_derivation_pair(self, a: str, b: str, lang: str) -> bool:
        return frozenset((a, b)) in self.derivations.get(lang, frozenset())

    @classmethod
    def from_dir(cls, root) -> "LexiconBundle":
        """Load ``<root>/<lang>/{stopwords.txt,lemmas.tsv,derivations.tsv}``."""
        root = Path(root)
        stopwords: dict[str, frozenset[str]] = {}
        lemmas: dict[str, dict[str, str]] = {}
        derivations: dict[str, frozenset[frozenset[str]]] = {}
        for lang_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            lang = lang_dir.name
            sw = lang_dir / "stopwords.txt"
            if sw.exists():
                stopwords[lang] = frozenset(_read_lines(sw.read_text("utf-8")))
            lm = lang_dir / "lemmas.tsv"
            if lm.exists():
                lemmas[lang] = dict(_parse_pairs(lm.read_text("utf-8"), "lemma table"))
            dv = lang_dir / "derivations.tsv"
            if dv.exists():
                derivations[lang] = frozenset(
                    frozenset(p) for p in _parse_pairs(dv.read_text("utf-8"), "derivation table")
                )
        return cls(stopwords=stopwords, lemmas=lemmas, derivations=derivations)


@lru_cache(maxsize=1)
def bundled_lexicons() -> LexiconBundle:
    """The lexicon bundle shipped with the package."""
    root = resources.files("bivert").joinpath("data/lexicons")
    with resources.as_file(root) as path:
        return LexiconBundle.from_dir(path)


def lemmatize(word: str, lang: str, lexicon: LexiconBundle) -> str:
    """Table lookup lemmatization; identity when the word or language is unknown."""
    if not word:
        raise ValueError("cannot lemmatize an empty word")
    return lexicon.lemma(word, lang)


def classify_pair(src_word: str | None, back_word: str | None, lang: str,
                  src_len: int, similarity: float, lexicon: LexiconBundle,
                  sense_scorer: SenseCostFn) -> RelationRecord:
    """Classify one aligned (or unmatched) word pair and assign its cost."""
    if src_word is None and back_word is None:
        raise ValueError("classify_pair needs at least one word")
    if src_len < 1:
        raise ValueError("src_len must be at least 1")
    unit = 1.0 / src_len
    if back_word is None:
        return RelationRecord(RelationCategory.MISSING, src_word, None, unit)
    if src_word is None:
        return RelationRecord(RelationCategory.EXTRA, None, back_word, unit)
    if src_word == back_word:
        return RelationRecord(RelationCategory.SAME, src_word, back_word, 0.0)
    if lexicon.is_stopword(src_word, lang) and lexicon.is_stopword(back_word, lang):
        return RelationRecord(RelationCategory.STOPWORD, src_word, back_word, unit)
    sim_cost = min(max(1.0 - similarity, 0.0), 2.0)
    src_lemma = lemmatize(src_word, lang, lexicon)
    back_lemma = lemmatize(back_word, lang, lexicon)
    if src_lemma == back_lemma:
        return RelationRecord(RelationCategory.INFLECTION, src_word, back_word, sim_cost)
    if lexicon.is_derivation_pair(src_lemma, back_lemma, lang):
        return RelationRecord(RelationCategory.DERIVATION, src_word, back_word, sim_cost)
    cost = min(max(float(sense_scorer(src_word, back_word, similarity)), 0.0), 1.0)
    return RelationRecord(RelationCategory.SENSE, src_word, back_word, cost)


def classify_sentence_pair(src: TokenizedSentence, back: TokenizedSentence,
                           pairing: WordPairing, lexicon: LexiconBundle,
                           sense_scorer: SenseCostFn) -> list[RelationRecord]:
    """Relation records for every word of one aligned sentence pair."""
    src_len = len(src.words)
    lang = src.lang
    records = []
    for ws, wb, rep in pairing.pairs:
        records.append(classify_pair(src.words[ws].surface, back.words[wb].surface,
                                      lang, src_len, rep, lexicon, sense_scorer))
    for ws in pairing.missing_src:
        records.append(classify_pair(src.words[ws].surface, None, lang, src_len,
                                     0.0, lexicon, sense_scorer))
    for wb in pairing.extra_back:
        records.append(classify_pair(None, back.words[wb].surface, lang, src_len,
                                     0.0, lexicon, sense_scorer))
    return records
