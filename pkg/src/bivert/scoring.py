"""Per-sentence feature aggregation, label normalization, and meta-evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import FEATURE_NAMES
from .corpus import SentencePairRecord
from .errors import UndefinedCorrelation
from .relations import (LexiconBundle, RelationCategory, SenseCostFn,
                        classify_sentence_pair)
from .word_align import align_words


@dataclass(frozen=True)
class FeatureVector:
    """Per-category cost sums for one sentence pair; Same contributes nothing."""

    extra: float = 0.0
    missing: float = 0.0
    stopword: float = 0.0
    inflection: float = 0.0
    derivation: float = 0.0
    sense: float = 0.0

    def __post_init__(self):
        for name in FEATURE_NAMES:
            if getattr(self, name) < 0.0:
                raise ValueError(f"feature {name} must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES])

    @classmethod
    def zero(cls) -> "FeatureVector":
        return cls()


_CATEGORY_TO_FIELD = {
    RelationCategory.EXTRA: "extra",
    RelationCategory.MISSING: "missing",
    RelationCategory.STOPWORD: "stopword",
    RelationCategory.INFLECTION: "inflection",
    RelationCategory.DERIVATION: "derivation",
    RelationCategory.SENSE: "sense",
}


def featurize(records) -> FeatureVector:
    """Sum relation costs by category for one sentence pair's records."""
    sums = dict.fromkeys(FEATURE_NAMES, 0.0)
    for record in records:
        field = _CATEGORY_TO_FIELD.get(record.category)
        if field is not None:
            sums[field] += record.cost
    return FeatureVector(**sums)


def sentence_features(record: SentencePairRecord, lexicon: LexiconBundle,
                      sense_scorer: SenseCostFn) -> FeatureVector:
    """Full per-record pipeline: align words, classify pairs, sum costs."""
    pairing = align_words(record.source, record.back, record.source_emb, record.back_emb)
    relation_records = classify_sentence_pair(record.source, record.back, pairing,
                                              lexicon, sense_scorer)
    return featurize(relation_records)


def normalize_labels(scores, lang_pair: str = "") -> list[float]:
    """Clamp negative human scores to zero, then min-max scale to [0, 1].

    The clamp is applied for every language pair (only Russian data contains
    negatives in practice). Constant input maps to all-0.5.
    """
    if len(scores) == 0:
        raise ValueError("normalize_labels needs at least one score")
    values, _ = normalize_labels_with_bounds(scores)
    return values


def normalize_labels_with_bounds(scores) -> tuple[list[float], tuple[float, float]]:
    clamped = [max(0.0, float(s)) for s in scores]
    lo = min(clamped)
    hi = max(clamped)
    if hi == lo:
        return [0.5] * len(clamped), (lo, hi)
    return [(s - lo) / (hi - lo) for s in clamped], (lo, hi)


def pearson(a, b) -> float:
    """Sample Pearson correlation; raises UndefinedCorrelation on constant input."""
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if x.shape != y.shape or x.shape[0] < 2:
        raise ValueError("pearson needs two equal-length vectors of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.dot(dx, dx)))
    sy = float(np.sqrt(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelation("correlation is undefined for constant input")
    # Exact degenerate cases first: two points, identical or exactly negated
    # deviation vectors must give exactly +/-1 regardless of norm rounding.
    if x.shape[0] == 2:
        return 1.0 if (x[1] - x[0]) * (y[1] - y[0]) > 0 else -1.0
    if np.array_equal(dx, dy):
        return 1.0
    if np.array_equal(dx, -dy):
        return -1.0
    return float(np.clip(np.dot(dx, dy) / (sx * sy), -1.0, 1.0))


@dataclass(frozen=True)
class ScoredRecord:
    id: str
    system: str
    human_score: float | None
    predicted: float


@dataclass(frozen=True)
class SystemReport:
    """Per-system mean human and predicted scores plus their correlation."""

    rows: tuple[tuple[str, float, float], ...]
    pearson_r: float | None
    excluded: str | None = None
    note: str | None = None

    def render(self) -> str:
        lines = [f"{system}\t{human:.6f}\t{predicted:.6f}"
                 for system, human, predicted in self.rows]
        lines.append("PEARSON\t" + (f"{self.pearson_r:.6f}" if self.pearson_r is not None
                                    else "n/a"))
        if self.note:
            lines.append(f"# {self.note}")
        return "\n".join(lines) + "\n"


def system_level_report(scored, exclude_system: str | None = None) -> SystemReport:
    """Aggregate per-sentence scores to system means and correlate them."""
    groups: dict[str, tuple[list[float], list[float]]] = {}
    for record in scored:
        if record.system == exclude_system:
            continue
        if record.human_score is None:
            raise ValueError(f"record {record.id} has no human score")
        human, predicted = groups.setdefault(record.system, ([], []))
        human.append(record.human_score)
        predicted.append(record.predicted)
    rows = tuple(
        (system, float(np.mean(groups[system][0])), float(np.mean(groups[system][1])))
        for system in sorted(groups)
    )
    note = None
    r: float | None = None
    if len(rows) < 2:
        note = "correlation n/a: fewer than two systems"
    else:
        try:
            r = pearson([row[1] for row in rows], [row[2] for row in rows])
        except UndefinedCorrelation:
            note = "correlation n/a: constant system means"
    return SystemReport(rows=rows, pearson_r=r, excluded=exclude_system, note=note)
