"""Per-token embedding dumps with word-boundary maps.

Emits the line-delimited dataset format consumed by the bivert loader. Texts
are preprocessed with the scoring package's own rules before tokenization
(the pipeline embeds preprocessed text), word boundaries come from whitespace
segmentation (per-character for Chinese), and token indices are derived from
tokenizer offsets. Records whose tokens cannot be mapped onto word spans are
skipped with a warning and counted in the manifest.

Encoder ids: ``hash:<dim>`` is a deterministic, model-free encoder that hashes
(token, position) pairs into unit-scale vectors — enough to exercise the full
pipeline and its file contracts. ``hf:<model>[@layer]`` extracts hidden states
from a transformers checkpoint (last layer by default).
"""

from __future__ import annotations

import hashlib
import json
import re
import warnings

import numpy as np
from bivert import preprocess

from .manifest import DumpManifest, IngestError, atomic_write_text

_WORD_RE = re.compile(r"\S+")
_SUBWORD_CHUNK = 4


def segment_words(text: str, lang: str) -> list[tuple[str, int, int]]:
    """(surface, start, end) word spans: whitespace split, per-char for zho."""
    if lang == "zho":
        return [(ch, i, i + 1) for i, ch in enumerate(text) if not ch.isspace()]
    return [(m.group(0), m.start(), m.end()) for m in _WORD_RE.finditer(text)]


def _hash_vector(token: str, position: int, dim: int) -> np.ndarray:
    vector = np.empty(dim)
    for k in range(dim):
        digest = hashlib.sha256(f"{token}|{position}|{k}".encode("utf-8")).digest()
        unit = int.from_bytes(digest[:8], "big") / float(2 ** 64)
        vector[k] = 2.0 * unit - 1.0
    if float(np.linalg.norm(vector)) < 1e-9:
        vector[0] = 1.0
    return vector


class HashEncoder:
    """Deterministic stand-in encoder: no model, stable across runs."""

    def __init__(self, dim: int = 16):
        if dim < 1:
            raise IngestError(f"hash encoder dim must be positive, got {dim}")
        self.dim = dim
        self.name = f"hash:{dim}"
        self.tokenizer_name = f"chunk{_SUBWORD_CHUNK}"
        self.layer = "n/a"

    def encode(self, text: str, lang: str):
        words = []
        vectors = []
        index = 0
        for surface, _, _ in segment_words(text, lang):
            chunks = [surface[i:i + _SUBWORD_CHUNK]
                      for i in range(0, len(surface), _SUBWORD_CHUNK)]
            token_ids = []
            for chunk in chunks:
                vectors.append(_hash_vector(chunk, index, self.dim))
                token_ids.append(index)
                index += 1
            words.append({"surface": surface, "tokens": token_ids})
        if not words:
            return None
        return words, np.asarray(vectors)


class TransformersEncoder:
    """Hidden-state extraction from a pretrained encoder via offsets."""

    def __init__(self, model_id: str, layer: int = -1):
        self.name = f"hf:{model_id}"
        self.layer = str(layer)
        self._layer = layer
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise IngestError(
                f"transformers is required for encoder {model_id!r}: {exc}") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_id)
            self._model = AutoModel.from_pretrained(model_id,
                                                    output_hidden_states=True)
            self._model.eval()
        except Exception as exc:
            raise IngestError(f"cannot load encoder {model_id!r}: {exc}") from exc
        self.tokenizer_name = type(self._tokenizer).__name__
        self.dim = int(self._model.config.hidden_size)

    def encode(self, text: str, lang: str):
        import torch

        spans = segment_words(text, lang)
        if not spans:
            return None
        encoded = self._tokenizer(text, return_offsets_mapping=True,
                                  return_tensors="pt", truncation=True)
        offsets = encoded.pop("offset_mapping")[0].tolist()
        with torch.no_grad():
            states = self._model(**encoded).hidden_states[self._layer][0]
        words = [{"surface": surface, "tokens": []} for surface, _, _ in spans]
        vectors = []
        index = 0
        for position, (start, end) in enumerate(offsets):
            if start == end:
                continue  # special tokens
            owner = None
            for wi, (_, w_start, w_end) in enumerate(spans):
                if w_start <= start and end <= w_end:
                    owner = wi
                    break
            if owner is None:
                return None  # token crosses word boundaries: unusable record
            words[owner]["tokens"].append(index)
            vectors.append(states[position].numpy().astype(float))
            index += 1
        if any(not w["tokens"] for w in words):
            return None
        return words, np.asarray(vectors)


def resolve_encoder(encoder_id: str, layer: int = -1):
    if encoder_id.startswith("hash:"):
        return HashEncoder(int(encoder_id.split(":", 1)[1]))
    if encoder_id == "hash":
        return HashEncoder()
    if encoder_id.startswith("hf:"):
        return TransformersEncoder(encoder_id.split(":", 1)[1], layer=layer)
    raise IngestError(f"unknown encoder id {encoder_id!r} (use hash:<dim> or hf:<model>)")


def dump_embeddings(src_texts, back_texts, encoder_id: str, out_path,
                    lang: str = "eng", system: str = "unknown",
                    human_scores=None, ids=None, layer: int = -1,
                    apply_preprocess: bool = True) -> DumpManifest:
    """Write a dataset file pairing each source text with its back-translation."""
    src_texts = list(src_texts)
    back_texts = list(back_texts)
    if len(src_texts) != len(back_texts):
        raise IngestError(f"{len(src_texts)} source texts vs {len(back_texts)} back texts")
    if human_scores is not None and len(human_scores) != len(src_texts):
        raise IngestError("human_scores length does not match texts")
    encoder = resolve_encoder(encoder_id, layer=layer)
    lines = []
    skipped = 0
    for i, (src_raw, back_raw) in enumerate(zip(src_texts, back_texts)):
        rec_id = ids[i] if ids is not None else f"r{i:05d}"
        try:
            src_text = preprocess(src_raw, lang) if apply_preprocess else src_raw
            back_text = preprocess(back_raw, lang) if apply_preprocess else back_raw
        except Exception as exc:
            warnings.warn(f"record {rec_id}: preprocessing failed ({exc}); skipped")
            skipped += 1
            continue
        src_encoded = encoder.encode(src_text, lang)
        back_encoded = encoder.encode(back_text, lang)
        if src_encoded is None or back_encoded is None:
            warnings.warn(f"record {rec_id}: tokenizer/word misalignment; skipped")
            skipped += 1
            continue
        src_words, src_vectors = src_encoded
        back_words, back_vectors = back_encoded
        record = {
            "id": rec_id,
            "system": system,
            "lang": lang,
            "src": {"text": src_text, "words": src_words,
                    "emb": [[float(x) for x in row] for row in src_vectors]},
            "back": {"text": back_text, "words": back_words,
                     "emb": [[float(x) for x in row] for row in back_vectors]},
        }
        if human_scores is not None:
            record["human_score"] = float(human_scores[i])
        lines.append(json.dumps(record, ensure_ascii=False))
    atomic_write_text(out_path, "".join(line + "\n" for line in lines))
    manifest = DumpManifest(
        kind="embedding-dump",
        encoder_model=encoder.name,
        tokenizer=encoder.tokenizer_name,
        layer=str(layer) if encoder_id.startswith("hf:") else encoder.layer,
        counts={"records": len(lines), "skipped": skipped, "dim": encoder.dim,
                "lang": lang},
        partial=skipped > 0,
    )
    manifest.write_alongside(out_path)
    return manifest
