"""Back-translation of target-language texts into the source language.

The model id selects the backend: ``identity`` echoes its input (useful for
pipeline tests and monolingual dry runs), anything else is treated as a
MarianMT checkpoint for the back direction (e.g. a rus->eng model when
evaluating eng->rus translations) and loaded through transformers.
"""

from __future__ import annotations

from .manifest import DumpManifest, IngestError, atomic_write_text


class IdentityBackend:
    name = "identity"

    def translate(self, texts):
        return list(texts)


class MarianBackend:
    def __init__(self, model_id: str, batch_size: int = 16):
        self.name = model_id
        self.batch_size = batch_size
        try:
            from transformers import MarianMTModel, MarianTokenizer
        except ImportError as exc:
            raise IngestError(
                f"transformers is required for MT model {model_id!r}: {exc}") from exc
        try:
            self._tokenizer = MarianTokenizer.from_pretrained(model_id)
            self._model = MarianMTModel.from_pretrained(model_id)
            self._model.eval()
        except Exception as exc:
            raise IngestError(f"cannot load MT model {model_id!r}: {exc}") from exc

    def translate(self, texts):
        import torch

        out = []
        for start in range(0, len(texts), self.batch_size):
            chunk = list(texts[start:start + self.batch_size])
            encoded = self._tokenizer(chunk, return_tensors="pt", padding=True,
                                      truncation=True)
            with torch.no_grad():
                generated = self._model.generate(**encoded)
            out.extend(self._tokenizer.batch_decode(generated,
                                                    skip_special_tokens=True))
        return out


def resolve_backend(mt_model_id: str):
    if mt_model_id == "identity":
        return IdentityBackend()
    if ":" in mt_model_id and not mt_model_id.startswith("hf:"):
        raise IngestError(f"unknown MT backend scheme in {mt_model_id!r}")
    return MarianBackend(mt_model_id.removeprefix("hf:"))


def back_translate(texts, lang_pair: str, mt_model_id: str) -> list[str]:
    """One back-translation per input text, order preserved."""
    texts = list(texts)
    if not texts:
        return []
    backend = resolve_backend(mt_model_id)
    results = backend.translate(texts)
    if len(results) != len(texts):
        raise IngestError(
            f"backend returned {len(results)} texts for {len(texts)} inputs")
    return results


def back_translate_file(in_path, out_path, lang_pair: str, mt_model_id: str) -> DumpManifest:
    """Read one text per line, back-translate, write one text per line."""
    with open(in_path, encoding="utf-8") as handle:
        texts = [line.rstrip("\n") for line in handle if line.strip()]
    results = back_translate(texts, lang_pair, mt_model_id)
    atomic_write_text(out_path, "".join(line + "\n" for line in results))
    manifest = DumpManifest(kind="backtranslation", mt_model=mt_model_id,
                            counts={"texts": len(results), "lang_pair": lang_pair})
    manifest.write_alongside(out_path)
    return manifest
