"""Offline producers of bivert input files.

Three batch tools: back-translation of system outputs into the source
language, per-token embedding dumps with word-boundary maps, and sense-graph
snapshot export from a BabelNet-style API. Every output file is written
atomically and accompanied by a ``<file>.manifest.json`` provenance record,
and every format round-trips through the scoring package's loaders.
"""

from .backtranslate import back_translate, back_translate_file, resolve_backend
from .embed import dump_embeddings, resolve_encoder, segment_words
from .manifest import DumpManifest, IngestError, atomic_write_text
from .snapshot import ApiConfig, ApiSynset, HttpSenseApi, fetch_graph_snapshot

__version__ = "0.1.0"
