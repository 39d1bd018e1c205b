"""Sense-graph snapshot export from a BabelNet-style HTTP API.

The API contract is two JSON endpoints:

    GET {base}/senses?lemma=<l>&lang=<iso3>&key=<k>
        -> [{"id": "...", "pos": "NOUN", "lemmas": ["..."]}]
    GET {base}/edges?id=<synset>&key=<k>
        -> [{"relation": "hypernym",
             "target": {"id": "...", "pos": "NOUN", "lemmas": ["..."]}}]

Requests are retried with exponential backoff; nodes that keep failing are
recorded in the manifest and the snapshot is flagged partial instead of
aborting the run.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

from .manifest import DumpManifest, IngestError, atomic_write_text

RELATIONS = ("hypernym", "hyponym", "holonym", "meronym", "antonym")

_POS_MAP = {"NOUN": "noun", "VERB": "verb"}


@dataclass(frozen=True)
class ApiSynset:
    id: str
    pos: str
    lemmas: tuple[str, ...]


@dataclass
class ApiConfig:
    base_url: str
    key_env: str = "BABELNET_KEY"
    version: str = "5.2"
    max_retries: int = 3
    backoff: float = 0.5
    lang: str = "eng"

    @property
    def key(self) -> str:
        key = os.environ.get(self.key_env, "")
        if not key:
            raise IngestError(f"API key env var {self.key_env} is not set")
        return key


def _parse_synset(obj) -> ApiSynset:
    pos = _POS_MAP.get(str(obj.get("pos", "")).upper(), "other")
    return ApiSynset(id=str(obj["id"]), pos=pos,
                     lemmas=tuple(str(l) for l in obj.get("lemmas", []) if l))


class HttpSenseApi:
    """requests-backed client with retry and backoff."""

    def __init__(self, config: ApiConfig, session=None):
        import requests

        self.config = config
        self._session = session or requests.Session()

    def _get(self, route: str, params: dict):
        last = None
        delay = self.config.backoff
        params = dict(params, key=self.config.key)
        for attempt in range(self.config.max_retries + 1):
            try:
                response = self._session.get(
                    f"{self.config.base_url.rstrip('/')}/{route}", params=params,
                    timeout=30)
                if response.status_code == 200:
                    return response.json()
                last = IngestError(f"{route} returned HTTP {response.status_code}")
            except IngestError:
                raise
            except Exception as exc:
                last = exc
            if attempt < self.config.max_retries:
                time.sleep(delay)
                delay *= 2
        raise IngestError(f"API request {route} failed after retries: {last}")

    def senses(self, lemma: str, lang: str) -> list[ApiSynset]:
        payload = self._get("senses", {"lemma": lemma, "lang": lang})
        return [_parse_synset(obj) for obj in payload]

    def edges(self, synset_id: str) -> list[tuple[str, ApiSynset]]:
        payload = self._get("edges", {"id": synset_id})
        out = []
        for obj in payload:
            relation = str(obj.get("relation", ""))
            if relation not in RELATIONS:
                continue
            out.append((relation, _parse_synset(obj["target"])))
        return out


def fetch_graph_snapshot(lemma_list, lang: str, api, out_path,
                         depth: int = 2, version: str = "5.2") -> DumpManifest:
    """Crawl senses plus edges reachable within `depth` hops and write a snapshot.

    `api` needs `senses(lemma, lang)` and `edges(synset_id)`; HttpSenseApi
    implements them over HTTP, tests can pass an in-memory stub.
    """
    nodes: dict[str, ApiSynset] = {}
    edges: set[tuple[str, str, str]] = set()
    failures: list[str] = []

    frontier: list[str] = []
    for lemma in lemma_list:
        try:
            for synset in api.senses(lemma, lang):
                if synset.id not in nodes:
                    nodes[synset.id] = synset
                    frontier.append(synset.id)
        except IngestError as exc:
            failures.append(f"senses:{lemma}: {exc}")

    for _ in range(depth):
        if not frontier:
            break
        next_frontier: list[str] = []
        for synset_id in frontier:
            try:
                neighbors = api.edges(synset_id)
            except IngestError as exc:
                failures.append(f"edges:{synset_id}: {exc}")
                continue
            for relation, target in neighbors:
                if target.id not in nodes:
                    nodes[target.id] = target
                    next_frontier.append(target.id)
                edges.add((synset_id, target.id, relation))
        frontier = next_frontier

    lines = [f"V\t{version}"]
    for synset_id in sorted(nodes):
        synset = nodes[synset_id]
        lemmas = "|".join(synset.lemmas) if synset.lemmas else synset_id
        lines.append(f"N\t{synset.id}\t{synset.pos}\t{lang}\t{lemmas}")
    for a, b, relation in sorted(edges):
        lines.append(f"E\t{a}\t{b}\t{relation}")
    atomic_write_text(out_path, "\n".join(lines) + "\n")
    manifest = DumpManifest(
        kind="sense-graph-snapshot",
        counts={"lemmas": len(list(lemma_list)), "nodes": len(nodes),
                "edges": len(edges), "depth": depth, "lang": lang},
        partial=bool(failures),
        failures=failures,
    )
    manifest.write_alongside(out_path)
    return manifest
