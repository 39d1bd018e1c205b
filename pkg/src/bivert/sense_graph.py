"""Offline multilingual sense graph: snapshot loading, search, and scoring.

The store holds an immutable synset graph loaded from a snapshot file. Each
stored edge is registered in both directions (a hypernym link implies the
inverse hyponym link), so per-node out-degree counts cover implied inverses.

A path query attaches two virtual roots (depth 0) to the senses of the query
lemmas (depth 1), expands the reachable subgraph level by level up to the
depth limit, and runs Dijkstra over it. Edge weights combine the two
direction-specific type weights, averaged and divided by the depth of the
deeper endpoint; root-to-sense links weigh 0. The search treats edges as
undirected while the weights stay direction-aware.
"""

from __future__ import annotations

import heapq
import json
import threading
import warnings
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DegreeError, ParseError, SchemaError
from .relations import LexiconBundle, lemmatize

RELATION_TYPES = ("hypernym", "hyponym", "holonym", "meronym", "antonym")
ROOT_SENSE = "root_sense"
INVERSE_RELATION = {
    "hypernym": "hyponym",
    "hyponym": "hypernym",
    "holonym": "meronym",
    "meronym": "holonym",
    "antonym": "antonym",
    ROOT_SENSE: ROOT_SENSE,
}
POS_TAGS = ("noun", "verb", "other")


@dataclass(frozen=True)
class RelationParams:
    min_weight: float
    max_weight: float


# Semantic relations weigh between 1 and 2 depending on node degree; antonym
# links are the constant 2.5 regardless of degree.
DEFAULT_RELATION_PARAMS: dict[str, RelationParams] = {
    "hypernym": RelationParams(1.0, 2.0),
    "hyponym": RelationParams(1.0, 2.0),
    "holonym": RelationParams(1.0, 2.0),
    "meronym": RelationParams(1.0, 2.0),
    "antonym": RelationParams(2.5, 2.5),
}


@dataclass(frozen=True)
class SenseNode:
    id: str
    kind: str  # "root" or "synset"
    lemma: str | None
    pos: str


@dataclass(frozen=True)
class SynsetEntry:
    id: str
    pos: str
    lang: str
    lemmas: tuple[str, ...]


class SenseGraphStore:
    """Immutable synset graph with degree counts and a lemma index."""

    def __init__(self, entries, edges, version: str | None = None):
        self._entries: dict[str, SynsetEntry] = {}
        for entry in entries:
            if entry.pos not in POS_TAGS:
                raise SchemaError(f"unknown pos {entry.pos!r} on node {entry.id!r}")
            if entry.id in self._entries:
                raise SchemaError(f"duplicate node id {entry.id!r}")
            self._entries[entry.id] = entry
        directed: set[tuple[str, str, str]] = set()
        for a, b, rel in edges:
            if rel not in RELATION_TYPES:
                raise SchemaError(f"unknown relation {rel!r}")
            for node in (a, b):
                if node not in self._entries:
                    raise SchemaError(f"edge references unknown node {node!r}")
            directed.add((a, b, rel))
            directed.add((b, a, INVERSE_RELATION[rel]))
        adjacency: dict[str, list[tuple[str, str]]] = {}
        degree: dict[tuple[str, str], int] = {}
        for a, b, rel in sorted(directed):
            adjacency.setdefault(a, []).append((b, rel))
            degree[(a, rel)] = degree.get((a, rel), 0) + 1
        self._adjacency = {node: tuple(nbrs) for node, nbrs in adjacency.items()}
        self._degree = degree
        index: dict[tuple[str, str, str], list[str]] = {}
        for entry in self._entries.values():
            for lemma in entry.lemmas:
                index.setdefault((entry.lang, entry.pos, lemma), []).append(entry.id)
        self._index = {key: tuple(sorted(ids)) for key, ids in index.items()}
        self.version = version

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, synset_id: str) -> bool:
        return synset_id in self._entries

    def entry(self, synset_id: str) -> SynsetEntry:
        return self._entries[synset_id]

    def node(self, synset_id: str) -> SenseNode:
        entry = self._entries[synset_id]
        return SenseNode(id=entry.id, kind="synset", lemma=None, pos=entry.pos)

    def neighbors(self, synset_id: str) -> tuple[tuple[str, str], ...]:
        return self._adjacency.get(synset_id, ())

    def out_degree(self, synset_id: str, relation: str) -> int:
        return self._degree.get((synset_id, relation), 0)

    def lemma_index(self, lang: str, pos: str, lemma: str) -> tuple[str, ...]:
        return self._index.get((lang, pos, lemma), ())


def senses_of(lemma: str, lang: str, pos: str, store: SenseGraphStore) -> tuple[str, ...]:
    """Synset ids carrying the lemma; only noun and verb lookups are served."""
    if pos not in ("noun", "verb"):
        return ()
    return store.lemma_index(lang, pos, lemma)


def load_sense_graph(path) -> SenseGraphStore:
    """Read a snapshot file (``V``/``N``/``E`` tab-separated lines) into a store."""
    entries: list[SynsetEntry] = []
    edges: list[tuple[str, str, str]] = []
    edge_lines: list[int] = []
    version: str | None = None
    seen_edges: set[tuple[str, str, str]] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            tag = parts[0]
            if tag == "V":
                if len(parts) != 2:
                    raise ParseError(lineno, "version line must be 'V<TAB>version'")
                version = parts[1]
            elif tag == "N":
                if len(parts) != 5:
                    raise ParseError(lineno, "node line must be 'N<TAB>id<TAB>pos<TAB>lang<TAB>lemmas'")
                _, node_id, pos, lang, lemmas = parts
                entries.append(SynsetEntry(node_id, pos, lang,
                                           tuple(l for l in lemmas.split("|") if l)))
            elif tag == "E":
                if len(parts) != 4:
                    raise ParseError(lineno, "edge line must be 'E<TAB>from<TAB>to<TAB>relation'")
                edge = (parts[1], parts[2], parts[3])
                if edge in seen_edges:
                    warnings.warn(f"duplicate edge on line {lineno}: {edge}")
                    continue
                seen_edges.add(edge)
                edges.append(edge)
                edge_lines.append(lineno)
            else:
                raise ParseError(lineno, f"unknown line tag {tag!r}")
    if version is None:
        warnings.warn(f"snapshot {path} has no version line")
    node_ids = {entry.id for entry in entries}
    for (a, b, rel), lineno in zip(edges, edge_lines):
        if rel not in RELATION_TYPES:
            raise ParseError(lineno, f"unknown relation {rel!r}")
        if a not in node_ids or b not in node_ids:
            raise SchemaError(f"edge ({a}, {b}, {rel}) references an unknown node", line=lineno)
    return SenseGraphStore(entries, edges, version=version)


def write_sense_graph(store: SenseGraphStore, path) -> None:
    """Serialize a store back to the snapshot format (explicit directions only)."""
    lines = []
    if store.version is not None:
        lines.append(f"V\t{store.version}")
    for synset_id in sorted(store._entries):
        entry = store.entry(synset_id)
        lines.append(f"N\t{entry.id}\t{entry.pos}\t{entry.lang}\t{'|'.join(entry.lemmas)}")
    emitted = set()
    for node in sorted(store._adjacency):
        for other, rel in store.neighbors(node):
            if (other, node, INVERSE_RELATION[rel]) in emitted:
                continue
            emitted.add((node, other, rel))
            lines.append(f"E\t{node}\t{other}\t{rel}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def edge_type_weight(relation: str, n_r: int,
                     params: dict[str, RelationParams] | None = None) -> float:
    """Directional type weight: max minus the (max-min) spread divided by degree."""
    spec = (params or DEFAULT_RELATION_PARAMS)[relation]
    if n_r < 1:
        raise DegreeError(f"node has no outgoing {relation} relations")
    return spec.max_weight - (spec.max_weight - spec.min_weight) / n_r


def edge_weight(a: str, b: str, relation: str, depth: int, store: SenseGraphStore,
                params: dict[str, RelationParams] | None = None) -> float:
    """Weight of one edge: both direction weights averaged, divided by depth."""
    if relation == ROOT_SENSE:
        return 0.0
    if depth < 1:
        raise ValueError("depth must be at least 1")
    inverse = INVERSE_RELATION[relation]
    forward_w = edge_type_weight(relation, store.out_degree(a, relation), params)
    inverse_w = edge_type_weight(inverse, store.out_degree(b, inverse), params)
    return (forward_w + inverse_w) / (2.0 * depth)


@dataclass(frozen=True)
class SenseSearchConfig:
    max_depth: int = 7
    allowed_relations: frozenset[str] = frozenset({"hypernym"})

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        unknown = set(self.allowed_relations) - set(RELATION_TYPES)
        if unknown:
            raise ValueError(f"unknown relations in config: {sorted(unknown)}")
        object.__setattr__(self, "allowed_relations", frozenset(self.allowed_relations))


@dataclass(frozen=True)
class PathEdge:
    source: str
    target: str
    relation: str
    depth: int
    weight: float


@dataclass(frozen=True)
class PathResult:
    found: bool
    edges: tuple[PathEdge, ...]
    total_weight: float
    depth_reached: int


_NOT_FOUND = PathResult(found=False, edges=(), total_weight=0.0, depth_reached=0)


def shortest_sense_path(x: str, y: str, lang: str, store: SenseGraphStore,
                        config: SenseSearchConfig = SenseSearchConfig(),
                        pos: str = "noun") -> PathResult:
    """Minimum-total-weight path between the roots of two lemmas.

    Only the subgraph reachable within ``config.max_depth`` levels of either
    root is built; not finding a path there is a value, not an error.
    """
    senses_x = senses_of(x, lang, pos, store)
    senses_y = senses_of(y, lang, pos, store)
    if not senses_x or not senses_y:
        return _NOT_FOUND

    usable = set(config.allowed_relations)
    usable |= {INVERSE_RELATION[r] for r in config.allowed_relations}

    # Level-by-level expansion: depth of a synset is its hop distance from the
    # nearest root (roots 0, their senses 1).
    depth: dict[str, int] = {}
    frontier = sorted(set(senses_x) | set(senses_y))
    for node in frontier:
        depth[node] = 1
    level = 1
    while frontier and level < config.max_depth:
        level += 1
        nxt = set()
        for node in frontier:
            for other, rel in store.neighbors(node):
                if rel in usable and other not in depth:
                    nxt.add(other)
        for node in nxt:
            depth[node] = level
        frontier = sorted(nxt)
    max_expanded = max(depth.values(), default=0)

    root_x = f"root:src:{x}"
    root_y = f"root:back:{y}"
    set_x = set(senses_x)
    set_y = set(senses_y)

    def expand(node: str):
        if node == root_x:
            return [(s, ROOT_SENSE, 0.0) for s in senses_x]
        if node == root_y:
            return [(s, ROOT_SENSE, 0.0) for s in senses_y]
        out = []
        node_depth = depth[node]
        if node in set_x:
            out.append((root_x, ROOT_SENSE, 0.0))
        if node in set_y:
            out.append((root_y, ROOT_SENSE, 0.0))
        for other, rel in store.neighbors(node):
            if rel not in usable or other not in depth:
                continue
            weight = edge_weight(node, other, rel, max(node_depth, depth[other]), store)
            out.append((other, rel, weight))
        return out

    dist: dict[str, float] = {root_x: 0.0}
    back_ref: dict[str, tuple[str, str]] = {}
    heap: list[tuple[float, str]] = [(0.0, root_x)]
    visited: set[str] = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in visited:
            continue
        visited.add(node)
        if node == root_y:
            break
        for other, rel, weight in expand(node):
            nd = d + weight
            if other not in dist or nd < dist[other]:
                dist[other] = nd
                back_ref[other] = (node, rel)
                heapq.heappush(heap, (nd, other))

    if root_y not in visited:
        return PathResult(found=False, edges=(), total_weight=0.0,
                          depth_reached=max_expanded)

    chain = []
    node = root_y
    while node != root_x:
        prev, rel = back_ref[node]
        chain.append((prev, node, rel))
        node = prev
    chain.reverse()

    def node_depth(name: str) -> int:
        return 0 if name in (root_x, root_y) else depth[name]

    edges = []
    total = 0.0
    for a, b, rel in chain:
        d = max(node_depth(a), node_depth(b), 1)
        weight = 0.0 if rel == ROOT_SENSE else edge_weight(a, b, rel, d, store)
        edges.append(PathEdge(source=a, target=b, relation=rel, depth=d, weight=weight))
        total += weight
    return PathResult(found=True, edges=tuple(edges), total_weight=total,
                      depth_reached=max((e.depth for e in edges), default=0))


def path_score(result: PathResult) -> float:
    """Normalized path score in [0, 1]; a zero-weight path is a perfect match."""
    if not result.found:
        raise ValueError("path_score requires a found path")
    total = result.total_weight
    if total <= 0.0:
        return 0.0
    return min(1.0, max(0.0, 1.0 - 2.0 / total))


def sense_cost(src_word: str, back_word: str, similarity: float,
               store: SenseGraphStore, lexicon: LexiconBundle, lang: str,
               config: SenseSearchConfig = SenseSearchConfig()) -> float:
    """Cost of a Sense pair: the path score when a path exists, else 1 - cos.

    Noun-to-noun search runs first, then verb-to-verb; a negative fallback
    similarity clamps to cost 1.
    """
    lemma_x = lemmatize(src_word, lang, lexicon)
    lemma_y = lemmatize(back_word, lang, lexicon)
    for pos in ("noun", "verb"):
        result = shortest_sense_path(lemma_x, lemma_y, lang, store, config, pos=pos)
        if result.found:
            return path_score(result)
    return 1.0 - max(0.0, min(1.0, similarity))


class SenseScorer:
    """Callable sense-cost function with a memoized path-score table.

    The cache keys on the unordered lemma pair (path search is symmetric);
    the cosine fallback depends on the pair's similarity and is never cached.
    Safe to share across threads.
    """

    _MISS = object()

    def __init__(self, store: SenseGraphStore, lexicon: LexiconBundle, lang: str,
                 config: SenseSearchConfig = SenseSearchConfig(),
                 cache_path=None):
        self.store = store
        self.lexicon = lexicon
        self.lang = lang
        self.config = config
        self._cache: dict[tuple[str, str], float | None] = {}
        self._lock = threading.Lock()
        self._cache_path = Path(cache_path) if cache_path else None
        if self._cache_path and self._cache_path.exists():
            raw = json.loads(self._cache_path.read_text("utf-8"))
            self._cache = {tuple(key.split("\x00", 1)): value for key, value in raw.items()}

    def _path_component(self, lemma_x: str, lemma_y: str) -> float | None:
        key = (lemma_x, lemma_y) if lemma_x <= lemma_y else (lemma_y, lemma_x)
        with self._lock:
            hit = self._cache.get(key, self._MISS)
        if hit is not self._MISS:
            return hit
        score: float | None = None
        for pos in ("noun", "verb"):
            result = shortest_sense_path(key[0], key[1], self.lang, self.store,
                                         self.config, pos=pos)
            if result.found:
                score = path_score(result)
                break
        with self._lock:
            self._cache[key] = score
        return score

    def __call__(self, src_word: str, back_word: str, similarity: float) -> float:
        lemma_x = lemmatize(src_word, self.lang, self.lexicon)
        lemma_y = lemmatize(back_word, self.lang, self.lexicon)
        score = self._path_component(lemma_x, lemma_y)
        if score is not None:
            return score
        return 1.0 - max(0.0, min(1.0, similarity))

    def save_cache(self) -> None:
        if not self._cache_path:
            return
        with self._lock:
            payload = {"\x00".join(key): value for key, value in sorted(self._cache.items())}
        self._cache_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self._cache_path.with_suffix(self._cache_path.suffix + ".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        tmp.replace(self._cache_path)
