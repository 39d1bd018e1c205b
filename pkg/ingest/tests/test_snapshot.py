import json
import warnings

import pytest

from bivert import load_sense_graph, senses_of
from bivert_ingest import ApiConfig, ApiSynset, HttpSenseApi, IngestError
from bivert_ingest.snapshot import fetch_graph_snapshot


class FakeApi:
    """In-memory stand-in for the HTTP sense API."""

    def __init__(self, senses_by_lemma, edges_by_id, fail_edges=()):
        self._senses = senses_by_lemma
        self._edges = edges_by_id
        self._fail_edges = set(fail_edges)
        self.calls = []

    def senses(self, lemma, lang):
        self.calls.append(("senses", lemma))
        return list(self._senses.get(lemma, []))

    def edges(self, synset_id):
        self.calls.append(("edges", synset_id))
        if synset_id in self._fail_edges:
            raise IngestError(f"simulated failure for {synset_id}")
        return list(self._edges.get(synset_id, []))


def synset(sid, lemmas, pos="noun"):
    return ApiSynset(id=sid, pos=pos, lemmas=tuple(lemmas))


@pytest.fixture()
def api():
    ch1 = synset("bn:c1", ["challenge"])
    dif = synset("bn:d1", ["difficulty"])
    state = synset("bn:s1", ["state"])
    pr1 = synset("bn:p1", ["problem"])
    return FakeApi(
        senses_by_lemma={"challenge": [ch1], "problem": [pr1]},
        edges_by_id={
            "bn:c1": [("hypernym", dif)],
            "bn:d1": [("hypernym", state)],
            "bn:p1": [("hypernym", state)],
        },
    )


def test_snapshot_round_trips_through_primary_loader(api, tmp_path):
    out = tmp_path / "snap.tsv"
    manifest = fetch_graph_snapshot(["challenge", "problem"], "eng", api, out, depth=2)
    assert manifest.counts == {"lemmas": 2, "nodes": 4, "edges": 3,
                               "depth": 2, "lang": "eng"}
    assert not manifest.partial
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        store = load_sense_graph(out)
    assert caught == []
    assert store.version == "5.2"
    assert senses_of("challenge", "eng", "noun", store) == ("bn:c1",)
    assert store.out_degree("bn:s1", "hyponym") == 2


def test_depth_zero_nodes_only(api, tmp_path):
    out = tmp_path / "snap.tsv"
    manifest = fetch_graph_snapshot(["challenge"], "eng", api, out, depth=0)
    assert manifest.counts["edges"] == 0
    text = out.read_text()
    assert "\nE\t" not in text
    assert text.startswith("V\t5.2\n")
    store = load_sense_graph(out)
    assert len(store) == 1


def test_empty_lemma_list_header_only(api, tmp_path):
    out = tmp_path / "snap.tsv"
    fetch_graph_snapshot([], "eng", api, out, depth=2)
    assert out.read_text() == "V\t5.2\n"
    store = load_sense_graph(out)
    assert len(store) == 0


def test_partial_snapshot_flagged(tmp_path):
    failing = FakeApi(
        senses_by_lemma={"challenge": [synset("bn:c1", ["challenge"])],
                         "problem": [synset("bn:p1", ["problem"])]},
        edges_by_id={"bn:p1": [("hypernym", synset("bn:s1", ["state"]))]},
        fail_edges={"bn:c1"},
    )
    out = tmp_path / "snap.tsv"
    manifest = fetch_graph_snapshot(["challenge", "problem"], "eng", failing, out,
                                    depth=1)
    assert manifest.partial
    assert any("bn:c1" in failure for failure in manifest.failures)
    # the snapshot still loads with the data that came through
    store = load_sense_graph(out)
    assert store.out_degree("bn:p1", "hypernym") == 1
    sidecar = json.loads((tmp_path / "snap.tsv.manifest.json").read_text())
    assert sidecar["partial"] is True


class FakeResponse:
    def __init__(self, status_code, payload=None):
        self.status_code = status_code
        self._payload = payload

    def json(self):
        return self._payload


class FlakySession:
    """Fails twice with HTTP 503, then succeeds."""

    def __init__(self, payload):
        self.payload = payload
        self.attempts = 0

    def get(self, url, params=None, timeout=None):
        self.attempts += 1
        if self.attempts <= 2:
            return FakeResponse(503)
        return FakeResponse(200, self.payload)


def test_http_client_retries_with_backoff(monkeypatch):
    monkeypatch.setenv("TEST_API_KEY", "secret")
    sleeps = []
    monkeypatch.setattr("bivert_ingest.snapshot.time.sleep", sleeps.append)
    session = FlakySession([{"id": "bn:x1", "pos": "NOUN", "lemmas": ["x"]}])
    client = HttpSenseApi(ApiConfig(base_url="http://api.test", key_env="TEST_API_KEY"),
                          session=session)
    result = client.senses("x", "eng")
    assert session.attempts == 3
    assert sleeps == [0.5, 1.0]
    assert result == [ApiSynset(id="bn:x1", pos="noun", lemmas=("x",))]


def test_http_client_gives_up_after_retries(monkeypatch):
    monkeypatch.setenv("TEST_API_KEY", "secret")
    monkeypatch.setattr("bivert_ingest.snapshot.time.sleep", lambda *_: None)

    class AlwaysDown:
        def get(self, url, params=None, timeout=None):
            return FakeResponse(500)

    client = HttpSenseApi(ApiConfig(base_url="http://api.test", key_env="TEST_API_KEY"),
                          session=AlwaysDown())
    with pytest.raises(IngestError):
        client.senses("x", "eng")


def test_missing_api_key(monkeypatch):
    monkeypatch.delenv("NOPE_KEY", raising=False)
    config = ApiConfig(base_url="http://api.test", key_env="NOPE_KEY")
    client = HttpSenseApi(config, session=FlakySession([]))
    with pytest.raises(IngestError):
        client.senses("x", "eng")
