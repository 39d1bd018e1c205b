import json

import pytest

from bivert_ingest import IngestError, back_translate, back_translate_file
from bivert_ingest.backtranslate import resolve_backend
from bivert_ingest.cli import main


def test_empty_input():
    assert back_translate([], "eng-rus", "identity") == []


def test_order_preserving():
    texts = [f"sentence number {i}" for i in range(10)]
    assert back_translate(texts, "eng-rus", "identity") == texts


def test_outputs_non_empty():
    results = back_translate(["The plan hit a problem"], "eng-rus", "identity")
    assert len(results) == 1
    assert results[0]


def test_unknown_backend_scheme():
    with pytest.raises(IngestError):
        resolve_backend("bogus:model")


def test_file_round_trip_with_manifest(tmp_path):
    in_path = tmp_path / "in.txt"
    in_path.write_text("first line\nsecond line\n", encoding="utf-8")
    out_path = tmp_path / "out.txt"
    manifest = back_translate_file(in_path, out_path, "eng-rus", "identity")
    assert out_path.read_text(encoding="utf-8") == "first line\nsecond line\n"
    assert manifest.counts["texts"] == 2
    sidecar = json.loads((tmp_path / "out.txt.manifest.json").read_text())
    assert sidecar["kind"] == "backtranslation"
    assert sidecar["mt_model"] == "identity"


def test_cli_bad_model_nonzero_exit(tmp_path, capsys):
    in_path = tmp_path / "in.txt"
    in_path.write_text("hello\n")
    code = main(["backtranslate", "--model", "bogus:model", "--lang-pair", "eng-rus",
                 "--in", str(in_path), "--out", str(tmp_path / "out.txt")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_cli_identity(tmp_path):
    in_path = tmp_path / "in.txt"
    in_path.write_text("hello there\n")
    out_path = tmp_path / "out.txt"
    code = main(["backtranslate", "--model", "identity", "--lang-pair", "eng-rus",
                 "--in", str(in_path), "--out", str(out_path)])
    assert code == 0
    assert out_path.read_text() == "hello there\n"
