"""Exporter CLI: file layout, determinism, partial failure."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from conftest import make_sentences

from lm_sidecar.config import ENV_LM
from lm_sidecar.export import main, safe_filename


def write_corpus(path: Path, docs: list[tuple[str, list[str]]]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, sentences in docs:
            fh.write(json.dumps({"id": doc_id, "sentences": sentences}) + "\n")
    return path


@pytest.fixture()
def corpus(tmp_path) -> Path:
    rng = random.Random(20)
    docs = [(f"doc-{i}", make_sentences(rng, rng.randint(2, 4))) for i in range(3)]
    return write_corpus(tmp_path / "docs.jsonl", docs)


def run_export(checkpoints, corpus, out, *extra: str) -> int:
    args = ["--docs", str(corpus), "--output", str(out), "--lm", str(checkpoints["lm"])]
    return main([*args, *extra])


def test_safe_filename_keeps_word_chars_only():
    assert safe_filename("doc-1") == "doc-1.json"
    assert safe_filename("a b/c") == "a_b_c.json"


def test_export_writes_one_table_per_document(checkpoints, corpus, tmp_path, capsys):
    out = tmp_path / "tables"
    assert run_export(checkpoints, corpus, out, "--C", "2") == 0
    captured = capsys.readouterr()
    assert captured.out == f"3 score tables -> {out}\n"
    assert captured.err == ""
    files = sorted(p.name for p in out.glob("*.json"))
    assert files == ["doc-0.json", "doc-1.json", "doc-2.json"]
    for p in out.iterdir():
        obj = json.loads(p.read_text(encoding="utf-8"))
        assert obj["C"] == 2
        assert obj["doc_id"] == p.stem
        assert [e["b"] for e in obj["entries"]] == list(
            range(1, len(obj["entries"]) + 1)
        )


def test_export_files_are_canonical_json(checkpoints, corpus, tmp_path):
    out = tmp_path / "tables"
    run_export(checkpoints, corpus, out)
    for p in out.glob("*.json"):
        raw = p.read_text(encoding="utf-8")
        assert raw == json.dumps(json.loads(raw), indent=2, sort_keys=True) + "\n"


def test_export_reruns_are_byte_identical(checkpoints, corpus, tmp_path):
    out1, out2 = tmp_path / "first", tmp_path / "second"
    assert run_export(checkpoints, corpus, out1) == 0
    assert run_export(checkpoints, corpus, out2) == 0
    names = sorted(p.name for p in out1.glob("*.json"))
    assert names == sorted(p.name for p in out2.glob("*.json"))
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_nsp_column_follows_configuration(checkpoints, corpus, tmp_path):
    plain = tmp_path / "plain"
    run_export(checkpoints, corpus, plain)
    with_nsp = tmp_path / "with_nsp"
    run_export(checkpoints, corpus, with_nsp, "--nsp", str(checkpoints["nsp"]))
    for p in plain.glob("*.json"):
        entries = json.loads(p.read_text(encoding="utf-8"))["entries"]
        assert all(e["nsp"] is None for e in entries)
    for p in with_nsp.glob("*.json"):
        entries = json.loads(p.read_text(encoding="utf-8"))["entries"]
        assert all(0.0 <= e["nsp"] <= 1.0 for e in entries)


def test_empty_corpus_exports_nothing(checkpoints, tmp_path, capsys):
    corpus = tmp_path / "empty.jsonl"
    corpus.write_text("", encoding="utf-8")
    out = tmp_path / "tables"
    assert run_export(checkpoints, corpus, out) == 0
    assert capsys.readouterr().out == f"0 score tables -> {out}\n"
    assert list(out.glob("*.json")) == []


def test_bad_document_is_skipped_and_reported(checkpoints, tmp_path, capsys):
    corpus = write_corpus(
        tmp_path / "docs.jsonl",
        [
            ("good-1", ["w00x00 w00x01", "w01x00"]),
            ("bad", ["w00x00", "   "]),
            ("good-2", ["w02x00", "w02x01 w03x00"]),
        ],
    )
    out = tmp_path / "tables"
    assert run_export(checkpoints, corpus, out) == 1
    captured = capsys.readouterr()
    assert captured.out == f"2 score tables -> {out}\n"
    assert captured.err == "failed: bad: sentences must be non-empty text\n"
    assert sorted(p.name for p in out.glob("*.json")) == [
        "good-1.json",
        "good-2.json",
    ]


def test_filename_collision_is_a_failure(checkpoints, tmp_path, capsys):
    corpus = write_corpus(
        tmp_path / "docs.jsonl",
        [("a b", ["w00x00", "w01x00"]), ("a_b", ["w00x01", "w01x01"])],
    )
    out = tmp_path / "tables"
    assert run_export(checkpoints, corpus, out) == 1
    captured = capsys.readouterr()
    assert captured.out == f"1 score tables -> {out}\n"
    assert "failed: a_b: filename a_b.json collides with a b" in captured.err


def test_missing_docs_file_is_usage_error(checkpoints, tmp_path, capsys):
    rc = run_export(checkpoints, tmp_path / "nope.jsonl", tmp_path / "out")
    assert rc == 2
    assert "nope.jsonl" in capsys.readouterr().err


def test_bad_C_is_usage_error(checkpoints, corpus, tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_export(checkpoints, corpus, tmp_path / "out", "--C", "0")
    assert exc.value.code == 2


def test_missing_lm_is_usage_error(monkeypatch, corpus, tmp_path, capsys):
    monkeypatch.delenv(ENV_LM, raising=False)
    rc = main(["--docs", str(corpus), "--output", str(tmp_path / "out")])
    assert rc == 2
    assert ENV_LM in capsys.readouterr().err


def test_unloadable_model_is_runtime_error(corpus, tmp_path, capsys):
    rc = main(
        [
            "--docs",
            str(corpus),
            "--output",
            str(tmp_path / "out"),
            "--lm",
            str(tmp_path / "missing-model"),
        ]
    )
    assert rc == 1
    assert "model load failed" in capsys.readouterr().err
