import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robprof.corpus import (
    Corpus,
    CorpusError,
    TextRecord,
    load_corpus,
    remap_labels,
    sample_triplets,
    triplets_from_manifest,
    triplets_to_manifest,
)
from robprof.synthdata import make_corpus_family

from conftest import make_simple_corpus


def test_load_jsonl_two_lines(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"text": "hello there", "label": 0}\n{"text": "bye now", "label": 1}\n')
    corpus = load_corpus(p, "jsonl")
    assert len(corpus) == 2
    assert corpus.records[0] == TextRecord("hello there", 0)
    assert corpus.total_classes == 2


def test_load_empty_file_errors(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text("")
    with pytest.raises(CorpusError, match="empty corpus"):
        load_corpus(p, "jsonl")


def test_load_csv_label_above_declared_total(tmp_path):
    p = tmp_path / "c.csv"
    rows = ["text,label"] + [f"sample {i},{i % 10}" for i in range(5)] + ["bad row,14"]
    p.write_text("\n".join(rows) + "\n")
    with pytest.raises(CorpusError, match="record 5.*14"):
        load_corpus(p, "csv", total_classes=10)


def test_load_csv_quoting(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text('text,label\n"has, comma",0\nplain,1\n')
    corpus = load_corpus(p, "csv")
    assert corpus.records[0].text == "has, comma"


def test_load_jsonl_bad_line_reports_number(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"text": "ok", "label": 0}\nnot json\n')
    with pytest.raises(CorpusError, match=":2"):
        load_corpus(p, "jsonl")


def test_remap_appendix_grouping():
    # 22 classes -> 4 groups of 5; labels 20,21 dropped
    records = tuple(TextRecord(f"t{i}", i % 22) for i in range(220))
    corpus = Corpus(id="c", records=records, total_classes=22)
    out = remap_labels(corpus, target_classes=4, group_size=5)
    assert out.total_classes == 4
    kept = [r for r in records if r.label < 20]
    assert len(out) == len(kept)
    for before, after in zip(kept, out.records):
        assert after.label == before.label // 5


def test_remap_identity():
    corpus = make_simple_corpus(n_classes=3, n=30)
    out = remap_labels(corpus, target_classes=3, group_size=1)
    assert out.records == corpus.records
    assert out.total_classes == 3


def test_remap_six_to_two_uniform():
    records = tuple(TextRecord(f"t{i}", i % 6) for i in range(60))
    corpus = Corpus(id="c", records=records, total_classes=6)
    out = remap_labels(corpus, target_classes=2, group_size=3)
    assert len(out) == 60
    counts = {0: 0, 1: 0}
    for r in out.records:
        counts[r.label] += 1
    assert counts == {0: 30, 1: 30}


def test_remap_rejects_oversized_grouping():
    corpus = make_simple_corpus(n_classes=2)
    with pytest.raises(CorpusError, match="exceeds"):
        remap_labels(corpus, target_classes=2, group_size=2)


def test_remap_never_emits_label_at_or_above_target():
    records = tuple(TextRecord(f"t{i}", i % 10) for i in range(100))
    corpus = Corpus(id="c", records=records, total_classes=10)
    out = remap_labels(corpus, target_classes=3, group_size=3)
    assert len(out) <= len(corpus)
    assert max(r.label for r in out.records) < 3


def test_sample_defaults_match_contract():
    import inspect

    sig = inspect.signature(sample_triplets)
    assert sig.parameters["n_triplets"].default == 500
    assert sig.parameters["k"].default == 100


def test_sample_sizes_and_disjointness(small_family):
    triplets = sample_triplets(small_family, n_triplets=12, k=20, seed=3)
    assert len(triplets) == 12
    for t in triplets:
        assert len(t.train_indices) == 180
        assert len(t.val_indices) == 20
        assert len(t.test_indices) == 20
        tr, va, te = set(t.train_indices), set(t.val_indices), set(t.test_indices)
        assert not (tr & va) and not (tr & te) and not (va & te)


def test_sample_test_set_fixed_per_corpus(small_family):
    triplets = sample_triplets(small_family, n_triplets=30, k=20, seed=5)
    by_corpus = {}
    for t in triplets:
        by_corpus.setdefault(t.corpus_id, set()).add(frozenset(t.test_indices))
    for corpus_id, test_sets in by_corpus.items():
        assert len(test_sets) == 1, corpus_id


def test_sample_deterministic_byte_for_byte(small_family):
    a = triplets_to_manifest(sample_triplets(small_family, n_triplets=10, k=20, seed=9))
    b = triplets_to_manifest(sample_triplets(small_family, n_triplets=10, k=20, seed=9))
    assert a == b
    c = triplets_to_manifest(sample_triplets(small_family, n_triplets=10, k=20, seed=10))
    assert a != c


def test_sample_rejects_small_corpus():
    corpus = make_simple_corpus(n=50)
    with pytest.raises(ValueError, match="needs at least"):
        sample_triplets([corpus], n_triplets=1, k=20, seed=0)


def test_sample_rejects_zero_triplets(small_family):
    with pytest.raises(ValueError, match="n_triplets"):
        sample_triplets(small_family, n_triplets=0, k=20, seed=0)


def test_manifest_round_trip(small_family):
    triplets = sample_triplets(small_family, n_triplets=6, k=20, seed=1)
    text = triplets_to_manifest(triplets)
    back = triplets_from_manifest(text)
    assert back == triplets
    json.loads(text)  # valid JSON


@given(st.integers(0, 2**32), st.integers(1, 8))
@settings(max_examples=15, deadline=None)
def test_disjointness_property(seed, n_triplets):
    corpora = make_corpus_family(2, 120, seed=11)
    triplets = sample_triplets(corpora, n_triplets=n_triplets, k=10, seed=seed)
    for t in triplets:
        combined = t.train_indices + t.val_indices + t.test_indices
        assert len(set(combined)) == len(combined)
        assert len(t.train_indices) == 9 * len(t.val_indices)
