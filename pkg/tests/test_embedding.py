import hashlib
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robprof.embedding import (
    EmbeddingFormatError,
    EmbeddingMatrix,
    fallback_embed,
    load_embeddings,
    write_embeddings,
)


def test_round_trip_identity(tmp_path):
    values = np.arange(12, dtype=np.float32).reshape(3, 4) / 7.0
    path = tmp_path / "m.emb1"
    write_embeddings(EmbeddingMatrix(values), path)
    back = load_embeddings(path)
    assert back.rows == 3 and back.dim == 4
    assert np.array_equal(back.values, values)


def test_zero_row_matrix_round_trips(tmp_path):
    values = np.empty((0, 16), dtype=np.float32)
    path = tmp_path / "z.emb1"
    write_embeddings(EmbeddingMatrix(values), path)
    back = load_embeddings(path)
    assert back.rows == 0 and back.dim == 16


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.emb1"
    path.write_bytes(b"XXXX" + struct.pack("<II", 1, 1) + b"\x00" * 4)
    with pytest.raises(EmbeddingFormatError, match="bad magic"):
        load_embeddings(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "trunc.emb1"
    payload = np.ones(9 * 2, dtype="<f4").tobytes()  # 9 rows worth, header says 10
    path.write_bytes(b"EMB1" + struct.pack("<II", 10, 2) + payload)
    with pytest.raises(EmbeddingFormatError, match="truncated"):
        load_embeddings(path)


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "trail.emb1"
    payload = np.ones(4, dtype="<f4").tobytes()
    path.write_bytes(b"EMB1" + struct.pack("<II", 2, 2) + payload + b"xx")
    with pytest.raises(EmbeddingFormatError, match="trailing"):
        load_embeddings(path)


def test_non_finite_payload_rejected(tmp_path):
    path = tmp_path / "inf.emb1"
    payload = np.array([1.0, np.inf], dtype="<f4").tobytes()
    path.write_bytes(b"EMB1" + struct.pack("<II", 1, 2) + payload)
    with pytest.raises(EmbeddingFormatError, match="non-finite"):
        load_embeddings(path)


def test_canonical_file_checksum_is_stable(tmp_path):
    # bit-exact format contract: header plus little-endian float32 payload
    values = np.array([[0.0, 1.0, -1.0], [0.5, 0.25, 2.0]], dtype=np.float32)
    path = tmp_path / "canon.emb1"
    write_embeddings(EmbeddingMatrix(values), path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    assert digest == "2ea7ed7db872c12f27f6aac6f537b7b50f9bea474228a28d965a27469f45583c"


def test_fallback_identical_texts_identical_rows():
    m = fallback_embed(["same text", "same text", "other"], dim=64, seed=1)
    assert np.array_equal(m.values[0], m.values[1])
    assert not np.array_equal(m.values[0], m.values[2])


def test_fallback_rows_unit_norm():
    m = fallback_embed(["a", "bc", "hello world", "x" * 100], dim=512, seed=0)
    norms = np.linalg.norm(m.values, axis=1)
    assert np.all(np.abs(norms - 1.0) < 1e-5)


def test_fallback_empty_text_zero_row():
    m = fallback_embed(["", "word"], dim=32, seed=0)
    assert np.all(m.values[0] == 0.0)


def test_fallback_disjoint_trigrams_low_cosine():
    m = fallback_embed(["abc", "xyz"], dim=512, seed=0)
    cos = float(m.values[0] @ m.values[1])
    assert cos < 0.5


def test_fallback_permutation_equivariant():
    texts = ["one", "two", "three", "four"]
    m = fallback_embed(texts, dim=64, seed=9)
    perm = [2, 0, 3, 1]
    m2 = fallback_embed([texts[i] for i in perm], dim=64, seed=9)
    assert np.array_equal(m2.values, m.values[perm])


def test_fallback_seed_changes_rows():
    a = fallback_embed(["text"], dim=64, seed=1).values
    b = fallback_embed(["text"], dim=64, seed=2).values
    assert not np.array_equal(a, b)


def test_fallback_dim_validation():
    with pytest.raises(ValueError, match="dim"):
        fallback_embed(["x"], dim=4, seed=0)


def test_matrix_rejects_non_finite():
    with pytest.raises(ValueError, match="non-finite"):
        EmbeddingMatrix(np.array([[np.nan]], dtype=np.float32))


@given(st.integers(0, 6), st.integers(1, 5), st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_round_trip_property(rows, dim, seed):
    import tempfile

    rng = np.random.RandomState(seed % 2**31)
    values = rng.randn(rows, dim).astype(np.float32)
    with tempfile.TemporaryDirectory() as d:
        path = f"{d}/m.emb1"
        write_embeddings(EmbeddingMatrix(values), path)
        assert np.array_equal(load_embeddings(path).values, values)
