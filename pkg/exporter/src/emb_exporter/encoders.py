"""Sentence encoder registry.

Encoders are addressed by name:

  use / use-large          Universal Sentence Encoder via tensorflow_hub
  sbert:<model>            any sentence-transformers model
  hash-trigram[:<dim>]     built-in deterministic hashed-trigram encoder
                           (no model download; useful offline and in tests)

Every encoder exposes ``encode(texts) -> float32 array``, ``dim``, and a
``version`` string recorded in the sidecar.  The primary consumer treats
embeddings as opaque vectors, so any fixed-dimension float encoder works.
"""

from __future__ import annotations

import numpy as np

_USE_URLS = {
    "use": "https://tfhub.dev/google/universal-sentence-encoder/4",
    "use-large": "https://tfhub.dev/google/universal-sentence-encoder-large/5",
}


class EncoderLoadError(RuntimeError):
    """The named encoder could not be constructed."""


class HashTrigramEncoder:
    """Deterministic stand-in encoder: signed hashed character trigrams,
    L2-normalized.  Not a semantic model; it exists so the export pipeline
    can run without network access or model weights."""

    def __init__(self, dim: int = 512):
        if dim < 8:
            raise EncoderLoadError(f"hash-trigram dim must be >= 8, got {dim}")
        self.dim = dim
        self.version = f"hash-trigram/1 dim={dim}"

    @staticmethod
    def _hash(data: bytes) -> int:
        h = 0xCBF29CE484222325
        for byte in data:
            h ^= byte
            h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
        return h

    def encode(self, texts) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            padded = "\x02" + text + "\x03"
            for i in range(len(padded) - 2):
                h = self._hash(padded[i : i + 3].encode("utf-8"))
                sign = 1.0 if h & 1 else -1.0
                out[row, (h >> 1) % self.dim] += sign
            norm = np.sqrt(np.sum(out[row] ** 2))
            if norm > 0.0:
                out[row] /= norm
        return out.astype(np.float32)


class UniversalSentenceEncoder:
    def __init__(self, name: str):
        try:
            import tensorflow_hub as hub
        except ImportError as exc:
            raise EncoderLoadError(
                f"encoder {name!r} needs tensorflow_hub (pip install tensorflow-hub); "
                f"offline alternative: hash-trigram"
            ) from exc
        try:
            self._model = hub.load(_USE_URLS[name])
        except Exception as exc:
            raise EncoderLoadError(f"failed to load {name!r}: {exc}") from exc
        self.dim = 512
        self.version = _USE_URLS[name]

    def encode(self, texts) -> np.ndarray:
        return np.asarray(self._model(list(texts)), dtype=np.float32)


class SbertEncoder:
    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderLoadError(
                f"encoder sbert:{model_name!r} needs sentence-transformers"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise EncoderLoadError(f"failed to load sbert model {model_name!r}: {exc}") from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())
        self.version = f"sentence-transformers:{model_name}"

    def encode(self, texts) -> np.ndarray:
        return np.asarray(
            self._model.encode(list(texts), show_progress_bar=False), dtype=np.float32
        )


DEFAULT_ENCODER = "use"


def load_encoder(name: str = DEFAULT_ENCODER):
    if name in _USE_URLS:
        return UniversalSentenceEncoder(name)
    if name.startswith("sbert:"):
        return SbertEncoder(name.split(":", 1)[1])
    if name == "hash-trigram" or name.startswith("hash-trigram:"):
        dim = 512
        if ":" in name:
            try:
                dim = int(name.split(":", 1)[1])
            except ValueError:
                raise EncoderLoadError(f"bad hash-trigram dimension in {name!r}") from None
        return HashTrigramEncoder(dim)
    raise EncoderLoadError(f"unknown encoder {name!r}")
