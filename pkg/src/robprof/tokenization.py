"""Text tokenization for the token-count statistics.

Two schemes: ``simple`` splits on Unicode whitespace and emits punctuation
marks as standalone tokens (case preserved, no vocabulary needed);
``wordpiece`` applies greedy longest-match subword segmentation against a
user-supplied vocabulary, marking continuations with ``##`` and falling back
to the unknown token when a word cannot be segmented.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path

UNKNOWN_TOKEN = "[UNK]"

SCHEMES = ("simple", "wordpiece")


class TokenizerError(ValueError):
    """Bad scheme or unusable vocabulary."""


@dataclass(frozen=True)
class TokenList:
    tokens: tuple[str, ...]
    scheme: str


@dataclass(frozen=True)
class WordpieceVocab:
    tokens: frozenset[str]
    path: str = ""

    @classmethod
    def load(cls, path) -> "WordpieceVocab":
        path = Path(path)
        if not path.exists():
            raise TokenizerError(f"vocabulary file not found: {path}")
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except UnicodeDecodeError as exc:
            raise TokenizerError(f"vocabulary file {path} is not UTF-8: {exc}") from None
        tokens = frozenset(line.strip() for line in lines if line.strip())
        if not tokens:
            raise TokenizerError(f"vocabulary file {path} is empty")
        return cls(tokens=tokens, path=str(path))


def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_simple(text: str) -> list[str]:
    out: list[str] = []
    for chunk in text.split():
        word = []
        for ch in chunk:
            if _is_punctuation(ch):
                if word:
                    out.append("".join(word))
                    word = []
                out.append(ch)
            else:
                word.append(ch)
        if word:
            out.append("".join(word))
    return out


def _wordpiece_word(word: str, vocab: frozenset[str]) -> list[str]:
    pieces: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        piece = None
        while start < end:
            sub = word[start:end]
            if start > 0:
                sub = "##" + sub
            if sub in vocab:
                piece = sub
                break
            end -= 1
        if piece is None:
            return [UNKNOWN_TOKEN]
        pieces.append(piece)
        start = end
    return pieces


def tokenize(text: str, scheme: str = "simple", vocab: WordpieceVocab | None = None) -> TokenList:
    """Tokenize one text.  Empty input yields an empty token list."""
    if scheme not in SCHEMES:
        raise TokenizerError(f"unknown tokenizer scheme {scheme!r}")
    words = _split_simple(text)
    if scheme == "simple":
        return TokenList(tokens=tuple(words), scheme=scheme)
    if vocab is None:
        raise TokenizerError("wordpiece scheme requires a vocabulary")
    tokens: list[str] = []
    for word in words:
        tokens.extend(_wordpiece_word(word, vocab.tokens))
    return TokenList(tokens=tuple(tokens), scheme=scheme)
