"""Bundled synthetic corpus generation for tests, demos, and dry runs.

Corpora are built from random letter words split into one shared pool and
one pool per class; ``class_sep`` is the probability a word is drawn from
the class pool, so it directly controls how separable the classes are for
any character-level representation.  Vocabulary size, text length, and
label skew knobs cover the rest of the feature space.
"""

from __future__ import annotations

import json

import numpy as np

from .corpus import Corpus, TextRecord
from .rng import derive_seed, random_floats, random_ints_below

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _make_words(seed: int, count: int, min_len: int = 3, max_len: int = 8) -> list[str]:
    lengths = random_ints_below(derive_seed(seed, "len"), count, max_len - min_len + 1) + min_len
    letters = random_ints_below(derive_seed(seed, "chars"), int(lengths.sum()), len(_LETTERS))
    words = []
    pos = 0
    for n in lengths:
        words.append("".join(_LETTERS[c] for c in letters[pos : pos + n]))
        pos += n
    return words


def make_corpus(
    corpus_id: str,
    n_records: int,
    n_classes: int,
    seed: int,
    class_sep: float | tuple[float, float] = 0.7,
    vocab_size: int = 200,
    min_words: int = 4,
    max_words: int = 12,
    label_skew: float = 0.0,
    word_skew: float = 1.0,
    n_modes: int = 1,
) -> Corpus:
    """Generate a labeled corpus with controllable class separation.

    class_sep may be a single probability or a (first, last) pair that is
    interpolated across class indices, giving every class its own
    separation level.  label_skew in [0, 1) tilts the label distribution
    toward class 0 (0 = uniform).  word_skew >= 1 concentrates word choice
    on a few pool words (power-law), shrinking within-class embedding
    scatter independently of the between-class separation.  n_modes > 1
    splits each class vocabulary into disjoint sub-pools and lets every
    record draw from one of them, so classes form several sub-blobs in
    embedding space (more within-class scatter, tighter centroid geometry).
    """
    root = derive_seed(seed, "corpus", corpus_id)
    if isinstance(class_sep, tuple):
        lo, hi = class_sep
        if n_classes > 1:
            seps = [lo + (hi - lo) * c / (n_classes - 1) for c in range(n_classes)]
        else:
            seps = [lo]
    else:
        seps = [class_sep] * n_classes
    shared_size = max(vocab_size // 2, 1)
    class_size = max((vocab_size - shared_size) // n_classes, 1)
    shared = _make_words(derive_seed(root, "shared"), shared_size)
    n_modes = max(1, min(n_modes, class_size // 3)) if class_size >= 3 else 1
    pools = []
    for c in range(n_classes):
        words = _make_words(derive_seed(root, "class", c), class_size)
        per_mode = max(class_size // n_modes, 1)
        pools.append(
            [words[m * per_mode : (m + 1) * per_mode] or words[:per_mode] for m in range(n_modes)]
        )

    weights = np.asarray([(1.0 - label_skew) ** c for c in range(n_classes)])
    weights = weights / weights.sum()
    cumulative = np.cumsum(weights)
    label_draw = random_floats(derive_seed(root, "labels"), n_records)
    labels = np.searchsorted(cumulative, label_draw, side="right")
    labels = np.minimum(labels, n_classes - 1)

    lengths = (
        random_ints_below(derive_seed(root, "n-words"), n_records, max_words - min_words + 1)
        + min_words
    )
    total_words = int(lengths.sum())
    pool_draw = random_floats(derive_seed(root, "pool"), total_words)
    word_draw = random_floats(derive_seed(root, "word"), total_words)
    if word_skew != 1.0:
        word_draw = word_draw**word_skew
    modes = random_ints_below(derive_seed(root, "mode"), n_records, n_modes)

    records = []
    pos = 0
    for i in range(n_records):
        label = int(labels[i])
        class_pool = pools[label][int(modes[i])]
        sep = seps[label]
        words = []
        for w in range(int(lengths[i])):
            pool = class_pool if pool_draw[pos] < sep else shared
            words.append(pool[min(int(word_draw[pos] * len(pool)), len(pool) - 1)])
            pos += 1
        records.append(TextRecord(text=" ".join(words), label=label))
    return Corpus(id=corpus_id, records=tuple(records), total_classes=n_classes)


def make_corpus_family(
    n_corpora: int,
    n_records: int,
    seed: int,
    id_prefix: str = "syn",
) -> list[Corpus]:
    """A spread of corpora with every generator knob drawn independently.

    Continuous, independent knob draws keep the resulting dataset features
    from being cheap proxies for corpus identity, which matters when the
    family feeds regression or attribution checks.
    """
    n = n_corpora
    sep_lo = 0.25 + 0.5 * random_floats(derive_seed(seed, "seplo"), n)
    sep_hi = 0.3 + 0.65 * random_floats(derive_seed(seed, "sephi"), n)
    skew = 1.0 + 5.0 * random_floats(derive_seed(seed, "skew"), n)
    vocab = (100 + 400 * random_floats(derive_seed(seed, "vocab"), n)).astype(int)
    k_choices = (3, 4, 5, 10, 14)
    kpick = random_ints_below(derive_seed(seed, "k"), n, len(k_choices))
    # strong skew shrinks the later (higher-separation) classes to slivers,
    # so the unweighted pair-mean distance and the size-weighted scatter
    # ratio respond to different knobs
    lskew = 0.45 + 0.35 * random_floats(derive_seed(seed, "lskew"), n)
    minw = 3 + random_ints_below(derive_seed(seed, "minw"), n, 3)
    maxw = 9 + random_ints_below(derive_seed(seed, "maxw"), n, 6)
    modes = 1 + random_ints_below(derive_seed(seed, "modes"), n, 5)
    corpora = []
    for i in range(n):
        corpora.append(
            make_corpus(
                corpus_id=f"{id_prefix}{i:02d}",
                n_records=n_records,
                n_classes=k_choices[kpick[i]],
                seed=derive_seed(seed, "corp", i),
                class_sep=(float(sep_lo[i]), float(sep_hi[i])),
                vocab_size=int(vocab[i]),
                word_skew=float(skew[i]),
                min_words=int(minw[i]),
                max_words=int(maxw[i]),
                label_skew=float(lskew[i]),
                n_modes=int(modes[i]),
            )
        )
    return corpora


def write_corpus_jsonl(corpus: Corpus, path) -> None:
    lines = [
        json.dumps({"text": rec.text, "label": rec.label}, ensure_ascii=False)
        for rec in corpus.records
    ]
    from .util import atomic_write_text

    atomic_write_text(path, "\n".join(lines) + "\n")
