import numpy as np
import pytest

from robprof.corpus import Corpus, TextRecord
from robprof.synthdata import make_corpus_family


@pytest.fixture(scope="session")
def small_family():
    """Three compact synthetic corpora; enough for k=20 triplets."""
    return make_corpus_family(3, 260, seed=7)


def make_simple_corpus(corpus_id="c", n=60, n_classes=2, seed=0):
    rng = np.random.RandomState(seed)
    words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"]
    records = []
    for i in range(n):
        label = i % n_classes
        text = " ".join(rng.choice(words, size=3 + label))
        records.append(TextRecord(text=text, label=label))
    return Corpus(id=corpus_id, records=tuple(records), total_classes=n_classes)
