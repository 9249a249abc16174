import numpy as np
import pytest

from robprof.corpus import TextRecord, sample_triplets
from robprof.embedding import fallback_embed
from robprof.features import (
    FEATURE_NAMES,
    FeatureConfig,
    FeatureError,
    FeatureVector,
    class_separation,
    clustering_stats,
    davies_bouldin,
    extract_features,
    label_stats,
    token_stats,
)
from robprof.surrogate import surrogate_mcr
from robprof.synthdata import make_corpus_family
from robprof.tokenization import tokenize

TWO_CLASS_1D = np.array([[0.0], [2.0], [10.0], [12.0]])
TWO_CLASS_LABELS = [0, 0, 1, 1]


# --- class separation -------------------------------------------------------


def test_hand_computed_separation_anchors():
    out = class_separation(TWO_CLASS_1D, TWO_CLASS_LABELS)
    assert out["md"] == pytest.approx(100.0, abs=1e-12)
    assert out["fdr"] == pytest.approx(25.0, abs=1e-12)
    assert out["chi"] == pytest.approx(0.08, abs=1e-12)


def test_translation_invariance():
    base = class_separation(TWO_CLASS_1D, TWO_CLASS_LABELS)
    shifted = class_separation(TWO_CLASS_1D + 37.5, TWO_CLASS_LABELS)
    for key in base:
        assert shifted[key] == pytest.approx(base[key], rel=1e-9)


def test_scaling_behaviour():
    base = class_separation(TWO_CLASS_1D, TWO_CLASS_LABELS)
    scaled = class_separation(TWO_CLASS_1D * 3.0, TWO_CLASS_LABELS)
    assert scaled["md"] == pytest.approx(9.0 * base["md"], rel=1e-9)
    assert scaled["fdr"] == pytest.approx(base["fdr"], rel=1e-9)
    assert scaled["chi"] == pytest.approx(base["chi"], rel=1e-9)


def test_chi_standard_variant():
    out = class_separation(TWO_CLASS_1D, TWO_CLASS_LABELS, chi_standard=True)
    # between/within ratio scaled by (N-K)/(K-1)
    assert out["chi"] == pytest.approx(25.0 * 2.0, abs=1e-12)


def test_fdr_chi_product_identity():
    rng = np.random.RandomState(0)
    for _ in range(20):
        n, k = rng.randint(10, 40), rng.randint(2, 5)
        points = rng.randn(n, 6)
        labels = np.concatenate([np.arange(k), rng.randint(0, k, n - k)])
        out = class_separation(points, labels)
        expected = (n - k) / (k - 1)
        assert out["fdr"] * out["chi"] == pytest.approx(expected, rel=1e-9)


def test_single_class_errors():
    with pytest.raises(FeatureError, match="single class"):
        class_separation(np.array([[0.0], [1.0]]), [0, 0])


def test_zero_within_scatter_errors_without_guard():
    points = np.array([[0.0], [0.0], [5.0], [5.0]])
    with pytest.raises(FeatureError, match="within-class"):
        class_separation(points, [0, 0, 1, 1])
    guarded = class_separation(points, [0, 0, 1, 1], eps_guard=True)
    assert np.isfinite(guarded["fdr"])


# --- clustering stats -------------------------------------------------------


def test_davies_bouldin_forced_assignment():
    value = davies_bouldin(TWO_CLASS_1D, np.array([0, 0, 1, 1]))
    assert value == pytest.approx(0.02, abs=1e-12)


def test_davies_bouldin_all_noise_and_single_cluster():
    assert davies_bouldin(TWO_CLASS_1D, np.array([-1, -1, -1, -1])) == 0.0
    assert davies_bouldin(TWO_CLASS_1D, np.array([0, 0, 0, 0])) == 0.0


def test_davies_bouldin_coincident_centroids():
    points = np.array([[0.0], [2.0], [0.0], [2.0]])
    labels = np.array([0, 0, 1, 1])
    with pytest.raises(FeatureError, match="coincident"):
        davies_bouldin(points, labels)
    assert np.isfinite(davies_bouldin(points, labels, eps_guard=True))


def test_clustering_stats_two_blobs():
    pts = np.vstack([np.arange(10)[:, None] * 0.1, 100.0 + np.arange(10)[:, None] * 0.1])
    out = clustering_stats(pts, min_cluster_size=5)
    assert out["n_clusters"] == 2
    assert out["dbi"] > 0.0


def test_clustering_stats_small_input():
    out = clustering_stats(np.zeros((3, 2)), min_cluster_size=5)
    assert out["n_clusters"] == 0
    assert out["dbi"] == 0.0


# --- label stats ------------------------------------------------------------


def test_pms_hand_anchor():
    out = label_stats([0, 0, 1], total_classes=2)
    assert out["pms"] == pytest.approx(3 * (1 / 3) / (np.sqrt(2) / 3), abs=1e-12)
    assert out["pms"] == pytest.approx(2.1213, abs=1e-4)


def test_bernoulli_kurtosis():
    out = label_stats([0, 1] * 50, total_classes=2)
    assert out["kurt"] == pytest.approx(1.0, abs=1e-9)
    assert out["pms"] == pytest.approx(0.0, abs=1e-12)


def test_symmetric_relabel_flips_pms_preserves_kurt():
    labels = [0, 0, 0, 1, 1, 2]
    k = 3
    a = label_stats(labels, k)
    b = label_stats([k - 1 - l for l in labels], k)
    assert b["pms"] == pytest.approx(-a["pms"], rel=1e-9)
    assert b["kurt"] == pytest.approx(a["kurt"], rel=1e-9)


def test_n_classes_is_declared_not_observed():
    out = label_stats([0, 0, 1], total_classes=7)
    assert out["n_classes"] == 7


def test_constant_labels_error_and_guard():
    with pytest.raises(FeatureError, match="identical"):
        label_stats([2, 2, 2], total_classes=3)
    guarded = label_stats([2, 2, 2], total_classes=3, eps_guard=True)
    assert np.isfinite(guarded["pms"]) and np.isfinite(guarded["kurt"])


# --- token stats ------------------------------------------------------------


def test_token_stats_hand_count():
    lists = [tokenize("a b"), tokenize("a b c d")]
    out = token_stats(lists)
    assert out == {"avg_tokens": 3.0, "min_tokens": 2.0, "max_tokens": 4.0, "n_unique_tokens": 4.0}


def test_token_stats_single_empty_text():
    out = token_stats([tokenize("")])
    assert out == {"avg_tokens": 0.0, "min_tokens": 0.0, "max_tokens": 0.0, "n_unique_tokens": 0.0}


def test_token_stats_duplication_invariant():
    lists = [tokenize("x y z"), tokenize("x q")]
    assert token_stats(lists * 3) == token_stats(lists)


def test_token_stats_hapax_mode():
    lists = [tokenize("a a b"), tokenize("b c")]
    assert token_stats(lists)["n_unique_tokens"] == 3.0
    assert token_stats(lists, unique_tokens="hapax")["n_unique_tokens"] == 1.0


# --- surrogate --------------------------------------------------------------


def test_surrogate_separable_alphabets():
    train = [TextRecord("aaaa aaa aa", 0)] * 50 + [TextRecord("zzzz zzz zz", 1)] * 50
    ev = [TextRecord("aaa aaaa", 0)] * 10 + [TextRecord("zzz zzzz", 1)] * 10
    assert surrogate_mcr(train, ev, 2) <= 0.05


def test_surrogate_uninformative_near_half():
    from robprof.rng import derive_seed, random_ints_below

    def words(seed, n_texts):
        letters = "abcdefghij"
        idx = random_ints_below(seed, n_texts * 30, len(letters))
        texts = []
        for t in range(n_texts):
            chunk = idx[t * 30 : (t + 1) * 30]
            texts.append(" ".join("".join(letters[c] for c in chunk[w * 5 : w * 5 + 5]) for w in range(6)))
        return texts

    rates = []
    for seed in range(10):
        labels = random_ints_below(derive_seed(seed, "labels"), 400, 2)
        texts = words(derive_seed(seed, "texts"), 400)
        records = [TextRecord(t, int(l)) for t, l in zip(texts, labels)]
        rates.append(surrogate_mcr(records[:200], records[200:], 2))
    assert abs(float(np.mean(rates)) - 0.5) <= 0.1


def test_surrogate_train_fit_dominates_heldout():
    train = [TextRecord("aaaa aab", 0)] * 30 + [TextRecord("zzzy zzz", 1)] * 30
    held = [TextRecord("aaab aaa", 0)] * 10 + [TextRecord("zzzz zyz", 1)] * 10
    on_train = surrogate_mcr(train, train, 2)
    on_held = surrogate_mcr(train, held, 2)
    assert on_train <= 0.05
    assert on_train <= on_held + 1e-12


def test_surrogate_empty_eval_errors():
    with pytest.raises(ValueError, match="eval"):
        surrogate_mcr([TextRecord("x", 0)], [], 2)


# --- composition ------------------------------------------------------------


@pytest.fixture(scope="module")
def extraction_setup():
    corpora = make_corpus_family(2, 240, seed=13)
    triplets = sample_triplets(corpora, n_triplets=4, k=20, seed=5)
    by_id = {c.id: c for c in corpora}
    embeddings = {
        c.id: fallback_embed([r.text for r in c.records], dim=64, seed=3) for c in corpora
    }
    return corpora, triplets, by_id, embeddings


def test_extract_matches_components(extraction_setup):
    _, triplets, by_id, embeddings = extraction_setup
    t = triplets[0]
    corpus = by_id[t.corpus_id]
    emb = embeddings[t.corpus_id].subset(t.train_indices)
    config = FeatureConfig(min_cluster_size=5)
    fv = extract_features(t, corpus, emb, config)

    train = t.train_records(corpus)
    labels = [r.label for r in train]
    sep = class_separation(emb, labels)
    clust = clustering_stats(emb, min_cluster_size=5)
    lab = label_stats(labels, corpus.total_classes)
    tok = token_stats([tokenize(r.text) for r in train])
    mcr = surrogate_mcr(train, t.val_records(corpus), corpus.total_classes, config.surrogate)

    assert fv.md == sep["md"] and fv.fdr == sep["fdr"] and fv.chi == sep["chi"]
    assert fv.n_clusters == clust["n_clusters"] and fv.dbi == clust["dbi"]
    assert fv.pms == lab["pms"] and fv.kurt == lab["kurt"]
    assert fv.n_classes == corpus.total_classes
    assert fv.avg_tokens == tok["avg_tokens"]
    assert fv.min_tokens == tok["min_tokens"] and fv.max_tokens == tok["max_tokens"]
    assert fv.n_unique_tokens == tok["n_unique_tokens"]
    assert fv.mcr == mcr


def test_extract_deterministic(extraction_setup):
    _, triplets, by_id, embeddings = extraction_setup
    t = triplets[1]
    corpus = by_id[t.corpus_id]
    emb = embeddings[t.corpus_id].subset(t.train_indices)
    a = extract_features(t, corpus, emb)
    b = extract_features(t, corpus, emb)
    assert a == b


def test_extract_errors_carry_triplet_id(extraction_setup):
    _, triplets, by_id, embeddings = extraction_setup
    t = triplets[0]
    corpus = by_id[t.corpus_id]
    bad = embeddings[t.corpus_id].subset(t.train_indices[: len(t.train_indices) // 2])
    with pytest.raises(ValueError, match=t.triplet_id):
        extract_features(t, corpus, bad)


def test_extract_row_count_checked(extraction_setup):
    corpora, triplets, by_id, embeddings = extraction_setup
    t = triplets[0]
    other = [c for c in corpora if c.id != t.corpus_id][0]
    with pytest.raises(ValueError, match="belongs to"):
        extract_features(t, other, embeddings[t.corpus_id].subset(t.train_indices))


def test_feature_vector_validation():
    with pytest.raises(ValueError, match="min <= avg <= max"):
        FeatureVector(
            md=1.0, fdr=1.0, chi=1.0, n_clusters=0, dbi=0.0, pms=0.0, kurt=1.0,
            n_classes=2, mcr=0.5, avg_tokens=1.0, min_tokens=2, max_tokens=3,
            n_unique_tokens=4,
        )


def test_feature_order_matches_table_schema():
    assert FEATURE_NAMES == (
        "md", "fdr", "chi", "n_clusters", "dbi", "pms", "kurt", "n_classes",
        "mcr", "avg_tokens", "min_tokens", "max_tokens", "n_unique_tokens",
    )
