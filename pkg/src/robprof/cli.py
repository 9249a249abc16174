"""Command-line pipeline: sample -> features -> train -> evaluate -> interpret.

Configuration comes from a JSON file plus flag overrides; every subcommand
validates its inputs, writes outputs atomically under the output directory,
and exits nonzero on any error.  Set ROBPROF_LOG to control log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import (
    Corpus,
    CorpusError,
    load_corpus,
    remap_labels,
    sample_triplets,
    triplets_from_manifest,
    triplets_to_manifest,
)
from .embedding import EmbeddingFormatError, EmbeddingMatrix, fallback_embed, load_embeddings
from .evaluation import (
    EvaluationError,
    MetricReport,
    compute_metrics,
    extrapolation_eval,
    interpolation_eval,
)
from .features import FEATURE_NAMES, FeatureConfig, FeatureError, extract_features
from .interpretation import InterpretationError, ale, error_analysis, permutation_importance
from .regressors import (
    GradientBoostingParams,
    RandomForestParams,
    RegressorError,
    fit_predictor,
    model_to_json,
    predict,
)
from .rng import derive_seed, random_permutation
from .surrogate import SurrogateConfig
from .tables import (
    TableError,
    feature_table_from_csv,
    feature_table_to_csv,
    join_dataset,
    label_file_from_csv,
    label_file_to_csv,
    synth_labels,
)
from .tokenization import TokenizerError, WordpieceVocab
from .util import atomic_write_text

log = logging.getLogger("robprof")


class ConfigError(ValueError):
    """Invalid run configuration or missing pipeline inputs."""


_USER_ERRORS = (
    ConfigError,
    CorpusError,
    EmbeddingFormatError,
    EvaluationError,
    FeatureError,
    InterpretationError,
    RegressorError,
    TableError,
    TokenizerError,
)


@dataclass(frozen=True)
class CorpusSpec:
    id: str
    path: str
    format: str = "jsonl"
    total_classes: int | None = None
    remap: dict | None = None  # {"target_classes": int, "group_size": int}


@dataclass
class RunConfig:
    corpora: list[CorpusSpec]
    output_dir: str = "robprof-out"
    seed: int = 0
    n_triplets: int = 500
    k: int = 100
    token_scheme: str = "simple"
    vocab_path: str | None = None
    embedding_source: str = "fallback"  # or "files"
    embedding_files: dict = field(default_factory=dict)
    embedding_dim: int = 512
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)
    min_cluster_size: int = 5
    eps_guard: bool = False
    chi_standard: bool = False
    unique_tokens: str = "distinct"
    predictor_kind: str = "random_forest"
    predictor_params: dict = field(default_factory=dict)
    split_mode: str = "interpolation"
    split_repeats: int = 200
    train_fraction: float = 0.8
    groups: dict = field(default_factory=dict)
    eval_seeds: list = field(default_factory=lambda: [0])
    keep_per_repeat: bool = False
    labels_path: str | None = None
    synth_terms: dict = field(default_factory=dict)
    synth_noise: float = 0.02
    synth_transform: str = "zscore"
    jobs: int = 1
    clamp: bool = False
    mape_skip_zeros: bool = False
    pfi_repeats: int = 10
    pfi_on_train: bool = False
    ale_bins: int = 20

    def out(self, name: str) -> Path:
        return Path(self.output_dir) / name

    def feature_config(self) -> FeatureConfig:
        vocab = WordpieceVocab.load(self.vocab_path) if self.vocab_path else None
        return FeatureConfig(
            min_cluster_size=self.min_cluster_size,
            eps_guard=self.eps_guard,
            chi_standard=self.chi_standard,
            unique_tokens=self.unique_tokens,
            token_scheme=self.token_scheme,
            vocab=vocab,
            surrogate=self.surrogate,
        )

    def predictor(self):
        kind = self.predictor_kind
        params = dict(self.predictor_params)
        if kind == "random_forest":
            return kind, RandomForestParams(**params)
        if kind == "gradient_boosting":
            return kind, GradientBoostingParams(**params)
        if kind == "linear":
            return kind, None
        raise ConfigError(f"unknown predictor kind {kind!r}")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from None

    corpora = []
    for entry in obj.get("corpora", []):
        corpora.append(
            CorpusSpec(
                id=entry["id"],
                path=entry["path"],
                format=entry.get("format", "jsonl"),
                total_classes=entry.get("total_classes"),
                remap=entry.get("remap"),
            )
        )
    sampling = obj.get("sampling", {})
    tokenizer = obj.get("tokenizer", {})
    embeddings = obj.get("embeddings", {})
    surrogate = SurrogateConfig(**obj.get("surrogate", {}))
    feats = obj.get("features", {})
    predictor = obj.get("predictor", {})
    split = obj.get("split", {})
    synth = obj.get("synth", {})
    return RunConfig(
        corpora=corpora,
        output_dir=obj.get("output_dir", "robprof-out"),
        seed=obj.get("seed", 0),
        n_triplets=sampling.get("n_triplets", 500),
        k=sampling.get("k", 100),
        token_scheme=tokenizer.get("scheme", "simple"),
        vocab_path=tokenizer.get("vocab"),
        embedding_source=embeddings.get("source", "fallback"),
        embedding_files=embeddings.get("files", {}),
        embedding_dim=embeddings.get("dim", 512),
        surrogate=surrogate,
        min_cluster_size=feats.get("min_cluster_size", 5),
        eps_guard=feats.get("eps_guard", False),
        chi_standard=feats.get("chi_standard", False),
        unique_tokens=feats.get("unique_tokens", "distinct"),
        predictor_kind=predictor.get("kind", "random_forest"),
        predictor_params=predictor.get("params", {}),
        split_mode=split.get("mode", "interpolation"),
        split_repeats=split.get("repeats", 200),
        train_fraction=split.get("train_fraction", 0.8),
        groups=split.get("groups", {}),
        eval_seeds=split.get("seeds", [0]),
        keep_per_repeat=split.get("per_repeat", False),
        labels_path=obj.get("labels"),
        synth_terms=synth.get("terms", {}),
        synth_noise=synth.get("noise", 0.02),
        synth_transform=synth.get("transform", "zscore"),
    )


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "output_dir", None) is not None:
        config.output_dir = args.output_dir
    if getattr(args, "jobs", None) is not None:
        config.jobs = args.jobs
    if getattr(args, "fallback_embeddings", False):
        config.embedding_source = "fallback"
    if getattr(args, "eps_guard", False):
        config.eps_guard = True
    if getattr(args, "chi_standard", False):
        config.chi_standard = True
    if getattr(args, "unique_tokens", None) is not None:
        config.unique_tokens = args.unique_tokens
    if getattr(args, "clamp", False):
        config.clamp = True
    if getattr(args, "mape_skip_zeros", False):
        config.mape_skip_zeros = True
    if getattr(args, "n_triplets", None) is not None:
        config.n_triplets = args.n_triplets
    if getattr(args, "k", None) is not None:
        config.k = args.k
    if getattr(args, "predictor", None) is not None:
        config.predictor_kind = args.predictor
    if getattr(args, "labels", None) is not None:
        config.labels_path = args.labels
    if getattr(args, "noise", None) is not None:
        config.synth_noise = args.noise
    if getattr(args, "terms", None) is not None:
        config.synth_terms = _parse_terms(args.terms)
    if getattr(args, "transform", None) is not None:
        config.synth_transform = args.transform
    if getattr(args, "pfi_repeats", None) is not None:
        config.pfi_repeats = args.pfi_repeats
    if getattr(args, "pfi_on_train", False):
        config.pfi_on_train = True
    if getattr(args, "ale_bins", None) is not None:
        config.ale_bins = args.ale_bins
    return config


def _parse_terms(raw: str) -> dict[str, float]:
    terms = {}
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"bad term {part!r}; expected name=coefficient")
        name, coef = part.split("=", 1)
        try:
            terms[name.strip()] = float(coef)
        except ValueError:
            raise ConfigError(f"bad coefficient in term {part!r}") from None
    if not terms:
        raise ConfigError("no terms given")
    return terms


def _load_corpora(config: RunConfig) -> list[Corpus]:
    if not config.corpora:
        raise ConfigError("config lists no corpora")
    corpora = []
    for spec in config.corpora:
        corpus = load_corpus(
            spec.path, spec.format, total_classes=spec.total_classes, corpus_id=spec.id
        )
        if spec.remap:
            corpus = remap_labels(
                corpus,
                target_classes=spec.remap["target_classes"],
                group_size=spec.remap["group_size"],
            )
        corpora.append(corpus)
    return corpora


def _corpus_embeddings(config: RunConfig, corpus: Corpus) -> EmbeddingMatrix:
    if config.embedding_source == "fallback":
        return fallback_embed(
            [rec.text for rec in corpus.records],
            dim=config.embedding_dim,
            seed=derive_seed(config.seed, "fallback-embed", corpus.id),
        )
    if config.embedding_source == "files":
        path = config.embedding_files.get(corpus.id)
        if path is None:
            raise ConfigError(f"no embedding file configured for corpus {corpus.id!r}")
        matrix = load_embeddings(path)
        if matrix.rows != len(corpus):
            raise ConfigError(
                f"embedding file {path} has {matrix.rows} rows; corpus "
                f"{corpus.id!r} has {len(corpus)} records"
            )
        return matrix
    raise ConfigError(f"unknown embedding source {config.embedding_source!r}")


def cmd_sample(config: RunConfig) -> int:
    corpora = _load_corpora(config)
    triplets = sample_triplets(corpora, config.n_triplets, config.k, config.seed)
    atomic_write_text(config.out("manifests.json"), triplets_to_manifest(triplets))
    log.info("wrote %d triplet manifests", len(triplets))
    return 0


_WORKER_STATE: dict = {}


def _features_worker_init(corpora, embeddings, feature_config):
    _WORKER_STATE["corpora"] = corpora
    _WORKER_STATE["embeddings"] = embeddings
    _WORKER_STATE["config"] = feature_config


def _features_worker(triplet):
    corpus = _WORKER_STATE["corpora"][triplet.corpus_id]
    emb = _WORKER_STATE["embeddings"][triplet.corpus_id].subset(triplet.train_indices)
    return extract_features(triplet, corpus, emb, _WORKER_STATE["config"])


def cmd_features(config: RunConfig) -> int:
    manifest_path = config.out("manifests.json")
    if not manifest_path.exists():
        raise ConfigError(f"manifest not found: {manifest_path}; run sample first")
    triplets = triplets_from_manifest(manifest_path.read_text(encoding="utf-8"))
    corpora = {c.id: c for c in _load_corpora(config)}
    feature_config = config.feature_config()

    embeddings = {}
    for cid, corpus in corpora.items():
        embeddings[cid] = _corpus_embeddings(config, corpus)

    triplets = sorted(triplets, key=lambda t: t.triplet_id)
    if config.jobs > 1:
        with ProcessPoolExecutor(
            max_workers=config.jobs,
            initializer=_features_worker_init,
            initargs=(corpora, embeddings, feature_config),
        ) as pool:
            vectors = list(pool.map(_features_worker, triplets, chunksize=8))
    else:
        _features_worker_init(corpora, embeddings, feature_config)
        vectors = [_features_worker(t) for t in triplets]

    rows = [(t.triplet_id, t.corpus_id, fv) for t, fv in zip(triplets, vectors)]
    atomic_write_text(config.out("features.csv"), feature_table_to_csv(rows))
    log.info("wrote %d feature rows", len(rows))
    return 0


def _read_features(config: RunConfig):
    path = config.out("features.csv")
    if not path.exists():
        raise ConfigError(f"feature table not found: {path}; run features first")
    return feature_table_from_csv(path.read_text(encoding="utf-8"))


def _read_labels(config: RunConfig) -> dict[str, float]:
    path = Path(config.labels_path) if config.labels_path else config.out("labels.csv")
    if not path.exists():
        raise ConfigError(f"label file not found: {path}")
    return label_file_from_csv(path.read_text(encoding="utf-8"))


def cmd_synth_labels(config: RunConfig) -> int:
    triplet_ids, _, X = _read_features(config)
    terms = config.synth_terms or {"fdr": 2.0}
    pairs = synth_labels(
        triplet_ids,
        X,
        terms,
        noise=config.synth_noise,
        seed=derive_seed(config.seed, "synth"),
        transform=config.synth_transform,
    )
    atomic_write_text(config.out("labels.csv"), label_file_to_csv(pairs))
    log.info("wrote %d synthetic labels (terms: %s)", len(pairs), terms)
    return 0


def cmd_train(config: RunConfig) -> int:
    triplet_ids, corpus_ids, X = _read_features(config)
    dataset = join_dataset(triplet_ids, corpus_ids, X, _read_labels(config))
    kind, params = config.predictor()
    model = fit_predictor(dataset, kind, params, seed=config.seed)
    atomic_write_text(config.out("model.json"), model_to_json(model))
    yhat = predict(model, dataset.X, clamp=config.clamp)
    in_sample = compute_metrics(dataset.y, yhat, mape_skip_zeros=config.mape_skip_zeros)
    report = {
        "predictor": kind,
        "params": None if params is None else model.to_json_dict()["params"],
        "seed": config.seed,
        "n_rows": len(dataset),
        "in_sample": in_sample.to_json_dict(),
    }
    atomic_write_text(
        config.out("train_report.json"),
        json.dumps(report, sort_keys=True, indent=2) + "\n",
    )
    log.info("trained %s on %d rows", kind, len(dataset))
    return 0


def _evaluate(config: RunConfig) -> MetricReport:
    triplet_ids, corpus_ids, X = _read_features(config)
    dataset = join_dataset(triplet_ids, corpus_ids, X, _read_labels(config))
    kind, params = config.predictor()
    if config.split_mode == "interpolation":
        return interpolation_eval(
            dataset,
            kind,
            params,
            repeats=config.split_repeats,
            train_fraction=config.train_fraction,
            seed=config.seed,
            clamp=config.clamp,
            mape_skip_zeros=config.mape_skip_zeros,
            keep_per_repeat=config.keep_per_repeat,
        )
    if config.split_mode == "extrapolation":
        return extrapolation_eval(
            dataset,
            kind,
            params,
            groups={k: tuple(v) for k, v in config.groups.items()},
            seeds=tuple(config.eval_seeds),
            clamp=config.clamp,
            mape_skip_zeros=config.mape_skip_zeros,
            keep_per_repeat=config.keep_per_repeat,
        )
    raise ConfigError(f"unknown split mode {config.split_mode!r}")


def cmd_evaluate(config: RunConfig) -> int:
    report = _evaluate(config)
    kind, params = config.predictor()
    payload = {
        "mode": config.split_mode,
        "predictor": kind,
        "params": config.predictor_params,
        **report.to_json_dict(),
    }
    atomic_write_text(
        config.out("eval_report.json"), json.dumps(payload, sort_keys=True, indent=2) + "\n"
    )
    log.info(
        "%s evaluation: rmse %.4f mae %.4f r2 %.4f",
        config.split_mode,
        report.rmse.mean,
        report.mae.mean,
        report.r2.mean,
    )
    return 0


def cmd_interpret(config: RunConfig) -> int:
    triplet_ids, corpus_ids, X = _read_features(config)
    dataset = join_dataset(triplet_ids, corpus_ids, X, _read_labels(config))
    kind, params = config.predictor()

    if config.split_mode == "extrapolation":
        cid = np.asarray(dataset.corpus_ids)
        train_mask = np.isin(cid, np.asarray(tuple(config.groups.get("train", ())), dtype=cid.dtype))
        test_mask = np.isin(cid, np.asarray(tuple(config.groups.get("test", ())), dtype=cid.dtype))
        if not train_mask.any() or not test_mask.any():
            raise ConfigError("extrapolation groups matched no rows")
        train = dataset.subset(np.flatnonzero(train_mask))
        held = dataset.subset(np.flatnonzero(test_mask))
    else:
        n = len(dataset)
        perm = random_permutation(derive_seed(config.seed, "interpret-split"), n)
        n_train = min(max(int(n * config.train_fraction), 1), n - 1)
        train = dataset.subset(perm[:n_train])
        held = dataset.subset(perm[n_train:])

    model = fit_predictor(train, kind, params, seed=config.seed)
    target = train if config.pfi_on_train else held

    importance = permutation_importance(
        model,
        target.X,
        target.y,
        n_repeats=config.pfi_repeats,
        seed=derive_seed(config.seed, "pfi"),
    )
    atomic_write_text(
        config.out("pfi.json"),
        json.dumps(importance.to_json_dict(), sort_keys=True, indent=2) + "\n",
    )

    curves = {}
    for name in FEATURE_NAMES:
        curve = ale(model, target.X, name, n_bins=config.ale_bins)
        curves[name] = curve.to_json_dict()
        atomic_write_text(config.out(f"ale_{name}.csv"), curve.to_csv())
    atomic_write_text(
        config.out("ale.json"), json.dumps(curves, sort_keys=True, indent=2) + "\n"
    )

    err = error_analysis(model, target.X, target.y, seed=derive_seed(config.seed, "error"))
    atomic_write_text(
        config.out("error_analysis.json"),
        json.dumps(err.to_json_dict(), sort_keys=True, indent=2) + "\n",
    )
    log.info("interpretation reports written to %s", config.output_dir)
    return 0


def cmd_pipeline(config: RunConfig) -> int:
    cmd_sample(config)
    cmd_features(config)
    if config.labels_path is None:
        cmd_synth_labels(config)
    cmd_train(config)
    cmd_evaluate(config)
    cmd_interpret(config)
    return 0


_COMMANDS = {
    "sample": cmd_sample,
    "features": cmd_features,
    "synth-labels": cmd_synth_labels,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "interpret": cmd_interpret,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robprof",
        description=(
            "Predict adversarial robustness of text classifiers from "
            "dataset-level features of their fine-tuning corpora."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--output-dir", help="override the output directory")
        p.add_argument("--jobs", type=int, help="worker processes for feature extraction")
        p.add_argument(
            "--fallback-embeddings",
            action="store_true",
            help="use the deterministic fallback embedder instead of embedding files",
        )
        p.add_argument("--eps-guard", action="store_true", help="guard zero denominators with 1e-12")
        p.add_argument(
            "--chi-standard",
            action="store_true",
            help="compute chi as the between/within variance ratio",
        )
        p.add_argument("--unique-tokens", choices=["distinct", "hapax"])
        p.add_argument("--clamp", action="store_true", help="clamp predictions to [0, 1]")
        p.add_argument("--mape-skip-zeros", action="store_true")

    p = sub.add_parser("sample", help="sample train/val/test triplets")
    common(p)
    p.add_argument("--n-triplets", type=int, help="number of triplets (default 500)")
    p.add_argument("--k", type=int, help="val/test size; train is 9k (default 100)")

    p = sub.add_parser("features", help="extract the 13-feature table")
    common(p)

    p = sub.add_parser("synth-labels", help="generate synthetic labels from features")
    common(p)
    p.add_argument("--terms", help="comma list of feature=coefficient")
    p.add_argument("--noise", type=float, help="gaussian label noise sigma (default 0.02)")
    p.add_argument("--transform", choices=["zscore", "rank"], help="feature normalization")

    p = sub.add_parser("train", help="fit a predictor on features + labels")
    common(p)
    p.add_argument("--predictor", choices=["linear", "random_forest", "gradient_boosting"])
    p.add_argument("--labels", help="label file path (CSV triplet_id,asr)")

    p = sub.add_parser("evaluate", help="interpolation or extrapolation evaluation")
    common(p)
    p.add_argument("--predictor", choices=["linear", "random_forest", "gradient_boosting"])
    p.add_argument("--labels")

    p = sub.add_parser("interpret", help="permutation importance, ALE, error analysis")
    common(p)
    p.add_argument("--predictor", choices=["linear", "random_forest", "gradient_boosting"])
    p.add_argument("--labels")
    p.add_argument("--pfi-repeats", type=int)
    p.add_argument("--pfi-on-train", action="store_true")
    p.add_argument("--ale-bins", type=int)

    p = sub.add_parser("pipeline", help="run all phases in order")
    common(p)
    p.add_argument("--n-triplets", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--predictor", choices=["linear", "random_forest", "gradient_boosting"])
    p.add_argument("--labels")
    p.add_argument("--terms")
    p.add_argument("--noise", type=float)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("ROBPROF_LOG", "INFO").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _apply_overrides(load_config(args.config), args)
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](config)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
