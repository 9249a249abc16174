"""robprof: predict adversarial robustness of text classifiers from
dataset-level features of their fine-tuning corpora.

The pipeline samples (train, val, test) triplets from labeled corpora,
extracts 13 features per triplet (embedding-space separation and density,
label-distribution shape, surrogate learnability, token statistics), trains
lightweight regressors against supplied attack-success-rate labels, and
produces evaluation and interpretation reports.
"""

from .clustering import ClusterAssignment, hdbscan, mutual_reachability
from .corpus import (
    Corpus,
    CorpusError,
    DatasetTriplet,
    TextRecord,
    load_corpus,
    remap_labels,
    sample_triplets,
)
from .embedding import (
    EmbeddingFormatError,
    EmbeddingMatrix,
    fallback_embed,
    load_embeddings,
    write_embeddings,
)
from .evaluation import (
    MetricReport,
    SplitPlan,
    compute_metrics,
    extrapolation_eval,
    interpolation_eval,
)
from .features import (
    FEATURE_NAMES,
    ClusterStats,
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
from .interpretation import (
    ALECurve,
    ErrorAnalysisReport,
    ImportanceReport,
    ale,
    error_analysis,
    permutation_importance,
)
from .regressors import (
    GradientBoostingParams,
    RandomForestParams,
    RegressionDataset,
    fit_gradient_boosting,
    fit_linear,
    fit_predictor,
    fit_random_forest,
    model_from_json,
    model_to_json,
    predict,
)
from .surrogate import SurrogateConfig, surrogate_mcr
from .tokenization import TokenList, WordpieceVocab, tokenize

__version__ = "0.1.0"
