"""matprint: perceptual material fingerprints.

A material's appearance is summarized by 16 perceptual attribute values (a
"visual fingerprint") on a normalized [-1, 1] scale.  The package covers the
full life cycle: aggregating human slider ratings into fingerprints,
extracting image statistics from two-frame observations, training small
networks that predict fingerprints from feature vectors, scoring similarity
between fingerprints, retrieval/typicality over a database, the evaluation
metric suite, file formats, a CLI and a REST service.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateDataWarning,
    DependencyUnavailableError,
    FormatError,
    InvalidInputError,
    MatprintError,
    NotFoundError,
    TrainingDivergedError,
)
from .evalmetrics import (
    EvalReport,
    ValidationTrial,
    aic,
    build_validation_trials,
    classical_mds,
    corr_ratings,
    corr_similarity_matrices,
    evaluate,
    mae,
    rci,
    spearman,
    topk_overlap,
)
from .features import (
    FeatureScaler,
    FramePair,
    StatFeatureVector,
    extract_stat_features,
    load_frame_dir,
    load_image,
    near_specular_frame_index,
    normalize_wild_capture,
    select_frames,
    standardize_features,
)
from .mfdb import MaterialDatabase, build_database, load_mfdb, save_mfdb
from .mfx import FeatureTable, MfxMaterial, MfxVariant, load_mfx, save_mfx, table_from_matrix
from .model import (
    AugmentationPolicy,
    MlpModel,
    MlpSpec,
    SplitSpec,
    TrainConfig,
    augment_indices,
    gradient_check,
    knn_predict,
    load_model,
    mlp_forward,
    mlp_train,
    save_model,
    stratified_split,
)
from .ratings import (
    ExclusionReport,
    ImportanceEntry,
    RatingTable,
    RawRating,
    aggregate,
    attribute_importance,
    build_fingerprints,
    exclude_raters,
    fleiss_kappa,
    read_ratings_csv,
    rescale,
    zscore_per_participant,
)
from .schema import (
    AttributeDef,
    AttributeSchema,
    Fingerprint,
    MaterialRecord,
    SimilarityParams,
    clamp_values,
    default_schema,
)
from .similarity import (
    attach_typicality,
    pearson,
    rank_by_attribute,
    retrieve,
    similarity,
    similarity_matrix,
    typicality,
)

__all__ = [name for name in dir() if not name.startswith("_")]
