"""Content-based image recommendation with cue-driven foraging sessions."""

from .catalog import (
    Board,
    BoardFormatError,
    CatalogValidationError,
    DatasetSplit,
    EmbeddingVector,
    ImageItem,
    Violation,
    load_board,
    serialize_board,
    split_dataset,
    validate_catalog,
)
from .features import (
    Cue,
    KeywordProfile,
    NaiveBayesModel,
    assemble_cues,
    classify,
    extract_keywords,
    kmeans_colors,
    nearest_palette_label,
    train_naive_bayes,
)
from .forage import (
    AccessCost,
    Diet,
    ForagingSession,
    ImagePatch,
    apply_preference,
    decompose_patches,
    rank_results,
    replay_transcript,
    export_transcript,
    session_metrics,
    start_session,
)
from .index import VectorIndex, build_index, cosine, knn, similar_items
from .scent import (
    PreferenceEvent,
    PreferenceLog,
    ScentReport,
    ScentScore,
    frequencies,
    record_preference,
    scale_scent,
    scent_of_image,
    scent_report,
)

__version__ = "0.1.0"
