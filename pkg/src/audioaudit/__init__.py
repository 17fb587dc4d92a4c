"""Audio dataset quality auditing toolkit.

Ranks samples for three issue types (off-topic, near-duplicate, label-error)
from self-supervised embeddings, benchmarks the rankings under reproducible
synthetic corruption, and serves them to human reviewers.
"""

__version__ = "0.1.0"

from .embeddings import (
    EmbeddingSet,
    SegmentEmbeddings,
    aggregate_mean_pool,
    gen_synthetic_embeddings,
    load_segment_embeddings,
    write_segment_embeddings,
)
from .indicators import (
    DistanceMatrix,
    RankedList,
    pairwise_distances,
    rank_label_errors,
    rank_near_duplicates,
    rank_off_topic,
)
from .manifest import DatasetManifest, SampleRecord, load_manifest
from .metrics import (
    EvaluationReport,
    auroc,
    average_precision,
    effort_summary,
    evaluate_ranking,
    foe_curve,
)

__all__ = [
    "DatasetManifest",
    "DistanceMatrix",
    "EmbeddingSet",
    "EvaluationReport",
    "RankedList",
    "SampleRecord",
    "SegmentEmbeddings",
    "aggregate_mean_pool",
    "auroc",
    "average_precision",
    "effort_summary",
    "evaluate_ranking",
    "foe_curve",
    "gen_synthetic_embeddings",
    "load_manifest",
    "load_segment_embeddings",
    "pairwise_distances",
    "rank_label_errors",
    "rank_near_duplicates",
    "rank_off_topic",
    "write_segment_embeddings",
]
