"""Explainable graph-based recommendation from ratings and aspect opinions.

Ratings and aspect-level opinion tuples become a typed knowledge graph, a
complex-embedding model is trained on its edges with a margin ranking loss,
and cosine similarity in the learned space drives recommendation, evaluation,
and aspect-level explanation, served over a small HTTP API.
"""

from .graph import (
    AspectOpinionRecord,
    GraphVariant,
    KnowledgeGraph,
    NodeId,
    NodeKind,
    RatingRecord,
    RelationType,
    Triple,
    build_graph,
    graph_stats,
    load_graph,
    save_graph,
)
from .embedding import EmbeddingModel, TrainingConfig, initialize_model, train
from .checkpoint import load_model, save_model
from .recommend import RankedList, cosine, flatten, nearest_users, recommend_top_n
from .evaluation import MetricReport, evaluate, kfold_split, metrics_at_k, paired_bonferroni
from .explain import (
    ExplanationBundle,
    ExplanationStats,
    HighlightedReview,
    Projection2D,
    build_explanation,
    explanation_stats,
    highlight_aspects,
    project_users_2d,
)

__version__ = "0.1.0"

__all__ = [
    "AspectOpinionRecord",
    "EmbeddingModel",
    "ExplanationBundle",
    "ExplanationStats",
    "GraphVariant",
    "HighlightedReview",
    "KnowledgeGraph",
    "MetricReport",
    "NodeId",
    "NodeKind",
    "Projection2D",
    "RankedList",
    "RatingRecord",
    "RelationType",
    "TrainingConfig",
    "Triple",
    "build_explanation",
    "build_graph",
    "cosine",
    "evaluate",
    "explanation_stats",
    "flatten",
    "graph_stats",
    "highlight_aspects",
    "initialize_model",
    "kfold_split",
    "load_graph",
    "load_model",
    "metrics_at_k",
    "nearest_users",
    "paired_bonferroni",
    "project_users_2d",
    "recommend_top_n",
    "save_graph",
    "save_model",
    "train",
    "__version__",
]
