"""medlit: entity and relation analytics over medical paper abstracts.

Pipeline: metadata CSV -> entity extraction (local gazetteer or remote
service) -> embedded document store -> SQL-dialect queries, aggregate
analytics, and an HTTP API for interactive exploration.
"""

from .model import (
    AnalyzedPaper,
    CATEGORIES,
    EntityLink,
    HealthEntity,
    HealthRelation,
    PaperRecord,
    PartialDate,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyzedPaper",
    "CATEGORIES",
    "EntityLink",
    "HealthEntity",
    "HealthRelation",
    "PaperRecord",
    "PartialDate",
    "__version__",
]
