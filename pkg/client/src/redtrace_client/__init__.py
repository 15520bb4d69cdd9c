"""Client SDK for the redtrace reward-scoring service.

Wraps the HTTP API and adapts it to the reward-function calling
convention of group-sampling RL trainers. All redundancy math stays on
the server; this package performs zero local computation.
"""

from .client import (
    RewardClient,
    ScoreResult,
    SchemaError,
    ServiceError,
    ShapeMismatchError,
    TransportError,
)

__version__ = "0.1.0"

__all__ = [
    "RewardClient",
    "SchemaError",
    "ScoreResult",
    "ServiceError",
    "ShapeMismatchError",
    "TransportError",
]
