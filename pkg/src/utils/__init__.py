"""Utilitaires du projet."""

from src.utils.errors import (
    CapacityError,
    ConfigError,
    DisconnectedGraphError,
    GraphFormatError,
    GroupSizeError,
    PlacementError,
)
from src.utils.seeding import make_rng, split_seed

__all__ = [
    "CapacityError",
    "ConfigError",
    "DisconnectedGraphError",
    "GraphFormatError",
    "GroupSizeError",
    "PlacementError",
    "make_rng",
    "split_seed",
]
