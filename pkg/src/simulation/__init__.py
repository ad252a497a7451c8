"""Placement, routage de requêtes et multicast applicatif."""

from src.simulation.embedding import embed, select_subset, user_delay
from src.simulation.multicast import (
    build_esm_tree,
    build_nice_hierarchy,
    build_social_tree,
    delivery_stats,
    nice_delivery,
    select_friend_group,
)
from src.simulation.query_router import QuerySimulator, compare_policies, run_query_sim

__all__ = [
    "QuerySimulator",
    "build_esm_tree",
    "build_nice_hierarchy",
    "build_social_tree",
    "compare_policies",
    "delivery_stats",
    "embed",
    "nice_delivery",
    "run_query_sim",
    "select_friend_group",
    "select_subset",
    "user_delay",
]
