"""Modèles de données."""

from src.models.overlay import (
    EmbedParams,
    MulticastGroup,
    MulticastParams,
    OverlayTree,
    Placement,
    QuerySimParams,
    RoutingPolicy,
    Workload,
)
from src.models.social import (
    CATEGORIES,
    GeoModel,
    GeoRegion,
    InterestCategory,
    SocialGenParams,
    SocialGraph,
    UserProfile,
)
from src.models.topology import Router, TransitStubParams, UnderlayGraph, UnderlayLink

__all__ = [
    "CATEGORIES",
    "EmbedParams",
    "GeoModel",
    "GeoRegion",
    "InterestCategory",
    "MulticastGroup",
    "MulticastParams",
    "OverlayTree",
    "Placement",
    "QuerySimParams",
    "Router",
    "RoutingPolicy",
    "SocialGenParams",
    "SocialGraph",
    "TransitStubParams",
    "UnderlayGraph",
    "UnderlayLink",
    "UserProfile",
    "Workload",
]
