"""Génération et lecture/écriture des graphes."""

from src.data.graph_io import load_graph, load_underlay, save_graph, save_underlay
from src.data.social_generator import SocialGraphGenerator, generate_social_graph
from src.data.underlay_generator import TransitStubGenerator, generate_transit_stub

__all__ = [
    "SocialGraphGenerator",
    "TransitStubGenerator",
    "generate_social_graph",
    "generate_transit_stub",
    "load_graph",
    "load_underlay",
    "save_graph",
    "save_underlay",
]
