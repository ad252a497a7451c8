"""Analyses du graphe et expériences."""

from src.analysis.graph_analyzer import GraphAnalyzer
from src.analysis.multicast_experiment import MulticastExperiment, fig8_experiment, summarise_fig8
from src.analysis.search_experiment import interest_search_experiment

__all__ = [
    "GraphAnalyzer",
    "MulticastExperiment",
    "fig8_experiment",
    "interest_search_experiment",
    "summarise_fig8",
]
