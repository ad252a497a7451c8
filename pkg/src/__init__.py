"""
Simulation d'overlays P2P sur réseau social

Package pour générer un graphe social synthétique, le plonger dans une
topologie transit-stub et comparer recherche et multicast applicatif.
"""

__version__ = "0.1.0"
__author__ = "Jules Diaz"
