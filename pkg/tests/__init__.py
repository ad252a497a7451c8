"""Tests du projet."""
