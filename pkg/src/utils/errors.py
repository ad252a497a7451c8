"""Exceptions métier du simulateur."""

from typing import Optional


class GraphFormatError(ValueError):
    """Fichier de graphe ou de topologie mal formé."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        prefix = f"ligne {lineno}: " if lineno is not None else ""
        super().__init__(f"{prefix}{message}")


class DisconnectedGraphError(ValueError):
    """Opération qui exige un graphe connexe."""

    def __init__(self, components: int):
        self.components = components
        super().__init__(f"Graphe non connexe: {components} composantes")


class CapacityError(ValueError):
    """Capacité des domaines stub insuffisante pour le placement."""

    def __init__(self, users: int, stub_domains: int, capacity: int):
        self.required_capacity = -(-users // max(stub_domains, 1))
        super().__init__(
            f"Capacité insuffisante: {users} utilisateurs pour {stub_domains} domaines stub "
            f"de capacité {capacity} (capacité requise: {self.required_capacity})"
        )


class PlacementError(KeyError):
    """Utilisateur absent du placement."""


class GroupSizeError(ValueError):
    """Composante sociale trop petite pour le groupe demandé."""

    def __init__(self, requested: int, achievable_size: int):
        self.achievable_size = achievable_size
        super().__init__(
            f"Groupe de {requested} membres impossible: taille atteignable {achievable_size}"
        )


class ConfigError(ValueError):
    """Fichier de configuration invalide."""
