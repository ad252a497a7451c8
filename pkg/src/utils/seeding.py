"""Dérivation déterministe des graines par composant."""

import hashlib

import numpy as np

# Libellés utilisés par le pipeline complet; chaque composant tire sa graine de
# split_seed(master, libellé) et reste reproductible indépendamment des autres.
SEED_LABELS: tuple[str, ...] = (
    "social",
    "underlay",
    "embed.subset",
    "embed.placement",
    "analysis.paths",
    "search.interest",
    "search.query",
    "multicast",
)


def split_seed(master: int, label: str) -> int:
    """
    Dérive une sous-graine 64 bits à partir de la graine maître.

    Construction: les 8 premiers octets (big endian) du SHA-256 de
    ``"<master>|<label>"``.

    Args:
        master: Graine maître (entier quelconque)
        label: Libellé du composant (ex: "social")

    Returns:
        Sous-graine dans [0, 2**64)
    """
    digest = hashlib.sha256(f"{int(master)}|{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(seed: int) -> np.random.Generator:
    """Crée un générateur numpy à partir d'une graine 64 bits."""
    return np.random.default_rng(int(seed) % (1 << 64))
