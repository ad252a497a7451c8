"""Expérience multicast: délai de livraison moyen selon la taille du groupe d'amis."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import networkx as nx
import pandas as pd
from tqdm import tqdm

from src.models.overlay import MulticastGroup, MulticastParams, Placement
from src.models.social import SocialGraph
from src.models.topology import UnderlayGraph
from src.simulation.multicast import (
    DeliveryStats,
    build_esm_tree,
    build_nice_hierarchy,
    build_social_tree,
    delay_matrix,
    delivery_stats,
    nice_delivery,
    select_friend_group,
)
from src.utils.errors import GroupSizeError
from src.utils.seeding import make_rng, split_seed

logger = logging.getLogger(__name__)

PROTOCOLS = ("social", "esm", "nice")
FIG8_COLUMNS = [
    "protocol", "group_size", "trial", "mean_delay_ms", "max_delay_ms", "mean_stretch", "max_stress",
]
SUMMARY_COLUMNS = [
    "protocol", "group_size", "trials",
    "mean_delay_ms", "std_delay_ms", "mean_stretch", "std_stretch", "mean_max_stress", "std_max_stress",
]


class MulticastExperiment:
    """Compare les trois protocoles sur les mêmes groupes d'amis placés."""

    def __init__(
        self,
        g: SocialGraph,
        placement: Placement,
        underlay: UnderlayGraph,
        params: Optional[MulticastParams] = None,
        seed: int = 0,
    ):
        self.g = g
        self.placement = placement
        self.underlay = underlay
        self.params = params or MulticastParams()
        self.seed = seed
        self.allowed = set(placement.users)

        placed = nx.Graph()
        placed.add_nodes_from(self.allowed)
        placed.add_edges_from((u, v) for u, v in g.edges() if u in self.allowed and v in self.allowed)
        self._component_size = {
            u: len(component) for component in nx.connected_components(placed) for u in component
        }
        self._placed_degree = dict(placed.degree())

    def pick_group(self, size: int, trial: int) -> MulticastGroup:
        """
        Groupe d'amis de taille size: un membre placé et son cercle d'amis placés.

        La source est tirée parmi les membres dont le cercle couvre le groupe
        (degré placé ≥ size − 1); à défaut, parmi les `trials` membres aux plus
        grands cercles, le groupe se complétant alors par des amis d'amis.

        Raises:
            GroupSizeError: aucune composante placée assez grande
        """
        eligible = sorted(u for u, s in self._component_size.items() if s >= size)
        if not eligible:
            raise GroupSizeError(size, max(self._component_size.values(), default=0))
        sources = [u for u in eligible if self._placed_degree[u] >= size - 1]
        if not sources:
            widest = sorted(eligible, key=lambda u: (-self._placed_degree[u], u))
            sources = sorted(widest[: max(1, self.params.trials)])
        rng = make_rng(split_seed(self.seed, f"multicast.group.{size}.{trial}"))
        seed_user = sources[int(rng.integers(len(sources)))]
        return select_friend_group(self.g, seed_user, size, self.allowed)

    def evaluate(self, group: MulticastGroup, trial: int) -> dict[str, DeliveryStats]:
        """Construit et évalue les trois arbres pour un groupe."""
        p = self.params
        matrix = delay_matrix(group.members, self.placement, self.underlay)
        social = build_social_tree(
            group, self.g, self.placement, self.underlay, p.social_tree_mode, matrix=matrix
        )
        esm, _ = build_esm_tree(
            group, self.placement, self.underlay, p.mesh_degree, p.improvement_rounds,
            seed=split_seed(self.seed, f"multicast.esm.{group.size}.{trial}"), matrix=matrix,
        )
        hierarchy = build_nice_hierarchy(group, self.placement, self.underlay, p.nice_k, matrix=matrix)
        nice = nice_delivery(hierarchy, group.source, self.placement, self.underlay)
        return {
            "social": delivery_stats(social, self.underlay, self.placement),
            "esm": delivery_stats(esm, self.underlay, self.placement),
            "nice": delivery_stats(nice, self.underlay, self.placement),
        }

    def _cell(self, cell: tuple[int, int]) -> list[tuple]:
        size, trial = cell
        results = self.evaluate(self.pick_group(size, trial), trial)
        return [
            (protocol, size, trial, s.mean_delay_ms, s.max_delay_ms, s.mean_stretch, s.max_stress)
            for protocol, s in ((name, results[name]) for name in PROTOCOLS)
        ]

    def run(self, jobs: int = 1, progress: bool = False) -> pd.DataFrame:
        """
        Exécute toutes les cellules (taille, essai).

        Args:
            jobs: Nombre de threads
            progress: Affiche une barre de progression

        Returns:
            DataFrame `protocol,group_size,trial,...` dans l'ordre (taille, essai, protocole)
        """
        cells = [(size, trial) for size in self.params.sizes for trial in range(self.params.trials)]
        logger.info(f"Expérience multicast: {len(cells)} groupes, {jobs} thread(s)")
        rows: list[tuple] = []
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
            for cell_rows in tqdm(executor.map(self._cell, cells), total=len(cells),
                                  desc="Groupes multicast", disable=not progress):
                rows.extend(cell_rows)
        frame = pd.DataFrame(rows, columns=FIG8_COLUMNS)
        logger.info(f"✓ Expérience multicast terminée: {len(frame)} lignes")
        return frame


def fig8_experiment(
    g: SocialGraph,
    placement: Placement,
    underlay: UnderlayGraph,
    params: Optional[MulticastParams] = None,
    seed: int = 0,
    jobs: int = 1,
    progress: bool = False,
) -> pd.DataFrame:
    """Délai moyen par protocole et taille de groupe (voir MulticastExperiment)."""
    return MulticastExperiment(g, placement, underlay, params, seed).run(jobs, progress)


def summarise_fig8(frame: pd.DataFrame) -> pd.DataFrame:
    """Moyenne et écart-type (population) par (protocole, taille de groupe)."""
    grouped = frame.groupby(["protocol", "group_size"], sort=True)
    summary = grouped.agg(
        trials=("trial", "count"),
        mean_delay_ms=("mean_delay_ms", "mean"),
        std_delay_ms=("mean_delay_ms", lambda s: float(s.std(ddof=0))),
        mean_stretch=("mean_stretch", "mean"),
        std_stretch=("mean_stretch", lambda s: float(s.std(ddof=0))),
        mean_max_stress=("max_stress", "mean"),
        std_max_stress=("max_stress", lambda s: float(s.std(ddof=0))),
    ).reset_index()
    return summary[SUMMARY_COLUMNS]
