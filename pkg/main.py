"""Script principal du simulateur d'overlays sur réseau social.

Ce script permet de:
1. Générer le graphe social et la topologie transit-stub
2. Placer les membres sur les routeurs stub
3. Analyser la structure du graphe (degrés, clustering, chemins, arbre couvrant)
4. Mesurer la recherche par intérêts et simuler le routage de requêtes
5. Comparer les protocoles multicast (arbre social, ESM, NICE)

Usage:
    # Pipeline complet
    python main.py all --seed 42

    # Étapes individuelles
    python main.py gen-social --config config.example.ini
    python main.py analyze --graph outputs/social_graph.txt
    python main.py multicast-exp --set multicast.sizes=8,16 --jobs 4
"""

import argparse
import logging
import sys
from functools import cached_property
from pathlib import Path
from typing import Optional

import pandas as pd
from rich.console import Console
from rich.table import Table

from src.analysis.graph_analyzer import (
    GraphAnalyzer,
    degree_histogram,
    degree_histogram_frame,
    kruskal_spanning_tree,
)
from src.analysis.multicast_experiment import fig8_experiment, summarise_fig8
from src.analysis.search_experiment import interest_search_experiment
from src.data.graph_io import load_graph, save_graph, save_underlay
from src.data.social_generator import generate_social_graph
from src.data.underlay_generator import generate_transit_stub
from src.models.overlay import Placement
from src.models.social import SocialGraph
from src.models.topology import UnderlayGraph
from src.simulation.embedding import embed, mean_friend_delay, placement_frame, select_subset
from src.simulation.query_router import compare_policies
from src.utils import config as cfg_module
from src.utils.config import ExperimentConfig, load_experiment_config
from src.utils.errors import ConfigError
from src.utils.manifest import RunManifest
from src.utils.seeding import split_seed

logger = logging.getLogger(__name__)
console = Console()


class Pipeline:
    """Étapes du pipeline; chaque artefact est calculé une fois à partir de la configuration."""

    def __init__(self, config: ExperimentConfig, progress: bool = True, graph_path: Optional[Path] = None):
        self.config = config
        self.progress = progress
        self.graph_path = graph_path
        self.output_dir = Path(config.output_dir)
        self.manifest = RunManifest(
            config_hash=config.fingerprint(),
            tool_version=cfg_module.TOOL_VERSION,
            master_seed=config.master_seed,
        )
        self.summary: list[tuple[str, str]] = []

    def seed(self, label: str) -> int:
        return split_seed(self.config.master_seed, label)

    def _write_csv(self, frame: pd.DataFrame, name: str) -> Path:
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
        self.manifest.record(path)
        logger.info(f"✓ {name}: {len(frame)} lignes")
        return path

    @cached_property
    def social_graph(self) -> SocialGraph:
        if self.graph_path is not None:
            return load_graph(self.graph_path)
        return generate_social_graph(
            self.config.social, self.config.geo, self.seed("social"), progress=self.progress
        )

    @cached_property
    def underlay(self) -> UnderlayGraph:
        return generate_transit_stub(self.config.underlay, self.seed("underlay"))

    @cached_property
    def subset(self) -> list[int]:
        return select_subset(self.social_graph, self.config.embed, self.seed("embed.subset"))

    @cached_property
    def placement(self) -> Placement:
        return embed(self.subset, self.social_graph, self.underlay, self.config.embed,
                     self.seed("embed.placement"))

    # -------------------------------------------------------------------------

    def gen_social(self) -> None:
        with self.manifest.stage("gen-social"):
            path = save_graph(self.social_graph, self.output_dir / cfg_module.SOCIAL_GRAPH_FILE)
            self.manifest.record(path)
        g = self.social_graph
        self.summary.append(("Membres / amitiés", f"{g.n} / {g.number_of_edges()}"))

    def gen_underlay(self) -> None:
        with self.manifest.stage("gen-underlay"):
            path = save_underlay(self.underlay, self.output_dir / cfg_module.UNDERLAY_FILE)
            self.manifest.record(path)
        self.summary.append(("Routeurs / liens", f"{self.underlay.size} / {len(self.underlay.links)}"))

    def place_members(self) -> None:
        with self.manifest.stage("embed"):
            self._write_csv(placement_frame(self.placement), cfg_module.PLACEMENT_FILE)
            friend_delay = mean_friend_delay(self.placement, self.underlay, self.social_graph)
        self.summary.append(("Membres placés", str(len(self.placement))))
        self.summary.append(("Délai moyen entre amis (ms)", f"{friend_delay:.2f}"))

    def analyze(self) -> None:
        with self.manifest.stage("analyze"):
            g = self.social_graph
            self._write_csv(degree_histogram_frame(degree_histogram(g)), cfg_module.DEGREE_HISTOGRAM_FILE)
            stats = GraphAnalyzer(g).summary(self.config.sample_pairs, self.seed("analysis.paths"))
            self._write_csv(stats, cfg_module.GRAPH_STATS_FILE)
            tree = kruskal_spanning_tree(g)
            self._write_csv(pd.DataFrame(tree, columns=["u", "v", "weight"]), cfg_module.SPANNING_TREE_FILE)
        values = dict(zip(stats["metric"], stats["value"]))
        for metric in ("mean_degree", "max_degree", "global_clustering", "avg_shortest_path"):
            if metric in values:
                self.summary.append((metric, f"{values[metric]:.4g}"))

    def search_exp(self) -> None:
        search = self.config.search
        with self.manifest.stage("search-exp"):
            sample = min(search.sample_size, self.social_graph.n)
            cdf, summary = interest_search_experiment(
                self.social_graph, sample, search.max_depth, self.seed("search.interest"), self.progress
            )
            self._write_csv(cdf, cfg_module.INTEREST_CDF_FILE)
        for row in summary.itertuples(index=False):
            self.summary.append((f"P(≤3 sauts) {row.category}", f"{row.p_within_3:.1%}"))

    def query_sim(self) -> None:
        search = self.config.search
        with self.manifest.stage("query-sim"):
            members = self.placement.users
            g = self.social_graph.induced(members)
            placement = self.placement.relabel(list(members))
            frame = compare_policies(
                g, search.workload, search.routing_policies(), search.params,
                self.seed("search.query"), placement, self.underlay, self.progress,
            )
            self._write_csv(frame, cfg_module.QUERY_SIM_FILE)
        for policy, rows in frame.groupby("policy", sort=False):
            self.summary.append((f"Succès {policy}", f"{rows['success_rate'].mean():.1%}"))

    def multicast_exp(self) -> None:
        with self.manifest.stage("multicast-exp"):
            frame = fig8_experiment(
                self.social_graph, self.placement, self.underlay, self.config.multicast,
                self.seed("multicast"), self.config.jobs, self.progress,
            )
            self._write_csv(frame, cfg_module.MULTICAST_FILE)
            summary = summarise_fig8(frame)
            self._write_csv(summary, cfg_module.MULTICAST_SUMMARY_FILE)
        for protocol, rows in summary.groupby("protocol", sort=True):
            self.summary.append((f"Délai moyen {protocol} (ms)", f"{rows['mean_delay_ms'].mean():.1f}"))

    def run_all(self) -> None:
        self.gen_social()
        self.gen_underlay()
        self.place_members()
        self.analyze()
        self.search_exp()
        self.query_sim()
        self.multicast_exp()

    def finish(self) -> None:
        self.manifest.write(self.output_dir / cfg_module.MANIFEST_FILE)
        table = Table(title=f"Résultats (graine {self.config.master_seed})")
        table.add_column("Indicateur")
        table.add_column("Valeur", justify="right")
        for name, value in self.summary:
            table.add_row(name, value)
        console.print(table)


# Sous-commande → méthode de Pipeline
COMMANDS: dict[str, str] = {
    "gen-social": "gen_social",
    "gen-underlay": "gen_underlay",
    "embed": "place_members",
    "analyze": "analyze",
    "search-exp": "search_exp",
    "query-sim": "query_sim",
    "multicast-exp": "multicast_exp",
    "all": "run_all",
}

HELP = {
    "gen-social": "Générer le graphe social",
    "gen-underlay": "Générer la topologie transit-stub",
    "embed": "Placer les membres sur les routeurs stub",
    "analyze": "Analyser le graphe (degrés, clustering, chemins, arbre couvrant)",
    "search-exp": "Distance aux intérêts similaires (CDF par catégorie)",
    "query-sim": "Simuler le routage de requêtes et comparer les politiques",
    "multicast-exp": "Comparer les protocoles multicast selon la taille du groupe",
    "all": "Exécuter le pipeline complet",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Fichier de configuration INI")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="SECTION.CLÉ=VALEUR",
        help="Surcharger une valeur de configuration (répétable)",
    )
    common.add_argument("--seed", type=int, help="Graine maître (remplace master_seed)")
    common.add_argument(
        "--jobs", type=int, help=f"Nombre de threads (défaut: ${cfg_module.JOBS_ENV_VAR} ou 1)"
    )
    common.add_argument("--output-dir", type=Path, help="Répertoire de sortie (défaut: outputs/)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Journalisation détaillée")
    verbosity.add_argument("--quiet", action="store_true", help="Avertissements uniquement, sans progression")

    parser = argparse.ArgumentParser(
        description="Simulation d'overlays P2P sur un réseau social synthétique"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name, parents=[common], help=HELP[name])
        if name == "analyze":
            sub.add_argument("--graph", type=Path, help="Analyser un graphe existant (format socialgraph)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s", force=True
    )

    try:
        config = load_experiment_config(
            args.config, args.overrides, seed=args.seed, jobs=args.jobs, output_dir=args.output_dir
        )
        pipeline = Pipeline(config, progress=not args.quiet, graph_path=getattr(args, "graph", None))
        getattr(pipeline, COMMANDS[args.command])()
        pipeline.finish()
    except ConfigError as e:
        logger.error(f"❌ Configuration: {e}")
        return 1
    except (ValueError, KeyError, OSError) as e:
        logger.error(f"❌ {args.command}: {e}")
        return 1

    logger.info(f"✅ {args.command} terminé")
    return 0


if __name__ == "__main__":
    sys.exit(main())
