"""Expérience de recherche par centres d'intérêt: distance aux membres similaires."""

import logging
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.analysis.graph_analyzer import interest_search
from src.models.social import CATEGORIES, SocialGraph
from src.utils.seeding import make_rng

logger = logging.getLogger(__name__)

CDF_COLUMNS = ["category", "hops", "cum_probability"]
SUMMARY_COLUMNS = ["category", "sampled", "found", "p_within_3", "median_hops"]


def sample_hops(
    g: SocialGraph,
    sample_size: int = 1000,
    max_depth: Optional[int] = None,
    seed: int = 0,
    progress: bool = False,
) -> pd.DataFrame:
    """
    Sauts jusqu'au plus proche membre partageant un jeton, par membre et catégorie.

    Args:
        g: Graphe social
        sample_size: Nombre de membres tirés sans remise (≤ n)
        max_depth: Profondeur maximale du parcours (None: illimitée)
        seed: Graine de l'échantillonnage
        progress: Affiche une barre de progression

    Returns:
        DataFrame `user,category,hops` (NaN si aucun membre trouvé)
    """
    if not 0 <= sample_size <= g.n:
        raise ValueError(f"sample_size ({sample_size}) hors de 0..{g.n}")
    rng = make_rng(seed)
    users = sorted(int(u) for u in rng.choice(g.n, size=sample_size, replace=False))

    rows = []
    for user in tqdm(users, desc="Recherche par intérêts", disable=not progress):
        for category in CATEGORIES:
            hops = interest_search(g, user, category, g.profiles[user].tokens(category), max_depth)
            rows.append((user, category.value, np.nan if hops is None else float(hops)))
    return pd.DataFrame(rows, columns=["user", "category", "hops"])


def hops_cdf(samples: pd.DataFrame) -> pd.DataFrame:
    """
    Fonction de répartition des sauts par catégorie.

    Les membres sans correspondance restent au dénominateur: la probabilité
    cumulée plafonne sous 1 quand certains ne trouvent rien.
    """
    rows = []
    for category in CATEGORIES:
        hops = samples.loc[samples["category"] == category.value, "hops"]
        total = len(hops)
        found = hops.dropna().astype(int)
        if total == 0 or found.empty:
            continue
        counts = found.value_counts().sort_index()
        cumulative = counts.cumsum() / total
        rows.extend((category.value, int(h), float(p)) for h, p in cumulative.items())
    return pd.DataFrame(rows, columns=CDF_COLUMNS)


def hops_summary(samples: pd.DataFrame) -> pd.DataFrame:
    """P(correspondance en ≤ 3 sauts) et médiane des sauts (infinie si non trouvée) par catégorie."""
    rows = []
    for category in CATEGORIES:
        hops = samples.loc[samples["category"] == category.value, "hops"]
        if hops.empty:
            continue
        values = hops.fillna(np.inf).to_numpy(dtype=float)
        rows.append((
            category.value,
            len(values),
            int(np.isfinite(values).sum()),
            float((values <= 3).mean()),
            float(np.median(values)),
        ))
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def interest_search_experiment(
    g: SocialGraph,
    sample_size: int = 1000,
    max_depth: Optional[int] = None,
    seed: int = 0,
    progress: bool = False,
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """
    Mesure la proximité des intérêts sur un échantillon de membres.

    Returns:
        (CDF `category,hops,cum_probability`, résumé par catégorie)
    """
    samples = sample_hops(g, sample_size, max_depth, seed, progress)
    cdf = hops_cdf(samples)
    summary = hops_summary(samples)
    if not summary.empty:
        logger.info(
            f"✓ Recherche par intérêts sur {sample_size} membres: "
            f"P(≤3 sauts) moyenne {summary['p_within_3'].mean():.1%}"
        )
    return cdf, summary
