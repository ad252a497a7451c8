"""Configuration globale du projet et chargement des fichiers d'expérience."""

import configparser
import hashlib
import os
import typing
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Final, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from src.models.overlay import EmbedParams, MulticastParams, QuerySimParams, RoutingPolicy, Workload
from src.models.social import GeoModel, SocialGenParams
from src.models.topology import TransitStubParams
from src.utils.errors import ConfigError

# Chemins du projet
PROJECT_ROOT: Final[Path] = Path(__file__).parent.parent.parent
OUTPUTS_DIR: Final[Path] = PROJECT_ROOT / "outputs"

TOOL_VERSION: Final[str] = "0.1.0"
DEFAULT_MASTER_SEED: Final[int] = 42
JOBS_ENV_VAR: Final[str] = "SOCNET_SIM_JOBS"

# Fichiers produits par le pipeline complet
SOCIAL_GRAPH_FILE: Final[str] = "social_graph.txt"
DEGREE_HISTOGRAM_FILE: Final[str] = "degree_histogram.csv"
GRAPH_STATS_FILE: Final[str] = "graph_stats.csv"
SPANNING_TREE_FILE: Final[str] = "spanning_tree.csv"
UNDERLAY_FILE: Final[str] = "underlay.txt"
PLACEMENT_FILE: Final[str] = "placement.csv"
INTEREST_CDF_FILE: Final[str] = "interest_search_cdf.csv"
QUERY_SIM_FILE: Final[str] = "query_sim.csv"
MULTICAST_FILE: Final[str] = "multicast_fig8.csv"
MULTICAST_SUMMARY_FILE: Final[str] = "multicast_summary.csv"
MANIFEST_FILE: Final[str] = "run_manifest.txt"


class SearchConfig(BaseModel):
    """Recherche par intérêts et simulation de requêtes."""

    policies: list[str] = Field(
        default_factory=lambda: ["flood", "highest_degree(3)", "interest_weighted(3)"],
        min_length=1,
    )
    sample_size: int = Field(default=1000, ge=0)
    max_depth: Optional[int] = Field(default=None, ge=1)
    workload: Workload = Field(default_factory=Workload)
    params: QuerySimParams = Field(default_factory=QuerySimParams)

    @field_validator("policies")
    @classmethod
    def _known_policies(cls, value: list[str]) -> list[str]:
        return [RoutingPolicy.parse(text).label for text in value]

    def routing_policies(self) -> list[RoutingPolicy]:
        return [RoutingPolicy.parse(text) for text in self.policies]


class ExperimentConfig(BaseModel):
    """Configuration complète d'une expérience."""

    master_seed: int = DEFAULT_MASTER_SEED
    output_dir: Path = OUTPUTS_DIR
    jobs: int = Field(default=1, ge=1)
    sample_pairs: int = Field(default=500, ge=1)
    social: SocialGenParams = Field(default_factory=SocialGenParams)
    geo: GeoModel = Field(default_factory=GeoModel)
    underlay: TransitStubParams = Field(default_factory=TransitStubParams)
    embed: EmbedParams = Field(default_factory=EmbedParams)
    search: SearchConfig = Field(default_factory=SearchConfig)
    multicast: MulticastParams = Field(default_factory=MulticastParams)

    def fingerprint(self) -> str:
        """SHA-256 des paramètres qui déterminent les résultats (hors sortie et threads)."""
        payload = self.model_dump_json(exclude={"output_dir", "jobs"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# =============================================================================
# LECTURE DES FICHIERS DE CONFIGURATION
# =============================================================================

_SECTIONS: Final[tuple[str, ...]] = (
    "experiment", "social", "geo", "underlay", "embed", "search", "multicast",
)


def _is_sequence(model: type[BaseModel], key: str) -> bool:
    annotation = model.model_fields[key].annotation
    return typing.get_origin(annotation) in (list, tuple)


def _convert(model: type[BaseModel], key: str, raw: str) -> Any:
    """Valeur brute → valeur pour pydantic (listes séparées par des virgules)."""
    if key not in model.model_fields:
        raise ConfigError(f"Clé inconnue '{key}' pour {model.__name__}")
    raw = raw.strip()
    if _is_sequence(model, key):
        return [item.strip() for item in raw.split(",") if item.strip()]
    if raw.lower() in ("none", ""):
        return None
    return raw


def _split_override(text: str) -> tuple[str, str, str]:
    target, sep, value = text.partition("=")
    section, dot, key = target.strip().partition(".")
    if not sep or not dot or not key:
        raise ConfigError(f"Surcharge invalide '{text}' (attendu section.clé=valeur)")
    return section, key.strip(), value.strip()


def _read_sections(path: Optional[Path], overrides: Iterable[str]) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"Fichier de configuration introuvable: {path}")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as e:
            raise ConfigError(f"Configuration illisible ({path}): {e}") from None

    sections: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"Section inconnue [{section}]")
        sections[section] = dict(parser.items(section))
    for text in overrides:
        section, key, value = _split_override(text)
        if section not in _SECTIONS:
            raise ConfigError(f"Section inconnue [{section}] dans '{text}'")
        sections.setdefault(section, {})[key] = value
    return sections


def _social_values(values: dict[str, str]) -> dict[str, Any]:
    result: dict[str, Any] = {}
    homophily: dict[str, str] = {}
    for key, raw in values.items():
        if key.startswith("homophily."):
            homophily[key.split(".", 1)[1]] = raw.strip()
        else:
            result[key] = _convert(SocialGenParams, key, raw)
    if homophily:
        result["homophily"] = homophily
    return result


def _geo_values(values: dict[str, str]) -> dict[str, Any]:
    regions = []
    for key, raw in values.items():
        if not key.startswith("region."):
            raise ConfigError(f"Clé inconnue '{key}' dans [geo] (attendu region.<nom>)")
        parts = [part.strip() for part in raw.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"{key}: attendu 'poids, lat, lon, dispersion_km'")
        weight, lat, lon, dispersion = parts
        regions.append({
            "name": key.split(".", 1)[1],
            "weight": weight,
            "lat": lat,
            "lon": lon,
            "dispersion_km": dispersion,
        })
    return {"regions": regions} if regions else {}


def _search_values(values: dict[str, str]) -> dict[str, Any]:
    result: dict[str, Any] = {}
    workload: dict[str, Any] = {}
    params: dict[str, Any] = {}
    for key, raw in values.items():
        if key in Workload.model_fields:
            workload[key] = _convert(Workload, key, raw)
        elif key in QuerySimParams.model_fields:
            params[key] = _convert(QuerySimParams, key, raw)
        else:
            result[key] = _convert(SearchConfig, key, raw)
    if workload:
        result["workload"] = workload
    if params:
        result["params"] = params
    return result


def load_experiment_config(
    path: Optional[Path] = None,
    overrides: Iterable[str] = (),
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> ExperimentConfig:
    """
    Charge la configuration d'une expérience.

    Priorité: options de ligne de commande > surcharges --set > fichier > défauts.
    Le nombre de threads vient de jobs, sinon de la variable SOCNET_SIM_JOBS.

    Args:
        path: Fichier INI (optionnel)
        overrides: Surcharges "section.clé=valeur"
        seed: Graine maître (remplace master_seed)
        jobs: Nombre de threads
        output_dir: Répertoire de sortie

    Returns:
        ExperimentConfig validée

    Raises:
        ConfigError: fichier, clé ou valeur invalide
    """
    sections = _read_sections(path, overrides)
    data: dict[str, Any] = {}
    for key, raw in sections.get("experiment", {}).items():
        data[key] = _convert(ExperimentConfig, key, raw)
    if "social" in sections:
        data["social"] = _social_values(sections["social"])
    if "geo" in sections:
        data["geo"] = _geo_values(sections["geo"])
    if "underlay" in sections:
        data["underlay"] = {k: _convert(TransitStubParams, k, v) for k, v in sections["underlay"].items()}
    if "embed" in sections:
        data["embed"] = {k: _convert(EmbedParams, k, v) for k, v in sections["embed"].items()}
    if "search" in sections:
        data["search"] = _search_values(sections["search"])
    if "multicast" in sections:
        data["multicast"] = {k: _convert(MulticastParams, k, v) for k, v in sections["multicast"].items()}

    if seed is not None:
        data["master_seed"] = seed
    if output_dir is not None:
        data["output_dir"] = output_dir
    if jobs is None and os.environ.get(JOBS_ENV_VAR):
        try:
            jobs = int(os.environ[JOBS_ENV_VAR])
        except ValueError:
            raise ConfigError(f"{JOBS_ENV_VAR} doit être un entier") from None
    if jobs is not None:
        data["jobs"] = jobs

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"Paramètre invalide {location}: {first['msg']}") from None
