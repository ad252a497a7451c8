"""Lecture et écriture des fichiers texte du graphe social et de la topologie."""

import logging
import math
from collections.abc import Iterator
from pathlib import Path
from typing import Union

from src.models.social import CATEGORIES, InterestCategory, SocialGraph, UserProfile
from src.models.topology import LinkLevel, Router, RouterKind, UnderlayGraph, UnderlayLink
from src.utils.errors import GraphFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SOCIAL_MAGIC = "socialgraph"
UNDERLAY_MAGIC = "underlay"
FORMAT_VERSION = "v1"


def _float_text(value: float) -> str:
    # repr est la plus courte écriture qui relit exactement le même flottant
    return repr(float(value))


def _parse_int(text: str, lineno: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise GraphFormatError(f"{what} invalide: {text!r}", lineno) from None


def _parse_float(text: str, lineno: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise GraphFormatError(f"{what} invalide: {text!r}", lineno) from None
    if math.isnan(value) or math.isinf(value):
        raise GraphFormatError(f"{what} non fini: {text!r}", lineno)
    return value


def _read_lines(path: PathLike) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    if not text:
        raise GraphFormatError("fichier vide (en-tête manquant)", 1)
    return text.splitlines()


def _parse_header(lines: list[str], magic: str) -> tuple[int, int]:
    parts = lines[0].split()
    if len(parts) != 4 or parts[0] != magic or parts[1] != FORMAT_VERSION:
        raise GraphFormatError(f"en-tête attendu '{magic} {FORMAT_VERSION} <n> <m>'", 1)
    count = _parse_int(parts[2], 1, "nombre de nœuds")
    links = _parse_int(parts[3], 1, "nombre d'arêtes")
    if count < 0 or links < 0:
        raise GraphFormatError("compteurs négatifs dans l'en-tête", 1)
    expected = 1 + count + links
    if len(lines) < expected:
        raise GraphFormatError(
            f"fichier tronqué: {len(lines)} lignes, {expected} attendues", len(lines) + 1
        )
    if len(lines) > expected:
        raise GraphFormatError("lignes en trop après les arêtes", expected + 1)
    return count, links


# =============================================================================
# GRAPHE SOCIAL
# =============================================================================


def _profile_line(profile: UserProfile) -> str:
    interests = ";".join(
        f"{category.value}=" + ",".join(str(tok) for tok in profile.tokens(category))
        for category in CATEGORIES
    )
    return (
        f"P {profile.id} {profile.region} {_float_text(profile.lat)} "
        f"{_float_text(profile.lon)} {interests}"
    )


def _iter_social_lines(g: SocialGraph) -> Iterator[str]:
    yield f"{SOCIAL_MAGIC} {FORMAT_VERSION} {g.n} {g.number_of_edges()}"
    for profile in g.profiles:
        yield _profile_line(profile)
    for u, v in g.edges():
        yield f"E {u} {v}"


def save_graph(g: SocialGraph, path: PathLike) -> Path:
    """
    Sauvegarde le graphe au format texte `socialgraph v1`.

    Args:
        g: Graphe social
        path: Fichier de sortie

    Returns:
        Chemin écrit
    """
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text("\n".join(_iter_social_lines(g)) + "\n", encoding="utf-8")
    logger.info(f"✓ Graphe sauvegardé: {output}")
    return output


def _parse_profile(line: str, lineno: int, expected_id: int) -> UserProfile:
    parts = line.split(" ")
    if len(parts) != 6 or parts[0] != "P":
        raise GraphFormatError("ligne de profil attendue 'P <id> <region> <lat> <lon> <intérêts>'", lineno)
    user_id = _parse_int(parts[1], lineno, "identifiant")
    if user_id != expected_id:
        raise GraphFormatError(f"identifiant {user_id} au lieu de {expected_id}", lineno)
    region = _parse_int(parts[2], lineno, "région")
    lat = _parse_float(parts[3], lineno, "latitude")
    lon = _parse_float(parts[4], lineno, "longitude")
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise GraphFormatError(f"coordonnées hors bornes ({lat}, {lon})", lineno)

    interests: dict[InterestCategory, tuple[int, ...]] = {}
    for chunk in parts[5].split(";"):
        name, sep, tokens = chunk.partition("=")
        if not sep:
            raise GraphFormatError(f"intérêt mal formé: {chunk!r}", lineno)
        try:
            category = InterestCategory(name)
        except ValueError:
            raise GraphFormatError(f"catégorie inconnue: {name!r}", lineno) from None
        values = tuple(_parse_int(tok, lineno, "jeton") for tok in tokens.split(",") if tok)
        if not values:
            raise GraphFormatError(f"aucun jeton pour {name}", lineno)
        interests[category] = values
    missing = [c.value for c in CATEGORIES if c not in interests]
    if missing:
        raise GraphFormatError(f"catégories manquantes: {', '.join(missing)}", lineno)
    return UserProfile(id=user_id, region=region, lat=lat, lon=lon, interests=interests)


def load_graph(path: PathLike) -> SocialGraph:
    """
    Charge un graphe au format texte `socialgraph v1`.

    Raises:
        GraphFormatError: fichier mal formé (avec numéro de ligne)
    """
    lines = _read_lines(path)
    n, m = _parse_header(lines, SOCIAL_MAGIC)
    profiles = [_parse_profile(lines[1 + i], 2 + i, i) for i in range(n)]

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for offset in range(m):
        lineno = 2 + n + offset
        parts = lines[lineno - 1].split(" ")
        if len(parts) != 3 or parts[0] != "E":
            raise GraphFormatError("ligne d'arête attendue 'E <u> <v>'", lineno)
        u = _parse_int(parts[1], lineno, "extrémité")
        v = _parse_int(parts[2], lineno, "extrémité")
        if not (0 <= u < v < n):
            raise GraphFormatError(f"arête ({u}, {v}) invalide (u < v < {n} requis)", lineno)
        if (u, v) in seen:
            raise GraphFormatError(f"arête dupliquée ({u}, {v})", lineno)
        seen.add((u, v))
        edges.append((u, v))

    graph = SocialGraph.from_edges(n, edges, profiles)
    logger.info(f"✓ Graphe chargé: {graph}")
    return graph


# =============================================================================
# TOPOLOGIE TRANSIT-STUB
# =============================================================================


def save_underlay(g: UnderlayGraph, path: PathLike) -> Path:
    """Sauvegarde la topologie au format texte `underlay v1`."""
    lines = [f"{UNDERLAY_MAGIC} {FORMAT_VERSION} {len(g.routers)} {len(g.links)}"]
    for router in g.routers:
        stub = "-" if router.stub_domain is None else str(router.stub_domain)
        lines.append(f"R {router.id} {router.kind.value} {router.transit_domain} {stub}")
    for link in g.links:
        lines.append(f"L {link.u} {link.v} {_float_text(link.delay_ms)} {link.level.value}")

    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"✓ Topologie sauvegardée: {output}")
    return output


def load_underlay(path: PathLike) -> UnderlayGraph:
    """
    Charge une topologie au format texte `underlay v1`.

    Raises:
        GraphFormatError: fichier mal formé (avec numéro de ligne)
    """
    lines = _read_lines(path)
    count, m = _parse_header(lines, UNDERLAY_MAGIC)

    routers: list[Router] = []
    for i in range(count):
        lineno = 2 + i
        parts = lines[lineno - 1].split(" ")
        if len(parts) != 5 or parts[0] != "R":
            raise GraphFormatError("ligne de routeur attendue 'R <id> <kind> <tdom> <sdom|->'", lineno)
        router_id = _parse_int(parts[1], lineno, "identifiant")
        if router_id != i:
            raise GraphFormatError(f"identifiant {router_id} au lieu de {i}", lineno)
        try:
            kind = RouterKind(parts[2])
        except ValueError:
            raise GraphFormatError(f"type de routeur inconnu: {parts[2]!r}", lineno) from None
        stub = None if parts[4] == "-" else _parse_int(parts[4], lineno, "domaine stub")
        try:
            routers.append(Router(router_id, kind, _parse_int(parts[3], lineno, "domaine"), stub))
        except ValueError as e:
            raise GraphFormatError(str(e), lineno) from None

    links: list[UnderlayLink] = []
    for offset in range(m):
        lineno = 2 + count + offset
        parts = lines[lineno - 1].split(" ")
        if len(parts) != 5 or parts[0] != "L":
            raise GraphFormatError("ligne de lien attendue 'L <u> <v> <delay_ms> <level>'", lineno)
        u = _parse_int(parts[1], lineno, "extrémité")
        v = _parse_int(parts[2], lineno, "extrémité")
        if not (0 <= u < count and 0 <= v < count) or u == v:
            raise GraphFormatError(f"lien ({u}, {v}) invalide", lineno)
        delay = _parse_float(parts[3], lineno, "délai")
        if delay <= 0:
            raise GraphFormatError(f"délai non positif: {delay}", lineno)
        try:
            level = LinkLevel(parts[4])
        except ValueError:
            raise GraphFormatError(f"niveau de lien inconnu: {parts[4]!r}", lineno) from None
        links.append(UnderlayLink(u, v, delay, level))

    underlay = UnderlayGraph(routers=tuple(routers), links=tuple(links))
    logger.info(f"✓ Topologie chargée: {underlay}")
    return underlay
