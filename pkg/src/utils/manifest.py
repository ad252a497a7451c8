"""Manifeste d'exécution: empreinte de configuration, sommes de contrôle et durées."""

import hashlib
import logging
import os
import tempfile
import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Trace d'une exécution, écrite en fin de pipeline."""

    config_hash: str
    tool_version: str
    master_seed: int
    checksums: dict[str, str] = field(default_factory=dict)
    durations: dict[str, float] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Chronomètre une étape du pipeline."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.durations[name] = time.perf_counter() - start

    def record(self, path: Path) -> None:
        self.checksums[Path(path).name] = file_sha256(Path(path))

    def render(self) -> str:
        lines = [
            f"tool_version {self.tool_version}",
            f"config_hash {self.config_hash}",
            f"master_seed {self.master_seed}",
        ]
        lines += [f"file {name} {digest}" for name, digest in sorted(self.checksums.items())]
        lines += [f"duration {name} {seconds:.3f}" for name, seconds in self.durations.items()]
        return "\n".join(lines) + "\n"

    def write(self, path: Path) -> Path:
        """Écrit le manifeste de façon atomique (fichier temporaire puis renommage)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(self.render())
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        logger.info(f"✓ Manifeste écrit: {path} ({len(self.checksums)} fichiers)")
        return path


def read_checksums(path: Path) -> dict[str, str]:
    """Sommes de contrôle listées dans un manifeste."""
    checksums = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        parts = line.split(" ")
        if parts[0] == "file" and len(parts) == 3:
            checksums[parts[1]] = parts[2]
    return checksums
