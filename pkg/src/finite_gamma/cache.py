"""Disk cache for Gelfand-Graev decompositions.

One JSON file per (n, q, direction, seed, psi sign). The file carries a schema
version and a sha256 checksum of its own content; anything that fails to parse,
fails the checksum or has another schema version is rebuilt, never partially
read. Writes go to a temporary file in the same directory and are renamed into
place, so readers only ever see complete files.
"""

import hashlib
import logging
import os
import tempfile
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .exceptions import CacheError
from .models import CACHE_SCHEMA_VERSION, CachedComponent, CacheEntry
from .spectra import GGSpace, IrrepComponent, decompose

logger = logging.getLogger(__name__)

CACHE_DIR_ENV = "FINITE_GAMMA_CACHE_DIR"
DEFAULT_CACHE_DIR = Path.home() / ".cache" / "finite-gamma"


def entry_checksum(entry: CacheEntry) -> str:
    """sha256 over the entry serialized with an empty checksum field."""
    payload = entry.model_copy(update={"checksum": ""}).model_dump_json()
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def to_entry(space: GGSpace, components: list[IrrepComponent], seed: int) -> CacheEntry:
    """Snapshot a decomposition as a checksummed cache entry."""
    cached = [
        CachedComponent(
            label=c.label,
            index=c.index,
            cuspidal=c.cuspidal,
            central_character=[c.central_character[z] for z in range(1, space.q)],
            basis_real=c.basis.real.tolist(),
            basis_imag=c.basis.imag.tolist(),
        )
        for c in components
    ]
    entry = CacheEntry(
        n=space.n,
        q=space.q,
        direction=space.direction,  # type: ignore[arg-type]
        seed=seed,
        psi_sign=space.psi.sign,
        components=cached,
    )
    entry.checksum = entry_checksum(entry)
    return entry


def from_entry(entry: CacheEntry, space: GGSpace) -> list[IrrepComponent]:
    """Rebuild components of space from a validated entry."""
    components = []
    for item in entry.components:
        basis = np.asarray(item.basis_real) + 1j * np.asarray(item.basis_imag)
        if basis.shape[0] != space.dim:
            msg = f"Cached basis has {basis.shape[0]} rows, space has dimension {space.dim}"
            raise CacheError(msg)
        omega = {z: item.central_character[z - 1] for z in range(1, space.q)}
        components.append(
            IrrepComponent(space, basis, item.label, item.index, item.cuspidal, omega)
        )
    return components


class ComponentCache:
    """Raw file layer for cached decompositions."""

    def __init__(self, root: Path | str | None = None):
        """Initialize the cache.

        Args:
            root: Cache directory; FINITE_GAMMA_CACHE_DIR or ~/.cache/finite-gamma by default
        """
        env_root = os.environ.get(CACHE_DIR_ENV)
        self.root = Path(root or env_root or DEFAULT_CACHE_DIR)

    def __repr__(self) -> str:
        return f"ComponentCache(root={str(self.root)!r})"

    def path_for(self, n: int, q: int, direction: int, seed: int, psi_sign: int) -> Path:
        return self.root / f"gg-n{n}-q{q}-dir{direction:+d}-seed{seed}-psi{psi_sign:+d}.json"

    def path_for_space(self, space: GGSpace, seed: int) -> Path:
        return self.path_for(space.n, space.q, space.direction, seed, space.psi.sign)

    def write(self, entry: CacheEntry) -> Path:
        """Atomically write an entry.

        Raises:
            CacheError: If the directory or file cannot be written
        """
        path = self.path_for(entry.n, entry.q, entry.direction, entry.seed, entry.psi_sign)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            with tempfile.NamedTemporaryFile(
                "w", encoding="utf-8", dir=self.root, suffix=".tmp", delete=False
            ) as handle:
                handle.write(entry.model_dump_json())
                tmp_name = handle.name
            os.replace(tmp_name, path)
        except OSError as e:
            msg = f"Could not write cache file {path}: {e}"
            raise CacheError(msg) from e
        logger.debug("Wrote cache file %s", path)
        return path

    def read(self, path: Path) -> CacheEntry | None:
        """Load and validate one file; None on a miss or an unusable file.

        Raises:
            CacheError: If the file exists but cannot be read
        """
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        except OSError as e:
            msg = f"Could not read cache file {path}: {e}"
            raise CacheError(msg) from e

        try:
            entry = CacheEntry.model_validate_json(text)
        except ValidationError:
            logger.warning("Cache file %s is corrupt or truncated, rebuilding", path)
            return None
        if entry.schema_version != CACHE_SCHEMA_VERSION:
            logger.warning(
                "Cache file %s has schema version %d (expected %d), rebuilding",
                path,
                entry.schema_version,
                CACHE_SCHEMA_VERSION,
            )
            return None
        if entry.checksum != entry_checksum(entry):
            logger.warning("Cache file %s failed its checksum, rebuilding", path)
            return None
        return entry

    def load(self, space: GGSpace, seed: int) -> list[IrrepComponent] | None:
        entry = self.read(self.path_for_space(space, seed))
        if entry is None:
            return None
        try:
            return from_entry(entry, space)
        except CacheError as e:
            logger.warning("Cache entry for %s unusable (%s), rebuilding", space, e)
            return None

    def save(self, space: GGSpace, components: list[IrrepComponent], seed: int) -> Path:
        return self.write(to_entry(space, components, seed))

    def get_or_build(self, space: GGSpace, seed: int) -> list[IrrepComponent]:
        """Cached components of space, decomposing and storing them on a miss."""
        components = self.load(space, seed)
        if components is not None:
            logger.info("Loaded %d components of %s from cache", len(components), space)
            return components
        components = decompose(space, seed)
        self.save(space, components, seed)
        return components


def cache_roundtrip(
    cache: ComponentCache, entry: CacheEntry, space: GGSpace
) -> list[IrrepComponent]:
    """Write entry, read it back and rebuild its components.

    Raises:
        CacheError: If the written file does not load back
    """
    path = cache.write(entry)
    loaded = cache.read(path)
    if loaded is None:
        msg = f"Cache file {path} did not load back after writing"
        raise CacheError(msg)
    return from_entry(loaded, space)
