"""Splittable, path-addressed seed derivation.

Every random draw in the project descends from a single master seed through
``derive_seed(master, *path)``.  The path is a tuple of strings/ints naming
the consumer (e.g. ``("collect", "town-a", 17)``), so independent subsystems
get independent streams and a manifest can record exactly which stream
produced an artifact.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, *path: object) -> int:
    """Derive a 64-bit child seed from a master seed and a path of labels."""
    h = hashlib.sha256()
    h.update((master & _MASK64).to_bytes(8, "little"))
    for part in path:
        h.update(b"/")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


def derive_rng(master: int, *path: object) -> np.random.Generator:
    """A PCG64 generator seeded from ``derive_seed(master, *path)``."""
    return np.random.default_rng(derive_seed(master, *path))
