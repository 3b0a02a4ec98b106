"""Stable sub-seed derivation.

Python's builtin ``hash`` is salted per process, so labeled sub-seeds are
derived with blake2b instead; results are identical across runs and
platforms.
"""

from __future__ import annotations

import hashlib


def derive_seed(base: int, label: str) -> int:
    """A 64-bit sub-seed determined by (base, label) alone."""
    digest = hashlib.blake2b(f"{base}:{label}".encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "big")
