"""Seed derivation for reproducible stochastic operations.

Child seeds are derived with SHA-256 over a label path, so results are stable
across platforms and Python versions, and trial streams can be partitioned
(for example per Monte-Carlo trial) and merged without changing the outcome.
"""
from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *labels: object) -> int:
    """A 64-bit child seed determined by (seed, labels)."""
    text = repr((int(seed),) + tuple(str(x) for x in labels))
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(seed: int, *labels: object) -> random.Random:
    """A fresh generator seeded from the derived child seed."""
    return random.Random(derive_seed(seed, *labels))
