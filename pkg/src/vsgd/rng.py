"""Seedable, portable randomness for the benchmark harness.

The generator is numpy's PCG64 (a named, documented algorithm whose integer
and uniform-double streams are reproducible across platforms for a given
seed).  Normal variates are produced by the basic Box-Muller transform on
those uniforms — a deterministic transform with no rejection loop, so traces
depend only on (seed, draw order).
"""
from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal draws via Box-Muller (no rejection sampling)."""
    pairs = (size + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]: keeps log(u1) finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return z[:size]
