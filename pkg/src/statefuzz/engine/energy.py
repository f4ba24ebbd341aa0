"""Rare-node and path-divergence energy schedule.

Energy of a seed, relative to its baseline energy ``e'``:

* the fraction of rare tree nodes on the seed's path is added on top of the
  baseline (``e1 = e' + e' * rare / |path|``),
* ``e1`` is scaled by ``offspring / offspring_on_same_path`` so seeds whose
  mutants wander off to other paths get more picks,
* the result is capped at ``cap_factor * e'``.

All arithmetic is exact; ``energy_ratio`` returns an integer numerator and
denominator so the campaign loop can avoid ``Fraction`` overhead.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

DEFAULT_CAP_FACTOR = 10


def rare_count(path_nodes: Sequence[int], hits: Sequence[int], hits_total: int,
               node_count: int) -> int:
    """Number of path nodes whose hit count is strictly below the tree mean."""
    return sum(1 for n in path_nodes if hits[n] * node_count < hits_total)


def divergence_factor(offspring_total: int, offspring_same_path: int) -> Tuple[int, int]:
    if offspring_total == 0:
        return 1, 1
    if offspring_same_path == 0:
        # no mutant stayed on the parent's path: take the supremum
        return offspring_total, 1
    return offspring_total, offspring_same_path


def energy_ratio(path_nodes: Sequence[int], hits: Sequence[int], hits_total: int,
                 node_count: int, offspring_total: int, offspring_same_path: int,
                 cap_factor: int = DEFAULT_CAP_FACTOR) -> Tuple[int, int]:
    """``e(t) / e'(t)`` as ``(numerator, denominator)``."""
    length = len(path_nodes)
    if length and node_count:
        num, den = length + rare_count(path_nodes, hits, hits_total, node_count), length
    else:
        num, den = 1, 1
    fn, fd = divergence_factor(offspring_total, offspring_same_path)
    num, den = num * fn, den * fd
    if num > cap_factor * den:
        return cap_factor, 1
    return num, den


def assign_energy(seed, stt, base: Fraction = Fraction(1),
                  cap_factor: int = DEFAULT_CAP_FACTOR) -> Fraction:
    """Exact energy of ``seed`` given the current tree.

    ``seed`` needs ``path_nodes``, ``offspring_total`` and
    ``offspring_same_path``; ``base`` is the baseline energy ``e'``.
    """
    total, count = stt.rare_threshold()
    num, den = energy_ratio(seed.path_nodes, stt.hit_counts, total, count,
                            seed.offspring_total, seed.offspring_same_path, cap_factor)
    return Fraction(base) * Fraction(num, den)


def energy_vector(path_flat: np.ndarray, path_starts: np.ndarray, path_lens: np.ndarray,
                  hits: Sequence[int], hits_total: int, node_count: int,
                  offspring_total: np.ndarray, offspring_same_path: np.ndarray,
                  cap_factor: int = DEFAULT_CAP_FACTOR) -> np.ndarray:
    """``energy_ratio`` for a whole corpus at once, as floats.

    Paths are concatenated in ``path_flat``; seed ``i`` owns
    ``path_flat[path_starts[i]:path_starts[i] + path_lens[i]]``.  Each value is
    one correctly rounded division of the exact numerator and denominator, so
    it equals ``num / den`` of the scalar version.
    """
    hits_arr = np.asarray(hits, dtype=np.int64)
    rare_mask = hits_arr * node_count < hits_total
    csum = np.concatenate(([0], np.cumsum(rare_mask[path_flat], dtype=np.int64)))
    rare = csum[path_starts + path_lens] - csum[path_starts]
    scored = (path_lens > 0) & (node_count > 0)
    num = np.where(scored, path_lens + rare, 1)
    den = np.where(scored, path_lens, 1)
    tot = np.asarray(offspring_total, dtype=np.int64)
    same = np.asarray(offspring_same_path, dtype=np.int64)
    num = num * np.where(tot == 0, 1, tot)
    den = den * np.where((tot == 0) | (same == 0), 1, same)
    capped = num > cap_factor * den
    return np.where(capped, float(cap_factor), num / den)
