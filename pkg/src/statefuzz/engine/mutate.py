"""Byte-level mutators and the mutation-range bookkeeping.

A mutation range is either ``None`` (the whole seed) or a sorted tuple of
byte offsets.  Position-taking mutators draw their position from the range
when one is set; length-changing mutators may still move bytes outside it.
"""

from __future__ import annotations

import random
from typing import Callable, List, Optional, Sequence, Tuple

WHOLE = None
Range = Optional[Tuple[int, ...]]

INTERESTING_8 = (0, 1, 2, 4, 8, 16, 32, 64, 0x7F, 0x80, 0xFE, 0xFF)


def _pos(rng: random.Random, n: int, allowed: Range, extra: int = 0) -> int:
    """Random offset in ``[0, n + extra)``, restricted to ``allowed`` if set."""
    if allowed is not None:
        limit = n + extra
        cands = [p for p in allowed if p < limit]
        if cands:
            return cands[rng.randrange(len(cands))]
    return rng.randrange(n + extra)


def flip_bit(buf: bytearray, rng, allowed, max_len, other) -> bool:
    if not buf:
        return False
    buf[_pos(rng, len(buf), allowed)] ^= 1 << rng.randrange(8)
    return True


def set_byte(buf: bytearray, rng, allowed, max_len, other) -> bool:
    if not buf:
        return False
    buf[_pos(rng, len(buf), allowed)] = rng.randrange(256)
    return True


def interesting_byte(buf: bytearray, rng, allowed, max_len, other) -> bool:
    if not buf:
        return False
    buf[_pos(rng, len(buf), allowed)] = INTERESTING_8[rng.randrange(len(INTERESTING_8))]
    return True


def insert_bytes(buf: bytearray, rng, allowed, max_len, other) -> bool:
    room = max_len - len(buf)
    if room <= 0:
        return False
    count = rng.randint(1, min(4, room))
    at = _pos(rng, len(buf), allowed, extra=1)
    if rng.randrange(2):
        chunk = bytes([rng.randrange(256)]) * count
    else:
        chunk = bytes(rng.randrange(256) for _ in range(count))
    buf[at:at] = chunk
    return True


def delete_bytes(buf: bytearray, rng, allowed, max_len, other) -> bool:
    if len(buf) < 2:
        return False
    at = _pos(rng, len(buf), allowed)
    count = rng.randint(1, min(4, len(buf) - at))
    del buf[at:at + count]
    return True


def duplicate_block(buf: bytearray, rng, allowed, max_len, other) -> bool:
    room = max_len - len(buf)
    if not buf or room <= 0:
        return False
    start = rng.randrange(len(buf))
    size = rng.randint(1, min(len(buf) - start, room, 16))
    block = buf[start:start + size]
    at = _pos(rng, len(buf), allowed, extra=1)
    buf[at:at] = block
    return True


def splice(buf: bytearray, rng, allowed, max_len, other) -> bool:
    """Keep a prefix of this seed and append a suffix of another seed."""
    if other is None or not other:
        return False
    cut = _pos(rng, len(buf), allowed, extra=1) if buf else 0
    tail = other[rng.randrange(len(other)):]
    new = bytes(buf[:cut]) + tail
    buf[:] = new[:max_len]
    return True


MUTATORS: Tuple[Callable, ...] = (
    flip_bit, set_byte, interesting_byte, insert_bytes, delete_bytes,
    duplicate_block, splice,
)
SUBSTITUTIONS = (flip_bit, set_byte, interesting_byte)


def mutate(data: bytes, rng: random.Random, mutation_range: Range = WHOLE,
           corpus: Optional[Sequence[bytes]] = None, max_len: int = 64,
           depth: int = 4, mutators: Sequence[Callable] = MUTATORS) -> bytes:
    """Apply between 1 and ``depth`` randomly chosen mutators to ``data``."""
    buf = bytearray(data)
    steps = rng.randint(1, depth)
    done = 0
    tries = 0
    while done < steps and tries < 4 * steps:
        tries += 1
        op = mutators[rng.randrange(len(mutators))]
        other = None
        if op is splice:
            if not corpus:
                continue
            other = corpus[rng.randrange(len(corpus))]
        if op(buf, rng, mutation_range, max_len, other):
            done += 1
    if not buf and not data:
        # nothing to mutate in an empty seed: grow it
        insert_bytes(buf, rng, None, max_len, None)
    return bytes(buf)


def identify_bytes(parent: bytes, child: bytes, new_node_count: int) -> Range:
    """Offsets of ``child`` that differ from ``parent`` when the child opened new
    tree nodes; otherwise (or for an empty difference) the whole seed."""
    if new_node_count <= 0:
        return WHOLE
    common = min(len(parent), len(child))
    diff = [i for i in range(common) if parent[i] != child[i]]
    diff.extend(range(common, len(child)))
    if not diff or len(diff) >= len(child):
        return WHOLE
    return tuple(diff)


def _runs(positions: Sequence[int]) -> List[Tuple[int, int]]:
    runs = []
    start = prev = positions[0]
    for p in positions[1:]:
        if p != prev + 1:
            runs.append((start, prev))
            start = p
        prev = p
    runs.append((start, prev))
    return runs


def enlarge_range(mutation_range: Range, length: int) -> Range:
    """Double every contiguous run of the range (the extra half rounded towards
    offset 0); returns ``WHOLE`` once the seed is covered."""
    if mutation_range is WHOLE:
        return WHOLE
    positions = [p for p in mutation_range if p < length]
    if not positions:
        return WHOLE
    out = set()
    for start, end in _runs(positions):
        width = end - start + 1
        left = min(start, (width + 1) // 2)
        right = min(length - 1 - end, width - left)
        # a run pinned at one edge spends its whole growth on the other side
        left = min(start, width - right)
        out.update(range(start - left, end + right + 1))
    if len(out) >= length:
        return WHOLE
    return tuple(sorted(out))
