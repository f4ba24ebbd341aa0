"""Replay of input lists and ddmin-style reduction of crash histories."""

from __future__ import annotations

from typing import Callable, List, Optional, Sequence

from ..targets import Outcome, Target


class NotReproducible(RuntimeError):
    pass


def replay(inputs: Sequence[bytes], target: Target, implicit: bool = True,
           on_input: Optional[Callable[[int, Outcome], None]] = None) -> Optional[Outcome]:
    """Run ``inputs`` in order on a freshly reset target.

    With ``implicit`` the target keeps its persistent state across inputs,
    otherwise it is reset before every input.  Returns the first crash
    outcome, or ``None``.
    """
    target.attach()
    target.reset()
    for i, data in enumerate(inputs):
        if not implicit and i:
            target.reset()
        out = target.run(data)
        if on_input is not None:
            on_input(i, out)
        if out.crashed:
            return out
    return None


def ddmin(items: List, test: Callable[[List], bool]) -> List:
    """Reduce ``items`` to a 1-minimal sublist for which ``test`` holds.

    Order is preserved.  ``test(items)`` must hold on entry.
    """
    n = 2
    while len(items) >= 2:
        size = len(items)
        n = min(n, size)
        bounds = [size * i // n for i in range(n + 1)]
        chunks = [items[bounds[i]:bounds[i + 1]] for i in range(n)]
        for chunk in chunks:
            if test(chunk):
                items, n = chunk, 2
                break
        else:
            for i in range(n):
                rest = items[:bounds[i]] + items[bounds[i + 1]:]
                if test(rest):
                    items, n = rest, max(n - 1, 2)
                    break
            else:
                if n >= size:
                    break
                n = min(size, 2 * n)
    if len(items) == 1 and test([]):
        return []
    return items


def minimize_history(history: Sequence[bytes], target: Target,
                     bug_id: Optional[str] = None) -> List[bytes]:
    """Shortest-found ordered sublist of ``history`` that still crashes the
    target with persistent state left to aggregate.

    When ``bug_id`` is omitted, the bug raised by the full history is used.
    """
    history = list(history)
    first = replay(history, target, implicit=True)
    if first is None or (bug_id is not None and first.bug_id != bug_id):
        raise NotReproducible("history does not reproduce the crash")
    bug = first.bug_id

    def still_crashes(inputs: List[bytes]) -> bool:
        out = replay(inputs, target, implicit=True)
        return out is not None and out.bug_id == bug

    return ddmin(history, still_crashes)
