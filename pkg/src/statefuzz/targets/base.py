"""Shared plumbing for the in-process targets."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Type

OK = "ok"
REJECT = "reject"
CRASH = "crash"

EXPLICIT_STATE = "explicit-state"
IMPLICIT_STATE = "implicit-state"
STATELESS = "stateless"
BUG_CLASSES = (EXPLICIT_STATE, IMPLICIT_STATE, STATELESS)


class TargetCrash(Exception):
    """Raised by the abort hook inside a target; caught by ``Target.run``."""

    def __init__(self, bug_id: str):
        super().__init__(bug_id)
        self.bug_id = bug_id


@dataclass(frozen=True)
class Outcome:
    kind: str
    bug_id: Optional[str] = None

    @property
    def crashed(self) -> bool:
        return self.kind == CRASH


OUTCOME_OK = Outcome(OK)
OUTCOME_REJECT = Outcome(REJECT)


@dataclass(frozen=True)
class PlantedBug:
    bug_id: str
    bug_class: str


def _no_feature(fid: int) -> None:
    pass


def _no_state(variable: str, value: int) -> None:
    pass


class Features:
    """Names -> small integer feature ids, one per handler branch."""

    def __init__(self, base: int, names: Sequence[str]):
        self._ids = {name: base + i for i, name in enumerate(names)}
        for name, fid in self._ids.items():
            setattr(self, name, fid)

    def __len__(self) -> int:
        return len(self._ids)

    def ids(self) -> Dict[str, int]:
        return dict(self._ids)


def split_frames(data: bytes) -> Iterator[Tuple[int, bytes]]:
    """Yield ``(type, payload)`` messages; stops at trailing garbage.

    Wire format: one type byte, one length byte, then ``length`` payload bytes.
    A trailing fragment that does not form a whole message is reported by
    ``TruncatedFrame`` after the complete messages before it were yielded.
    """
    i, n = 0, len(data)
    while i < n:
        if i + 2 > n:
            raise TruncatedFrame(i)
        length = data[i + 1]
        end = i + 2 + length
        if end > n:
            raise TruncatedFrame(i)
        yield data[i], data[i + 2:end]
        i = end


def frame(ftype: int, payload: bytes = b"") -> bytes:
    if len(payload) > 255:
        raise ValueError("payload too long for a one-byte length")
    return bytes((ftype, len(payload))) + payload


class TruncatedFrame(Exception):
    pass


class Target:
    """In-process target.

    Subclasses implement ``_execute(data)`` and call ``self.feature(id)`` and
    ``self.state(variable, value)`` from their handlers.  Cross-execution
    data lives in ``persistent`` and survives until ``reset()``.
    """

    name = "target"
    planted_bugs: Tuple[PlantedBug, ...] = ()
    # variable -> enum class, for naming values in reports
    state_enums: Dict[str, Type[IntEnum]] = {}

    def __init__(self) -> None:
        self.feature: Callable[[int], None] = _no_feature
        self.state: Callable[[str, int], None] = _no_state
        self.persistent: dict = {}
        self.reset()

    def attach(self, feature: Optional[Callable[[int], None]] = None,
               state: Optional[Callable[[str, int], None]] = None) -> None:
        self.feature = feature or _no_feature
        self.state = state or _no_state

    def reset(self) -> None:
        self.persistent = {}

    def run(self, data: bytes) -> Outcome:
        try:
            return self._execute(data)
        except TargetCrash as crash:
            return Outcome(CRASH, crash.bug_id)

    def _execute(self, data: bytes) -> Outcome:
        raise NotImplementedError

    def abort(self, bug_id: str):
        raise TargetCrash(bug_id)

    def seeds(self) -> List[bytes]:
        """Default initial corpus."""
        return [b""]

    def witnesses(self) -> Dict[str, List[bytes]]:
        """bug id -> input list reproducing it (single input for explicit bugs)."""
        return {}

    def reference_machine(self) -> Tuple[FrozenSet, FrozenSet]:
        """``(entry_states, edges)`` of the hand-written ground truth machine."""
        raise NotImplementedError

    def bug_class(self, bug_id: str) -> Optional[str]:
        for bug in self.planted_bugs:
            if bug.bug_id == bug_id:
                return bug.bug_class
        return None

    def value_names(self) -> Dict[str, Dict[int, str]]:
        return {var: {m.value: m.name for m in enum} for var, enum in self.state_enums.items()}
