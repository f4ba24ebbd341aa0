"""Session parser that leaks one buffer per accepted connection.

The leak lives in ``persistent`` and only grows when the harness does not
reset the target between inputs.
"""

from __future__ import annotations

from enum import IntEnum

from .base import (
    IMPLICIT_STATE, OUTCOME_OK, OUTCOME_REJECT, Features, PlantedBug, Target,
    TruncatedFrame, frame, split_frames,
)


class Phase(IntEnum):
    HELLO = 0
    AUTH = 1
    DATA = 2
    BYE = 3


MSG_HELLO = 1
MSG_AUTH = 2
MSG_DATA = 3
MSG_BYE = 4

VAR = "sess->phase"
LEAK_THRESHOLD = 32

F = Features(500, [
    "truncated", "unknown", "hello", "hello_twice", "auth", "auth_early",
    "auth_bad", "data", "data_early", "bye", "accepted", "leak_grow",
])


class LeakyParser(Target):
    name = "leaky_parser"
    planted_bugs = (PlantedBug("leak-overflow", IMPLICIT_STATE),)
    state_enums = {VAR: Phase}

    def __init__(self, threshold: int = LEAK_THRESHOLD):
        self.threshold = threshold
        super().__init__()

    def reset(self) -> None:
        self.persistent = {"leaked": 0}

    def _phase(self, sess: dict, value: Phase) -> None:
        self.state(VAR, int(value))
        sess["phase"] = value

    def _execute(self, data: bytes):
        hit = self.feature
        sess = {"phase": None}
        try:
            msgs = list(split_frames(data))
        except TruncatedFrame:
            hit(F.truncated)
            return OUTCOME_REJECT
        for mtype, payload in msgs:
            if mtype == MSG_HELLO:
                hit(F.hello)
                if sess["phase"] is not None:
                    hit(F.hello_twice)
                    return OUTCOME_REJECT
                self._phase(sess, Phase.HELLO)
            elif mtype == MSG_AUTH:
                hit(F.auth)
                if sess["phase"] != Phase.HELLO:
                    hit(F.auth_early)
                    return OUTCOME_REJECT
                if not payload:
                    hit(F.auth_bad)
                    return OUTCOME_REJECT
                self._phase(sess, Phase.AUTH)
            elif mtype == MSG_DATA:
                hit(F.data)
                if sess["phase"] not in (Phase.AUTH, Phase.DATA):
                    hit(F.data_early)
                    return OUTCOME_REJECT
                self._phase(sess, Phase.DATA)
            elif mtype == MSG_BYE:
                hit(F.bye)
                self._phase(sess, Phase.BYE)
                break
            else:
                hit(F.unknown)
                return OUTCOME_REJECT
        if sess["phase"] is None:
            return OUTCOME_REJECT
        # every accepted connection keeps its receive buffer alive
        hit(F.accepted)
        self.persistent["leaked"] += 1
        if self.persistent["leaked"] >= self.threshold:
            self.abort("leak-overflow")
        return OUTCOME_OK

    @staticmethod
    def valid_input() -> bytes:
        return frame(MSG_HELLO) + frame(MSG_AUTH, b"pw") + frame(MSG_DATA, b"x") + frame(MSG_BYE)

    def seeds(self):
        return [self.valid_input()]

    def witnesses(self):
        return {"leak-overflow": [self.valid_input()] * self.threshold}

    def reference_machine(self):
        P = Phase
        k = lambda v: (VAR, int(v))
        edges = {
            (P.HELLO, P.AUTH), (P.HELLO, P.BYE),
            (P.AUTH, P.DATA), (P.AUTH, P.BYE),
            (P.DATA, P.DATA), (P.DATA, P.BYE),
        }
        entry = {k(P.HELLO), k(P.BYE)}
        return frozenset(entry), frozenset((k(a), k(b)) for a, b in edges)
