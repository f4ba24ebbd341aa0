"""Container parser with a crash in header sniffing, before any state update.

``RIFF`` files are walked chunk by chunk and the parser state only moves
forward (header, plain chunks, list chunks, done).  The big-endian ``RIFX``
variant reads past the buffer while the header is still being classified.
"""

from __future__ import annotations

from enum import IntEnum

from .base import OUTCOME_OK, OUTCOME_REJECT, STATELESS, Features, PlantedBug, Target

MAGIC = b"RIFX"


class ParseState(IntEnum):
    HEADER = 0
    CHUNK = 1
    LIST = 2
    DONE = 3


VAR = "parser->state"

F = Features(700, [
    "short", "tag_r", "tag_ri", "tag_rif", "tag_riff", "tag_rifx", "tag_other",
    "chunk", "chunk_fmt", "chunk_data", "chunk_list", "chunk_other",
    "chunk_truncated", "list_item", "list_empty", "done",
])


class StatelessParser(Target):
    name = "stateless_parser"
    planted_bugs = (PlantedBug("parse-oob", STATELESS),)
    state_enums = {VAR: ParseState}

    def _set(self, ctx: dict, value: ParseState) -> None:
        self.state(VAR, int(value))
        ctx["state"] = value

    def _execute(self, data: bytes):
        hit = self.feature
        if len(data) < 4:
            hit(F.short)
            return OUTCOME_REJECT
        # byte-wise tag compare, one branch per matched byte
        if data[0] != 0x52:
            hit(F.tag_other)
            return OUTCOME_REJECT
        hit(F.tag_r)
        if data[1] != 0x49:
            hit(F.tag_other)
            return OUTCOME_REJECT
        hit(F.tag_ri)
        if data[2] != 0x46:
            hit(F.tag_other)
            return OUTCOME_REJECT
        hit(F.tag_rif)
        if data[3] == 0x58:
            hit(F.tag_rifx)
            # big-endian size field read from beyond the 4-byte header
            self.abort("parse-oob")
        if data[3] != 0x46:
            hit(F.tag_other)
            return OUTCOME_REJECT
        hit(F.tag_riff)
        ctx = {"state": None}
        self._set(ctx, ParseState.HEADER)
        i, n = 4, len(data)
        while i < n:
            if i + 2 > n:
                hit(F.chunk_truncated)
                return OUTCOME_REJECT
            tag, size = data[i], data[i + 1]
            body = data[i + 2:i + 2 + size]
            if len(body) < size:
                hit(F.chunk_truncated)
                return OUTCOME_REJECT
            hit(F.chunk)
            if tag == 0x4C:  # 'L'
                hit(F.chunk_list)
                if ctx["state"] != ParseState.LIST:
                    self._set(ctx, ParseState.LIST)
                if not body:
                    hit(F.list_empty)
                for _ in body[:4]:
                    hit(F.list_item)
            else:
                if tag == 0x66:  # 'f'
                    hit(F.chunk_fmt)
                elif tag == 0x64:  # 'd'
                    hit(F.chunk_data)
                else:
                    hit(F.chunk_other)
                if ctx["state"] == ParseState.HEADER:
                    self._set(ctx, ParseState.CHUNK)
            i += 2 + size
        hit(F.done)
        self._set(ctx, ParseState.DONE)
        return OUTCOME_OK

    def seeds(self):
        return [b"RIFF" + b"f\x02ab" + b"L\x01x" + b"d\x03xyz"]

    def witnesses(self):
        return {"parse-oob": [MAGIC + b"\x00\x00"]}

    def reference_machine(self):
        P = ParseState
        k = lambda v: (VAR, int(v))
        edges = {
            (P.HEADER, P.CHUNK), (P.HEADER, P.LIST), (P.HEADER, P.DONE),
            (P.CHUNK, P.LIST), (P.CHUNK, P.DONE), (P.LIST, P.DONE),
        }
        return frozenset({k(P.HEADER)}), frozenset((k(a), k(b)) for a, b in edges)
