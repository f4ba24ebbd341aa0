"""RTSP-like session with an MPEG parser whose byte counter is not reset.

A SETUP while playing stops the parser but leaves its read counter behind;
the next PLAY restarts parsing from a stale offset and trips an assertion.
"""

from __future__ import annotations

from enum import IntEnum

from .base import (
    EXPLICIT_STATE, OUTCOME_OK, OUTCOME_REJECT, Features, PlantedBug, Target,
    TruncatedFrame, frame, split_frames,
)


class RTSPState(IntEnum):
    INIT = 0
    READY = 1
    PLAY = 2


class MPEGParseState(IntEnum):
    PARSING_PACK_HEADER = 0
    PARSING_SYSTEM_HEADER = 1
    PARSING_PES_PACKET = 2


OPTIONS = 1
DESCRIBE = 2
SETUP = 3
PLAY = 4
PAUSE = 5
TEARDOWN = 6

SESSION_VAR = "session->state"
PARSER_VAR = "parser->fCurrentParseState"

F = Features(300, [
    "truncated", "unknown", "options", "describe", "describe_bad", "describe_sdp",
    "setup", "setup_bad_transport", "setup_init", "setup_ready", "setup_playing",
    "setup_tcp", "setup_udp",
    "play", "play_not_ready", "play_start", "play_range", "play_scale",
    "pause", "pause_not_playing", "teardown",
    "parse_pack", "parse_system", "parse_pes",
])


class MiniRtsp(Target):
    name = "mini_rtsp"
    planted_bugs = (PlantedBug("rtsp-replay", EXPLICIT_STATE),)
    state_enums = {SESSION_VAR: RTSPState, PARSER_VAR: MPEGParseState}

    def _session(self, sess: dict, value: RTSPState) -> None:
        self.state(SESSION_VAR, int(value))
        sess["state"] = value

    def _parser(self, sess: dict, value: MPEGParseState) -> None:
        self.state(PARSER_VAR, int(value))
        sess["parse"] = value

    def _execute(self, data: bytes):
        hit = self.feature
        sess = {"state": RTSPState.INIT, "parse": None, "bytes_read": 0, "parsing": False}
        rejected = False
        try:
            for cmd, payload in split_frames(data):
                if not self._command(sess, cmd, payload):
                    rejected = True
        except TruncatedFrame:
            hit(F.truncated)
            return OUTCOME_REJECT
        return OUTCOME_REJECT if rejected else OUTCOME_OK

    def _command(self, sess: dict, cmd: int, payload: bytes) -> bool:
        hit = self.feature
        if cmd == OPTIONS:
            hit(F.options)
            return True
        if cmd == DESCRIBE:
            hit(F.describe)
            if not payload.startswith(b"rtsp://"):
                hit(F.describe_bad)
                return False
            if payload.endswith(b".sdp"):
                hit(F.describe_sdp)
            return True
        if cmd == SETUP:
            return self._setup(sess, payload)
        if cmd == PLAY:
            return self._play(sess, payload)
        if cmd == PAUSE:
            hit(F.pause)
            if sess["state"] != RTSPState.PLAY:
                hit(F.pause_not_playing)
                return False
            self._session(sess, RTSPState.READY)
            return True
        if cmd == TEARDOWN:
            hit(F.teardown)
            sess["bytes_read"] = 0
            sess["parsing"] = False
            self._session(sess, RTSPState.INIT)
            return True
        hit(F.unknown)
        return False

    def _setup(self, sess: dict, payload: bytes) -> bool:
        hit = self.feature
        hit(F.setup)
        if not payload.startswith(b"RTP"):
            hit(F.setup_bad_transport)
            return False
        hit(F.setup_tcp if payload[3:4] == b"T" else F.setup_udp)
        state = sess["state"]
        if state == RTSPState.INIT:
            hit(F.setup_init)
        elif state == RTSPState.READY:
            hit(F.setup_ready)
        else:
            hit(F.setup_playing)
            # stops the stream; the parser's read counter is left as is
            sess["parsing"] = False
        self._session(sess, RTSPState.READY)
        return True

    def _play(self, sess: dict, payload: bytes) -> bool:
        hit = self.feature
        hit(F.play)
        if sess["state"] != RTSPState.READY:
            hit(F.play_not_ready)
            return False
        if payload[:1] == b"R":
            hit(F.play_range)
        elif payload[:1] == b"S":
            hit(F.play_scale)
        self._session(sess, RTSPState.PLAY)
        if not sess["parsing"]:
            hit(F.play_start)
            sess["parsing"] = True
            self._parse_header(sess)
        return True

    def _parse_header(self, sess: dict) -> None:
        hit = self.feature
        self._parser(sess, MPEGParseState.PARSING_PACK_HEADER)
        hit(F.parse_pack)
        if sess["bytes_read"] != 0:
            # header re-parsed from a stale offset
            self.abort("rtsp-replay")
        sess["bytes_read"] += 14
        self._parser(sess, MPEGParseState.PARSING_SYSTEM_HEADER)
        hit(F.parse_system)
        sess["bytes_read"] += 12
        self._parser(sess, MPEGParseState.PARSING_PES_PACKET)
        hit(F.parse_pes)

    def seeds(self):
        return [
            frame(OPTIONS)
            + frame(DESCRIBE, b"rtsp://h/a.sdp")
            + frame(SETUP, b"RTP/U")
            + frame(PLAY, b"R0")
            + frame(TEARDOWN)
        ]

    def witnesses(self):
        return {"rtsp-replay": [
            frame(SETUP, b"RTP/U") + frame(PLAY) + frame(SETUP, b"RTP/U") + frame(PLAY)
        ]}

    def reference_machine(self):
        s = lambda v: (SESSION_VAR, int(v))
        p = lambda v: (PARSER_VAR, int(v))
        R, M = RTSPState, MPEGParseState
        sessions = {R.INIT, R.READY, R.PLAY}
        edges = set()
        # PLAY is only entered from READY
        for a in sessions:
            for b in sessions:
                if b == R.PLAY and a != R.READY:
                    continue
                edges.add((s(a), s(b)))
        edges.add((s(R.PLAY), p(M.PARSING_PACK_HEADER)))
        edges.add((p(M.PARSING_PACK_HEADER), p(M.PARSING_SYSTEM_HEADER)))
        edges.add((p(M.PARSING_SYSTEM_HEADER), p(M.PARSING_PES_PACKET)))
        for b in (R.INIT, R.READY):
            edges.add((p(M.PARSING_PES_PACKET), s(b)))
        entry = {s(R.INIT), s(R.READY)}
        return frozenset(entry), frozenset(edges)
