"""A small HTTP/2-flavoured stream state machine with an ordering bug.

Stream states follow the eight H2O stream states.  The planted bug sits in
the body-chunk buffering path, which only runs for a DATA frame that arrives
while the stream is receiving the request body, i.e. after a HEADERS frame
without END_STREAM.
"""

from __future__ import annotations

from enum import IntEnum

from .base import (
    EXPLICIT_STATE, OUTCOME_OK, OUTCOME_REJECT, Features, PlantedBug, Target,
    TruncatedFrame, frame, split_frames,
)


class StreamState(IntEnum):
    IDLE = 0
    RECV_HEADERS = 1
    RECV_BODY = 2
    REQ_PENDING = 3
    SEND_HEADERS = 4
    SEND_BODY = 5
    SEND_BODY_IS_FINAL = 6
    END_STREAM = 7


DATA = 0x0
HEADERS = 0x1
PRIORITY = 0x2
RST_STREAM = 0x3
SETTINGS = 0x4
PING = 0x6
GOAWAY = 0x7
WINDOW_UPDATE = 0x8

FLAG_END_STREAM = 0x1
FLAG_ACK = 0x1
FLAG_PADDED = 0x8

METHOD_GET = 0x82
METHOD_POST = 0x83
PATH_ROOT = 0x84
PATH_INDEX = 0x85

MAX_STREAMS = 4
VAR = "stream->state"

F = Features(100, [
    "frame_data", "frame_headers", "frame_priority", "frame_rst", "frame_settings",
    "frame_ping", "frame_goaway", "frame_window_update", "frame_unknown",
    "truncated",
    # headers
    "headers_short", "headers_open_stream", "headers_refused", "headers_idle",
    "headers_malformed", "headers_end_stream", "headers_body_follows",
    "headers_trailers", "headers_trailers_bad", "headers_busy",
    "block_short", "block_get", "block_post", "block_bad_method",
    "block_path_root", "block_path_index", "block_path_other",
    # response
    "respond", "respond_large", "respond_small", "respond_404",
    # data
    "data_short", "data_padded", "data_pad_bad", "data_not_receiving",
    "data_malformed", "body_chunk", "body_final",
    # settings
    "settings_ack", "settings_ack_bad", "settings_odd", "settings_header_table",
    "settings_enable_push", "settings_enable_push_bad", "settings_max_streams",
    "settings_window", "settings_window_bad", "settings_frame_size",
    "settings_frame_size_bad", "settings_header_list", "settings_unknown",
    # misc frames
    "ping_bad", "ping", "ping_ack", "priority_bad", "priority_self",
    "priority_exclusive", "priority", "rst_bad", "rst_idle", "rst_open",
    "window_bad", "window_zero", "window", "goaway_bad", "goaway",
])


class MiniHttp2(Target):
    name = "mini_http2"
    planted_bugs = (PlantedBug("h2-order", EXPLICIT_STATE),)
    state_enums = {VAR: StreamState}

    def _set_state(self, stream: dict, value: StreamState) -> None:
        self.state(VAR, int(value))
        stream["state"] = value

    def _execute(self, data: bytes):
        hit = self.feature
        conn = {"stream": None, "opened": 0}
        try:
            for ftype, payload in split_frames(data):
                if not self._frame(conn, ftype, payload):
                    return OUTCOME_REJECT
        except TruncatedFrame:
            hit(F.truncated)
            return OUTCOME_REJECT
        return OUTCOME_OK

    def _frame(self, conn: dict, ftype: int, payload: bytes) -> bool:
        """Handle one frame; False ends the connection with an error."""
        hit = self.feature
        if ftype == DATA:
            hit(F.frame_data)
            return self._data(conn, payload)
        if ftype == HEADERS:
            hit(F.frame_headers)
            return self._headers(conn, payload)
        if ftype == SETTINGS:
            hit(F.frame_settings)
            return self._settings(payload)
        if ftype == PING:
            hit(F.frame_ping)
            if len(payload) != 9:
                hit(F.ping_bad)
                return False
            hit(F.ping_ack if payload[0] & FLAG_ACK else F.ping)
            return True
        if ftype == PRIORITY:
            hit(F.frame_priority)
            if len(payload) != 5:
                hit(F.priority_bad)
                return False
            if payload[0] & 0x7F == 1:
                hit(F.priority_self)
                return False
            hit(F.priority_exclusive if payload[0] & 0x80 else F.priority)
            return True
        if ftype == RST_STREAM:
            hit(F.frame_rst)
            if len(payload) != 4:
                hit(F.rst_bad)
                return False
            stream = conn["stream"]
            if stream is None or stream["state"] in (StreamState.IDLE, StreamState.END_STREAM):
                hit(F.rst_idle)
                return True
            hit(F.rst_open)
            self._set_state(stream, StreamState.END_STREAM)
            return True
        if ftype == WINDOW_UPDATE:
            hit(F.frame_window_update)
            if len(payload) != 4:
                hit(F.window_bad)
                return False
            if not any(payload):
                hit(F.window_zero)
                return False
            hit(F.window)
            return True
        if ftype == GOAWAY:
            hit(F.frame_goaway)
            if len(payload) < 8:
                hit(F.goaway_bad)
                return False
            hit(F.goaway)
            return True
        hit(F.frame_unknown)
        return True

    def _settings(self, payload: bytes) -> bool:
        hit = self.feature
        if len(payload) < 1:
            hit(F.settings_odd)
            return False
        if payload[0] & FLAG_ACK:
            if len(payload) != 1:
                hit(F.settings_ack_bad)
                return False
            hit(F.settings_ack)
            return True
        params = payload[1:]
        if len(params) % 2:
            hit(F.settings_odd)
            return False
        for i in range(0, len(params), 2):
            ident, value = params[i], params[i + 1]
            if ident == 1:
                hit(F.settings_header_table)
            elif ident == 2:
                if value > 1:
                    hit(F.settings_enable_push_bad)
                    return False
                hit(F.settings_enable_push)
            elif ident == 3:
                hit(F.settings_max_streams)
            elif ident == 4:
                if value > 0x7F:
                    hit(F.settings_window_bad)
                    return False
                hit(F.settings_window)
            elif ident == 5:
                if value < 0x10:
                    hit(F.settings_frame_size_bad)
                    return False
                hit(F.settings_frame_size)
            elif ident == 6:
                hit(F.settings_header_list)
            else:
                hit(F.settings_unknown)
        return True

    def _valid_block(self, block: bytes) -> bool:
        hit = self.feature
        if len(block) < 2:
            hit(F.block_short)
            return False
        if block[0] == METHOD_GET:
            hit(F.block_get)
        elif block[0] == METHOD_POST:
            hit(F.block_post)
        else:
            hit(F.block_bad_method)
            return False
        if block[1] == PATH_ROOT:
            hit(F.block_path_root)
        elif block[1] == PATH_INDEX:
            hit(F.block_path_index)
        else:
            hit(F.block_path_other)
        return True

    def _headers(self, conn: dict, payload: bytes) -> bool:
        hit = self.feature
        if len(payload) < 1:
            hit(F.headers_short)
            return False
        flags, block = payload[0], payload[1:]
        stream = conn["stream"]
        if stream is None or stream["state"] == StreamState.END_STREAM:
            if conn["opened"] >= MAX_STREAMS:
                hit(F.headers_refused)
                return True
            hit(F.headers_open_stream)
            conn["opened"] += 1
            stream = conn["stream"] = {"state": None, "path": None}
            self._set_state(stream, StreamState.IDLE)
        state = stream["state"]
        if state == StreamState.IDLE:
            hit(F.headers_idle)
            self._set_state(stream, StreamState.RECV_HEADERS)
            if not self._valid_block(block):
                hit(F.headers_malformed)
                self._set_state(stream, StreamState.END_STREAM)
                return True
            stream["path"] = block[1]
            if flags & FLAG_END_STREAM:
                hit(F.headers_end_stream)
                self._set_state(stream, StreamState.REQ_PENDING)
                self._respond(stream)
            else:
                hit(F.headers_body_follows)
                self._set_state(stream, StreamState.RECV_BODY)
            return True
        if state == StreamState.RECV_BODY:
            # trailers
            if flags & FLAG_END_STREAM and self._valid_block(block):
                hit(F.headers_trailers)
                self._set_state(stream, StreamState.REQ_PENDING)
                self._respond(stream)
            else:
                hit(F.headers_trailers_bad)
                self._set_state(stream, StreamState.END_STREAM)
            return True
        hit(F.headers_busy)
        return True

    def _respond(self, stream: dict) -> None:
        hit = self.feature
        hit(F.respond)
        self._set_state(stream, StreamState.SEND_HEADERS)
        if stream["path"] == PATH_ROOT:
            hit(F.respond_large)
            self._set_state(stream, StreamState.SEND_BODY)
            self._set_state(stream, StreamState.SEND_BODY_IS_FINAL)
        elif stream["path"] == PATH_INDEX:
            hit(F.respond_small)
            self._set_state(stream, StreamState.SEND_BODY)
        else:
            hit(F.respond_404)
        self._set_state(stream, StreamState.END_STREAM)

    def _data(self, conn: dict, payload: bytes) -> bool:
        hit = self.feature
        if len(payload) < 1:
            hit(F.data_short)
            return False
        flags, body = payload[0], payload[1:]
        well_formed = True
        if flags & FLAG_PADDED:
            hit(F.data_padded)
            if not body or body[0] >= len(body):
                hit(F.data_pad_bad)
                well_formed = False
        stream = conn["stream"]
        if stream is None or stream["state"] != StreamState.RECV_BODY:
            hit(F.data_not_receiving)
            return True
        if not well_formed:
            hit(F.data_malformed)
            self._set_state(stream, StreamState.END_STREAM)
            return True
        self._body_chunk(stream, flags)
        return True

    def _body_chunk(self, stream: dict, flags: int) -> None:
        hit = self.feature
        hit(F.body_chunk)
        if flags & FLAG_END_STREAM:
            hit(F.body_final)
            self._set_state(stream, StreamState.REQ_PENDING)
            self._respond(stream)
            return
        # buffering a non-final chunk touches the unallocated body buffer
        self.abort("h2-order")

    def seeds(self):
        # a client that sends its body before the request headers
        return [
            frame(SETTINGS, bytes((0, 3, 100, 4, 0x40)))
            + frame(DATA, bytes((FLAG_END_STREAM,)) + b"hi")
            + frame(HEADERS, bytes((FLAG_END_STREAM, METHOD_GET, PATH_ROOT)))
        ]

    def witnesses(self):
        return {"h2-order": [
            frame(HEADERS, bytes((0, METHOD_POST, PATH_ROOT)))
            + frame(DATA, bytes((0,)) + b"body")
        ]}

    def reference_machine(self):
        S = StreamState
        k = lambda s: (VAR, int(s))
        edges = {
            (S.IDLE, S.RECV_HEADERS),
            (S.RECV_HEADERS, S.END_STREAM),
            (S.RECV_HEADERS, S.REQ_PENDING),
            (S.RECV_HEADERS, S.RECV_BODY),
            (S.RECV_BODY, S.REQ_PENDING),
            (S.RECV_BODY, S.END_STREAM),
            (S.REQ_PENDING, S.SEND_HEADERS),
            (S.SEND_HEADERS, S.SEND_BODY),
            (S.SEND_HEADERS, S.END_STREAM),
            (S.SEND_BODY, S.SEND_BODY_IS_FINAL),
            (S.SEND_BODY, S.END_STREAM),
            (S.SEND_BODY_IS_FINAL, S.END_STREAM),
            (S.END_STREAM, S.IDLE),
        }
        return frozenset({k(S.IDLE)}), frozenset((k(a), k(b)) for a, b in edges)
