import itertools
import re
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

import statefuzz.targets as targets_pkg
from statefuzz.stt import STT
from statefuzz.targets import (
    BUG_CLASSES, REGISTRY, UnknownTarget, frame, get_target, split_frames,
)
from statefuzz.targets import http2, leaky, rtsp, stateless
from statefuzz.targets.base import TruncatedFrame

from conftest import H2O_EDGES, WITNESSES


def run_traced(target, data, stt=None):
    stt = stt or STT()
    feats = set()
    target.attach(feats.add, stt.on_update)
    target.reset()
    stt.begin_execution()
    out = target.run(data)
    path = stt.end_execution()
    return out, path, feats


def enumerate_machine(target, alphabet, max_len, prefix=b""):
    stt = STT()
    target.attach(None, stt.on_update)
    for n in range(max_len + 1):
        for combo in itertools.product(alphabet, repeat=n):
            target.reset()
            stt.begin_execution()
            target.run(prefix + b"".join(combo))
            stt.end_execution()
    g = stt.compact()
    return frozenset(g.initial_edges), frozenset(g.edge_set())


# -- wire format ------------------------------------------------------------------

def test_split_frames_round_trip():
    data = frame(1, b"ab") + frame(2) + frame(3, b"x")
    assert list(split_frames(data)) == [(1, b"ab"), (2, b""), (3, b"x")]


@pytest.mark.parametrize("data", [b"\x01", b"\x01\x05ab", frame(1, b"a") + b"\x02"])
def test_trailing_garbage_is_truncated(data):
    with pytest.raises(TruncatedFrame):
        list(split_frames(data))


@given(st.lists(st.tuples(st.integers(0, 255), st.binary(max_size=20)), max_size=6))
def test_frames_parse_back(msgs):
    data = b"".join(frame(t, p) for t, p in msgs)
    assert list(split_frames(data)) == msgs


def test_registry():
    assert set(REGISTRY) == {"mini_http2", "mini_rtsp", "leaky_parser", "stateless_parser"}
    with pytest.raises(UnknownTarget):
        get_target("nope")
    for name in REGISTRY:
        t = getattr(targets_pkg, name)()
        assert t.name == name
        assert all(b.bug_class in BUG_CLASSES for b in t.planted_bugs)


# -- mini_http2 -------------------------------------------------------------------

H = http2
GET_ROOT = bytes((H.METHOD_GET, H.PATH_ROOT))
POST_ROOT = bytes((H.METHOD_POST, H.PATH_ROOT))


def test_http2_header_then_data_crashes():
    t = get_target("mini_http2")
    data = frame(H.HEADERS, b"\x00" + POST_ROOT) + frame(H.DATA, b"\x00body")
    out, path, _ = run_traced(t, data)
    assert out.crashed and out.bug_id == "h2-order"
    assert [v for _, v in path] == [0, 1, 2]
    assert t.bug_class("h2-order") == "explicit-state"


def test_http2_data_then_header_covers_both_handlers():
    t = get_target("mini_http2")
    data = frame(H.DATA, b"\x00body") + frame(H.HEADERS, b"\x00" + POST_ROOT)
    out, _, feats = run_traced(t, data)
    assert not out.crashed
    assert {H.F.frame_data, H.F.frame_headers} <= feats


def test_http2_empty_input():
    out, path, _ = run_traced(get_target("mini_http2"), b"")
    assert out.kind == "ok" and path == ()


def test_http2_malformed_frame_rejects_with_features():
    out, _, feats = run_traced(get_target("mini_http2"), frame(H.PING, b"\x00"))
    assert out.kind == "reject" and H.F.ping_bad in feats


def test_http2_seed_does_not_crash():
    t = get_target("mini_http2")
    for s in t.seeds():
        assert not run_traced(t, s)[0].crashed


def test_http2_reference_is_the_stream_machine():
    entry, edges = get_target("mini_http2").reference_machine()
    assert {(a[1], b[1]) for a, b in edges} == H2O_EDGES
    assert entry == {(H.VAR, 0)}


def test_http2_enumeration_matches_reference():
    alphabet = [
        frame(H.HEADERS, bytes((H.FLAG_END_STREAM,)) + GET_ROOT),
        frame(H.HEADERS, bytes((H.FLAG_END_STREAM, H.METHOD_GET, H.PATH_INDEX))),
        frame(H.HEADERS, bytes((H.FLAG_END_STREAM, H.METHOD_POST, 0x99))),
        frame(H.HEADERS, b"\x00" + POST_ROOT),
        frame(H.HEADERS, b"\x00\x00\x00"),
        frame(H.DATA, bytes((H.FLAG_END_STREAM,)) + b"x"),
        frame(H.DATA, b"\x00x"),
        frame(H.DATA, bytes((H.FLAG_PADDED, 5))),
        frame(H.RST_STREAM, b"\x00\x00\x00\x08"),
    ]
    t = get_target("mini_http2")
    assert enumerate_machine(t, alphabet, 3) == t.reference_machine()


# -- mini_rtsp --------------------------------------------------------------------

R = rtsp
SETUP = frame(R.SETUP, b"RTP/U")
PLAY = frame(R.PLAY)


def test_rtsp_replay_bug():
    t = get_target("mini_rtsp")
    out, path, _ = run_traced(t, SETUP + PLAY + SETUP + PLAY)
    assert out.crashed and out.bug_id == "rtsp-replay"
    sessions = [v for var, v in path if var == R.SESSION_VAR]
    assert sessions == [1, 2, 1, 2]


def test_rtsp_short_prefix_ok():
    assert run_traced(get_target("mini_rtsp"), SETUP + PLAY)[0].kind == "ok"


def test_rtsp_play_first_rejects():
    assert run_traced(get_target("mini_rtsp"), PLAY)[0].kind == "reject"


def test_rtsp_unknown_command_rejects():
    assert run_traced(get_target("mini_rtsp"), frame(42))[0].kind == "reject"


def test_rtsp_teardown_resets_counter():
    out = run_traced(get_target("mini_rtsp"), SETUP + PLAY + frame(R.TEARDOWN) + SETUP + PLAY)[0]
    assert out.kind == "ok"


def test_rtsp_enumeration_matches_reference():
    # PLAY -> READY -> PLAY -> X without a parser restart needs five commands
    alphabet = [SETUP, frame(R.SETUP, b"x"), PLAY, frame(R.PAUSE), frame(R.TEARDOWN)]
    t = get_target("mini_rtsp")
    assert enumerate_machine(t, alphabet, 5) == t.reference_machine()


# -- leaky_parser -----------------------------------------------------------------

VALID = leaky.LeakyParser.valid_input()


def run_many(t, inputs, reset):
    t.attach()
    t.reset()
    for i, data in enumerate(inputs):
        if reset:
            t.reset()
        out = t.run(data)
        if out.crashed:
            return i, out
    return None, None


def test_leaky_crashes_on_the_32nd_valid_input():
    i, out = run_many(get_target("leaky_parser"), [VALID] * 40, reset=False)
    assert i == 31 and out.bug_id == "leak-overflow"


def test_leaky_never_crashes_with_reset():
    assert run_many(get_target("leaky_parser"), [VALID] * 1000, reset=True) == (None, None)


def test_leaky_invalid_inputs_do_not_count():
    bad = [b"", frame(leaky.MSG_AUTH, b"pw"), frame(99)]
    assert run_many(get_target("leaky_parser"), bad * 50, reset=False) == (None, None)


def test_leaky_threshold_configurable():
    i, _ = run_many(leaky.LeakyParser(threshold=3), [VALID] * 5, reset=False)
    assert i == 2


def test_leaky_enumeration_matches_reference():
    alphabet = [frame(leaky.MSG_HELLO), frame(leaky.MSG_AUTH, b"pw"), frame(leaky.MSG_AUTH),
                frame(leaky.MSG_DATA, b"x"), frame(leaky.MSG_BYE), frame(9)]
    t = get_target("leaky_parser")
    assert enumerate_machine(t, alphabet, 4) == t.reference_machine()


# -- stateless_parser -------------------------------------------------------------

def test_stateless_magic_crashes_with_empty_path():
    t = get_target("stateless_parser")
    out, path, _ = run_traced(t, b"RIFX")
    assert out.crashed and path == ()
    assert t.bug_class(out.bug_id) == "stateless"


@given(st.binary(max_size=24))
def test_stateless_only_magic_crashes(data):
    out = run_traced(get_target("stateless_parser"), data)[0]
    assert out.crashed == data.startswith(stateless.MAGIC)


def test_stateless_enumeration_matches_reference():
    alphabet = [b"f\x01a", b"L\x00", b"L\x01x", b"d\x02xy", b"q\x00", b"d\x09"]
    t = get_target("stateless_parser")
    assert enumerate_machine(t, alphabet, 3, prefix=b"RIFF") == t.reference_machine()


# -- witnesses and probes ---------------------------------------------------------

@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_witnesses_reproduce(name):
    t = get_target(name)
    for bug_id, inputs in t.witnesses().items():
        implicit = t.bug_class(bug_id) == "implicit-state"
        _, out = run_many(t, inputs, reset=not implicit)
        assert out is not None and out.bug_id == bug_id


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_committed_witness_files_match(name):
    t = get_target(name)
    for bug_id, inputs in t.witnesses().items():
        d = WITNESSES / bug_id
        files = sorted(d.iterdir())
        assert [f.read_bytes() for f in files] == inputs


# state-holding dict keys per target module
STATE_KEYS = {http2: ["state"], rtsp: ["state", "parse"], leaky: ["phase"],
              stateless: ["state"]}


@pytest.mark.parametrize("module", list(STATE_KEYS), ids=lambda m: m.__name__)
def test_every_state_assignment_is_probed(module):
    lines = Path(module.__file__).read_text().splitlines()
    keys = "|".join(STATE_KEYS[module])
    assign = re.compile(r'\w+\["(%s)"\]\s*=(?!=)' % keys)
    found = 0
    for i, line in enumerate(lines):
        if assign.search(line):
            found += 1
            assert "self.state(" in lines[i - 1], f"line {i + 1} is not probed"
    assert found >= 1
    # values are only ever written through the probed helpers
    literal = re.compile(r'\{"(%s)":\s*([^,}]+)' % keys)
    offenders = [i + 1 for i, line in enumerate(lines)
                 for m in literal.finditer(line)
                 if m.group(2).strip() not in ("None", "RTSPState.INIT")]
    assert offenders == []
