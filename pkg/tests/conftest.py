import json
import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = Path(__file__).resolve().parent.parent
TESTDATA = ROOT / "testdata"
C_CORPUS = TESTDATA / "c_corpus"
WITNESSES = TESTDATA / "witnesses"

V = "stream->state"

# Five stream traces over the eight H2O stream states (values 0..7); together
# they walk every transition of the implemented stream machine.
H2O_TRACES = [
    [0, 1, 3, 4, 5, 6, 7],
    [0, 1, 2, 3, 4, 7],
    [0, 1, 7],
    [0, 1, 2, 7],
    [0, 1, 3, 4, 5, 7, 0, 1, 7],
]
H2O_EDGES = {
    (0, 1), (1, 2), (1, 3), (1, 7), (2, 3), (2, 7), (3, 4), (4, 5), (4, 7),
    (5, 6), (5, 7), (6, 7), (7, 0),
}


@pytest.fixture
def h2o_traces():
    return [[(V, v) for v in trace] for trace in H2O_TRACES]


def corpus_sources():
    """(name, text) for the top-level fixture files; ext/ is deliberately unscanned."""
    return [(p.name, p.read_text()) for p in sorted(C_CORPUS.iterdir())
            if p.suffix in (".c", ".h")]


@pytest.fixture(scope="session")
def labels():
    return json.loads((C_CORPUS / "labels.json").read_text())


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
