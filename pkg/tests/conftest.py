import numpy as np
import pytest

from pqcgame.dag import CircuitDag, GateKind

CLIFFORD_1Q = ("h", "x", "y", "z", "s")
ONE_Q = ("h", "x", "y", "z", "s", "t", "tdg", "rx", "ry", "rz")
TWO_Q = ("rzz", "cnot", "cz")


def random_dag(rng, n, n_ops, kinds=ONE_Q + TWO_Q, edges=None, max_params=None):
    """Random valid circuit; two-qubit gates land on ``edges`` (all pairs if None)."""
    if edges is None:
        edges = [(a, b) for a in range(n) for b in range(a + 1, n)]
    gates = []
    params = 0
    while len(gates) < n_ops:
        kind = GateKind(kinds[rng.integers(len(kinds))])
        if kind.arity == 2:
            if n < 2 or not edges:
                continue
            a, b = edges[rng.integers(len(edges))]
            qubits = (a, b) if rng.random() < 0.5 else (b, a)
        else:
            qubits = (int(rng.integers(n)),)
        if kind.parameterized:
            if max_params is not None and params >= max_params:
                continue
            params += 1
        gates.append((kind, qubits))
    return CircuitDag.from_gates(n, gates)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance summary ------------------------------------------------------
# Tests marked ``criterion(n, title)`` are grouped by n; the terminal summary
# prints one PASS/FAIL line per criterion together with the measured values
# each test reported through the ``measured`` fixture.

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def measured(request):
    """Append ``key=value`` notes shown next to the criterion's summary line."""
    notes = []
    request.node.user_properties.append(("measured", notes))
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "notes": [], "seconds": 0.0})
    if report.failed or (report.when == "call" and report.skipped):
        entry["passed"] = False
    if report.when == "call":
        entry["seconds"] += report.duration
        for key, notes in item.user_properties:
            if key == "measured":
                entry["notes"].extend(notes)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["passed"] else "FAIL"
        notes = "; ".join(entry["notes"])
        line = f"[{status}] criterion {number:>2}: {entry['title']} ({entry['seconds']:.1f} s)"
        terminalreporter.write_line(line + (f" :: {notes}" if notes else ""))
