import pytest

from appropriate_reliance import Trial

TRUTH, OTHER = "fake", "genuine"
BINARY = frozenset({TRUTH, OTHER})

# One trial per row of the reliance table: (initial, advice, final) correctness
# and the expected reliance class.
TABLE_ROWS = [
    ((True, True, True), "not_applicable"),
    ((True, True, False), "not_applicable"),
    ((False, False, True), "not_applicable"),
    ((False, False, False), "not_applicable"),
    ((False, True, True), "positive_ai_reliance"),
    ((False, True, False), "negative_self_reliance"),
    ((True, False, True), "positive_self_reliance"),
    ((True, False, False), "negative_ai_reliance"),
]


def binary_trial(initial_ok, advice_ok, final_ok, pid="p1", tid="t1", condition="c"):
    def pick(ok):
        return TRUTH if ok else OTHER
    return Trial(pid, condition, tid, TRUTH, pick(initial_ok), pick(advice_ok), pick(final_ok))


def make_trial(truth, initial, advice, final, pid="p1", tid="t1", condition="c"):
    return Trial(pid, condition, tid, truth, initial, advice, final)


@pytest.fixture
def archetypes():
    return [binary_trial(*pattern, tid=f"row{i + 1}") for i, (pattern, _) in enumerate(TABLE_ROWS)]


# Filled by tests/test_acceptance.py; printed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
