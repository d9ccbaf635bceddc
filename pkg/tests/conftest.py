import pytest

from wstl.fixtures import robot


@pytest.fixture(scope="session")
def robot_corpus():
    """``(formula, store, {"pd1", "pd2", "pd3"})`` of the bundled navigation task."""
    return robot()


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and rep.when == "call":
                lines.append((props["criterion"], "PASS" if rep.passed else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for text, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {text}")
