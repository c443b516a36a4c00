import pytest

from defzeros.pathology import build_pathology, write_artifact


@pytest.fixture(scope="session")
def pathology_artifact():
    """The (8, 20, 40), K = 5 construction, verified once per session."""
    return build_pathology((8, 20, 40), 5)


@pytest.fixture(scope="session")
def pathology_dir(pathology_artifact, tmp_path_factory):
    out = tmp_path_factory.mktemp("pathology")
    write_artifact(pathology_artifact, out)
    return out


ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    """Store the one-line verdict for an acceptance criterion."""
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
