import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from superjet.frobenius import load_frobenius
from superjet.virsolve import kdv_family_context, kdv_family_pair, run_pipeline_1d


@pytest.fixture(scope="session")
def family_pair():
    return kdv_family_pair()


@pytest.fixture(scope="session")
def pipeline():
    return run_pipeline_1d()


@pytest.fixture(scope="session")
def b2():
    return load_frobenius("b2")


@pytest.fixture(scope="session")
def a1():
    return load_frobenius("a1")


@pytest.fixture
def ctx1():
    return kdv_family_context()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in results:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
    for note in getattr(mod, "NOTES", []):
        terminalreporter.write_line(f"NOTE  {note}")
