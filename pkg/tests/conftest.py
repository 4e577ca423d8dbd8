import json
import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hetcons import running_example_path  # noqa: E402
from hetcons.scenario import load_scenario, parse_scenario  # noqa: E402

_CRITERIA: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    label = getattr(report, "criterion", None)
    if label is not None:
        _CRITERIA.setdefault(label, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        status = "PASS" if all(_CRITERIA[label]) else "FAIL"
        terminalreporter.write_line(f"[{status}] {label}")


@pytest.fixture
def example_doc():
    return json.loads(Path(running_example_path()).read_text())


@pytest.fixture
def example_path():
    return Path(running_example_path())


@pytest.fixture
def scenario():
    return load_scenario(running_example_path())


@pytest.fixture
def models(scenario):
    return scenario.models


@pytest.fixture
def sm1(models):
    return models["SM1"]


@pytest.fixture
def sm3(models):
    return models["SM3"]


@pytest.fixture
def n1(models):
    return models["N1"]


@pytest.fixture
def write_doc(tmp_path):
    def write(doc, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return path
    return write


@pytest.fixture
def mutate(example_doc):
    """Parsed running example after applying ``fn`` to its JSON document."""
    def apply(fn):
        fn(example_doc)
        return parse_scenario(example_doc)
    return apply
