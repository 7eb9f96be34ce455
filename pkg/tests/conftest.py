import json
from collections import defaultdict
from pathlib import Path

import pytest

from qforest.forest import make_forest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

F2_TREES = [
    {"height": 3, "attr_index": [0, 1, 2], "leaf_prob": [0.1, 0.9, 0.3, 0.5]},
    {"height": 3, "attr_index": [2, 0, 1], "leaf_prob": [0.0, 0.4, 0.8, 0.2]},
]


@pytest.fixture
def f2():
    return make_forest(3, F2_TREES)


@pytest.fixture
def f2_path():
    return FIXTURES / "f2.json"


def write_forest(tmp_path, doc, name="forest.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


# acceptance summary: one line per criterion, failing if any of its parts fail

_results = defaultdict(list)
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion part")


def _record(item, passed):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        number, title = marker.args
        _titles[number] = title
        _results[number].append((item.name, passed))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    outcome = yield
    _record(item, outcome.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        parts = _results[number]
        failed = [name for name, ok in parts if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {number}: {status}  {_titles[number]}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
