import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

REPO = Path(__file__).resolve().parents[1]

# Heavy run products are memoized on disk so the acceptance suite replays
# finished simulations instead of re-running them on every pytest invocation.
# scripts/warm_cache.py builds the cache up front; with a cold cache the
# run-backed tests still pass, they just pay for the simulations once.
os.environ.setdefault("HYPSLICE_CACHE", str(REPO / ".cache"))

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.register_profile("thorough", deadline=None, max_examples=400)
hypothesis.settings.load_profile(os.environ.get("HYPSLICE_HYPOTHESIS", "default"))


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return REPO / "configs"


def _load(name: str):
    from hypslice import config

    return config.validate(config.load(REPO / "configs" / name))


@pytest.fixture(scope="session")
def freewave_cfg():
    return _load("freewave.cfg")


@pytest.fixture(scope="session")
def freewave_short_cfg():
    return _load("freewave-short.cfg")


@pytest.fixture(scope="session")
def model_cfg():
    return _load("model.cfg")


@pytest.fixture(scope="session")
def zakharov_cfg():
    return _load("zakharov.cfg")


@pytest.fixture(scope="session")
def store():
    from hypslice.cli import ProductStore

    return ProductStore()


# ---------------------------------------------------------------------------
# acceptance reporting: one visible PASS/FAIL line per criterion
# ---------------------------------------------------------------------------

_ACCEPT_DETAIL: dict[str, str] = {}
_ACCEPT_OUTCOME: dict[str, str] = {}


@pytest.fixture
def acceptance_note(request):
    """Let an acceptance test attach a one-line detail to its summary row."""

    def note(text: str) -> None:
        _ACCEPT_DETAIL[request.node.nodeid] = text

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and "test_acceptance" in item.nodeid:
        _ACCEPT_OUTCOME[item.nodeid] = rep.outcome.upper()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPT_OUTCOME:
        return
    tw = terminalreporter
    tw.section("acceptance criteria")
    for nodeid in sorted(_ACCEPT_OUTCOME):
        name = nodeid.split("::")[-1]
        line = f"{name}: {_ACCEPT_OUTCOME[nodeid]}"
        detail = _ACCEPT_DETAIL.get(nodeid)
        if detail:
            line += f" — {detail}"
        tw.write_line(line)
