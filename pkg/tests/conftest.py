from datetime import date

import numpy as np
import pytest

from tzeff.contract_calendar import WEEKDAYS
from tzeff.ingest import Panel, PriceObservation
from tzeff.synthetic import ScenarioSpec, gen_market


def obs(d, code, settle, volume=10.0):
    return PriceObservation(date.fromisoformat(d) if isinstance(d, str) else d, code, float(settle), float(volume))


def business_days(start, n):
    d = WEEKDAYS.on_or_after(start)
    out = []
    while len(out) < n:
        out.append(d)
        d = WEEKDAYS.add(d, 1)
    return out


def make_panel(**spec_kw):
    spec = ScenarioSpec(**spec_kw)
    return Panel(spec.market, tuple(gen_market(spec)))


@pytest.fixture(scope="session")
def clean_panel():
    """Arbitrage-free market: no bias, no idiosyncratic noise."""
    return make_panel(seed=11, n_days=420)


@pytest.fixture(scope="session")
def noisy_panel():
    return make_panel(seed=5, n_days=420, noise_vol=0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[mark.args[0]] = ("PASS" if rep.passed else "FAIL", mark.args[1], detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[k]
        terminalreporter.write_line(f"[{status}] criterion {k}: {title}" + (f" | {detail}" if detail else ""))
