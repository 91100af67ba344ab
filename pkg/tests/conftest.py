import random

import pytest
from hypothesis import settings, strategies as st

from nanophrase.fuzz import random_phrase

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def phrases(draw, max_letters=8, max_components=4, min_components=1):
    seed = draw(st.integers(0, 2**63 - 1))
    return random_phrase(random.Random(seed), max_letters, max_components, min_components)


@pytest.fixture
def rng():
    return random.Random(20261017)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        name, ok, elapsed = RESULTS[number]
        terminalreporter.write_line(f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'} in {elapsed:.2f}s")
