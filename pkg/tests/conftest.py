import random
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bnkh.codec import dt_to_diagram, parse_dt
from bnkh.corpus import braid_closure, is_knot_word

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def trefoil():
    return dt_to_diagram(parse_dt("4 6 2"))


@pytest.fixture
def figure_eight():
    return dt_to_diagram(parse_dt("4 6 8 2"))


@st.composite
def braid_knots(draw, max_crossings=7, min_crossings=1):
    """Knot diagrams closing random 2-4 strand braids."""
    strands = draw(st.sampled_from([2, 3, 4]))
    lo = max(min_crossings, strands - 1)
    letters = st.integers(1, strands - 1).flatmap(lambda i: st.sampled_from([i, -i]))
    word = draw(st.lists(letters, min_size=lo, max_size=max_crossings).filter(
        lambda w: is_knot_word(w, strands)))
    return braid_closure(word, strands)


def corpus_rng(seed=2024):
    return random.Random(seed)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
