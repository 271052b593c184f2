"""Shared fixtures and hypothesis strategies for ci_lab tests."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from ci_lab.claims import build_ce1, build_ce2
from ci_lab.prob_core import Schema, make_table

BINARY = ("0", "1")


@pytest.fixture
def ce1():
    return build_ce1()


@pytest.fixture
def ce2():
    return build_ce2()


@pytest.fixture
def clean_env(monkeypatch):
    """Drop CI_LAB_* overrides so Settings falls back to defaults."""
    for name in ("CI_LAB_MAX_CELLS", "CI_LAB_MAX_PARTITION_SUPPORT", "CI_LAB_MAX_GRID_TABLES"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


@st.composite
def joint_tables(draw, n_vars=3, max_support=3, max_weight=4, allow_zeros=True):
    """Exact tables over V0..V{n-1} with integer weights normalised to 1.

    Zero weights are frequent so that degenerate strata are exercised.
    """
    sizes = [draw(st.integers(min_value=1, max_value=max_support)) for _ in range(n_vars)]
    schema = Schema.of(
        *((f"V{i}", tuple(str(j) for j in range(s))) for i, s in enumerate(sizes))
    )
    cells = list(itertools.product(*(range(s) for s in sizes)))
    low = 0 if allow_zeros else 1
    weights = draw(
        st.lists(
            st.integers(min_value=low, max_value=max_weight),
            min_size=len(cells),
            max_size=len(cells),
        ).filter(lambda ws: sum(ws) > 0)
    )
    total = sum(weights)
    entries = [
        ({f"V{i}": str(v) for i, v in enumerate(cell)}, Fraction(w, total))
        for cell, w in zip(cells, weights)
        if w
    ]
    return make_table(schema, entries)
