import numpy as np
import pytest

from qslbound import figures
from qslbound.bounds import GConvention


@pytest.mark.parametrize("name", ["fig1", "fig3", "fig4"])
def test_alpha_figures(name):
    panels = figures.FIGURES[name](64, GConvention.MAINTEXT)
    assert len(panels) == (2 if name == "fig1" else 4)
    assert len({p.name for p in panels}) == len(panels)
    for p in panels:
        assert p.values.shape == (100, 100)
        assert p.violations() == 0
        assert np.all(p.values <= figures.FIG_TAUS[:, None] + 1e-9)
        assert len(p.rows()) == 100 * 100


def test_merit_figure_normalised():
    panels = figures.fig2(64, GConvention.MAINTEXT)
    assert [p.name for p in panels] == [f"fig2_{c}" for c in "abcdef"]
    for p in panels:
        assert p.values.min() >= 0 and p.values.max() == 1.0
        assert p.violations() == 0


def test_rows_are_sorted_and_deterministic():
    a = figures.fig1(32)[0]
    b = figures.fig1(32)[0]
    assert a.rows() == b.rows()
    keys = [(r[0], r[1]) for r in a.rows()]
    assert keys == sorted(keys)


def test_violation_counter_detects_bad_values():
    p = figures.fig1(32)[0]
    p.values[3, 4] = figures.FIG_TAUS[3] + 1.0
    assert p.violations() == 1
