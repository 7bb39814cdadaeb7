import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thzscatter.quadrature import GL_ORDER, composite_nodes, refine_until_converged


@given(st.integers(0, 2 * GL_ORDER - 1), st.integers(1, 8))
def test_exact_for_polynomials(deg, panels):
    x, w = composite_nodes(-0.5, 2.0, panels)
    exact = (2.0 ** (deg + 1) - (-0.5) ** (deg + 1)) / (deg + 1)
    assert np.sum(w * x ** deg) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_weights_sum_to_length():
    x, w = composite_nodes(1.0, 4.0, 7)
    assert w.sum() == pytest.approx(3.0, rel=1e-14)
    assert x.min() > 1.0 and x.max() < 4.0
    assert len(x) == 7 * GL_ORDER


def test_nodes_are_deterministic():
    a = composite_nodes(0.0, 1.0, 5)
    b = composite_nodes(0.0, 1.0, 5)
    assert all(np.array_equal(p, q) for p, q in zip(a, b))


def test_refinement_converges_on_oscillatory_integrand():
    def evaluate(n):
        x, w = composite_nodes(0.0, 1.0, n)
        return float(np.sum(w * np.cos(200.0 * x)))

    val, panels, ok = refine_until_converged(evaluate, 1, 1e-12)
    assert ok
    assert val == pytest.approx(math.sin(200.0) / 200.0, rel=1e-11)
    assert panels > 1


def test_refinement_reports_failure():
    def evaluate(n):
        return float(n)  # never settles

    _, _, ok = refine_until_converged(evaluate, 1, 1e-12, max_panels=8)
    assert not ok
