"""Composite Gauss-Legendre rules evaluated on numpy arrays.

The RCS patch integrals are smooth but sharply peaked and oscillatory, and
have to be evaluated thousands of times in a sweep.  A fixed-order rule on
uniform panels, refined by panel doubling, vectorises over a whole batch of
integrands at once and has a fixed, reproducible node set.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

GL_ORDER = 16


@lru_cache(maxsize=None)
def _gl_reference(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(a: float, b: float, panels: int, order: int = GL_ORDER):
    """Nodes and weights of ``panels`` equal Gauss-Legendre panels on [a, b]."""
    x0, w0 = _gl_reference(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    weights = (half[:, None] * w0[None, :]).ravel()
    return nodes, weights


def refine_until_converged(evaluate, panels: int, rel_tol: float, max_panels: int = 1 << 14,
                           abs_floor: float = 0.0):
    """Double ``panels`` until two successive estimates agree.

    ``evaluate(panels)`` returns an array of estimates.  Convergence is
    elementwise: ``|new - old| <= rel_tol * |new| + abs_floor``.  Returns
    the finer estimate, the panel count used, and whether it converged.
    """
    old = np.asarray(evaluate(panels))
    while True:
        nxt = panels * 2
        new = np.asarray(evaluate(nxt))
        done = np.all(np.abs(new - old) <= rel_tol * np.abs(new) + abs_floor)
        if done:
            return new, nxt, True
        if nxt >= max_panels:
            return new, nxt, False
        panels, old = nxt, new
