"""Build fast numeric jet evaluators from a symbolic parametrization.

Built-in surfaces are declared once as sympy expressions; all partial
derivatives of the embedding up to order 4 are generated symbolically and
lambdified to plain-math callables at construction time.  This gives exact
(closed-form) jets without hand-differentiation.
"""

from __future__ import annotations

import math

import numpy as np
import sympy as sp


def _multi_indices(order):
    return [(i, j) for total in range(order + 1) for i in range(total + 1) for j in [total - i]]


def build_jet_evaluators(exprs, u, v, order=4):
    """Lambdify the derivatives of a 3-vector expression up to ``order``.

    Returns ``(jet2, jet)`` where ``jet2(u, v)`` gives the six arrays
    (r, ru, rv, ruu, ruv, rvv) and ``jet(u, v)`` a dict mapping the
    derivative multi-index (i, j) to a length-3 array, for i + j <= order.
    """
    idx = _multi_indices(order)
    derivs = {}
    for (i, j) in idx:
        derivs[(i, j)] = [sp.diff(e, u, i, v, j) for e in exprs]

    flat4 = [derivs[ij][k] for ij in idx for k in range(3)]
    idx2 = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    flat2 = [derivs[ij][k] for ij in idx2 for k in range(3)]

    f2 = sp.lambdify((u, v), flat2, modules="math")
    f4 = sp.lambdify((u, v), flat4, modules="math")

    def jet2(uu, vv):
        vals = f2(uu, vv)
        return tuple(np.array(vals[3 * k:3 * k + 3]) for k in range(6))

    def jet(uu, vv):
        vals = f4(uu, vv)
        return {ij: np.array(vals[3 * k:3 * k + 3]) for k, ij in enumerate(idx)}

    return jet2, jet


def fd_jet_from_position(position, u, v, order=4, base_step=None):
    """Synthesize an embedding jet by Richardson-style central differences.

    Fallback for user patches that only supply order-2 evaluators; accuracy
    is far below the symbolic route and is only used by normal-form
    extraction when nothing better exists.
    """
    h = base_step if base_step is not None else max(abs(u), abs(v), 1.0) * 1e-3

    # tensor grid of positions, then repeated differencing
    m = order + 2
    offs = range(-m, m + 1)
    grid = {(a, b): np.asarray(position(u + a * h, v + b * h), dtype=float)
            for a in offs for b in offs}

    def d1(table, axis):
        out = {}
        for (a, b) in table:
            lo = (a - 1, b) if axis == 0 else (a, b - 1)
            hi = (a + 1, b) if axis == 0 else (a, b + 1)
            if lo in table and hi in table:
                out[(a, b)] = (table[hi] - table[lo]) / (2 * h)
        return out

    jets = {}
    for (i, j) in _multi_indices(order):
        table = grid
        for _ in range(i):
            table = d1(table, 0)
        for _ in range(j):
            table = d1(table, 1)
        jets[(i, j)] = table[(0, 0)]
    return jets


def lambdify_scalar(expr, u, v):
    f = sp.lambdify((u, v), expr, modules="math")

    def g(uu, vv):
        return float(f(uu, vv))

    return g


__all__ = ["build_jet_evaluators", "fd_jet_from_position", "lambdify_scalar", "math"]
