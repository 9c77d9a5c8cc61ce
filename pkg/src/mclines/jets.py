"""Truncated bivariate Taylor (jet) algebra.

Small fixed-order polynomial arithmetic in two variables, used to push
surface jets through tangent-plane projections and to invert chart maps
when extracting Monge-form coefficients.  Coefficients are stored densely:
``coef[i, j]`` multiplies ``x**i * y**j`` and entries with ``i + j > order``
are kept at zero.
"""

from __future__ import annotations

import numpy as np


class Jet2:
    """Bivariate polynomial truncated at a fixed total order."""

    __slots__ = ("order", "coef")

    def __init__(self, order=4, coef=None):
        self.order = int(order)
        if coef is None:
            self.coef = np.zeros((self.order + 1, self.order + 1))
        else:
            self.coef = np.asarray(coef, dtype=float).copy()
            self._truncate()

    def _truncate(self):
        n = self.order
        for i in range(n + 1):
            for j in range(n + 1):
                if i + j > n:
                    self.coef[i, j] = 0.0

    @classmethod
    def constant(cls, value, order=4):
        j = cls(order)
        j.coef[0, 0] = value
        return j

    @classmethod
    def variable(cls, which, order=4):
        j = cls(order)
        if which == 0:
            j.coef[1, 0] = 1.0
        else:
            j.coef[0, 1] = 1.0
        return j

    def copy(self):
        return Jet2(self.order, self.coef)

    def __add__(self, other):
        if not isinstance(other, Jet2):
            out = self.copy()
            out.coef[0, 0] += other
            return out
        out = Jet2(self.order, self.coef + other.coef)
        return out

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Jet2):
            out = self.copy()
            out.coef[0, 0] -= other
            return out
        return Jet2(self.order, self.coef - other.coef)

    def __rsub__(self, other):
        out = Jet2(self.order, -self.coef)
        out.coef[0, 0] += other
        return out

    def __neg__(self):
        return Jet2(self.order, -self.coef)

    def __mul__(self, other):
        n = self.order
        if not isinstance(other, Jet2):
            return Jet2(n, self.coef * other)
        out = Jet2(n)
        a, b = self.coef, other.coef
        for i in range(n + 1):
            for j in range(n + 1 - i):
                if a[i, j] == 0.0:
                    continue
                aij = a[i, j]
                for k in range(n + 1 - i - j):
                    for l in range(n + 1 - i - j - k):
                        if b[k, l] != 0.0:
                            out.coef[i + k, j + l] += aij * b[k, l]
        return out

    __rmul__ = __mul__

    def compose(self, p, q):
        """Substitute jets (p, q) for the two variables of self."""
        n = self.order
        # powers of p and q up to the order
        pp = [Jet2.constant(1.0, n)]
        qq = [Jet2.constant(1.0, n)]
        for _ in range(n):
            pp.append(pp[-1] * p)
            qq.append(qq[-1] * q)
        out = Jet2(n)
        for i in range(n + 1):
            for j in range(n + 1 - i):
                c = self.coef[i, j]
                if c != 0.0:
                    out = out + c * (pp[i] * qq[j])
        return out

    def eval(self, x, y):
        n = self.order
        total = 0.0
        for i in range(n + 1):
            for j in range(n + 1 - i):
                c = self.coef[i, j]
                if c != 0.0:
                    total += c * x**i * y**j
        return total

    def linear_part(self):
        return np.array([self.coef[1, 0], self.coef[0, 1]])

    def __repr__(self):
        terms = []
        for i in range(self.order + 1):
            for j in range(self.order + 1 - i):
                c = self.coef[i, j]
                if c != 0.0:
                    terms.append(f"{c:+.6g} x^{i} y^{j}")
        return "Jet2(" + " ".join(terms or ["0"]) + ")"


def invert_map(fx: Jet2, fy: Jet2):
    """Invert a 2D map jet (fx, fy) with zero constant term.

    Returns jets (gu, gv) with f(g(z)) = z up to the truncation order.
    Raises numpy.linalg.LinAlgError if the linear part is singular.
    """
    n = fx.order
    A = np.array([fx.linear_part(), fy.linear_part()])
    Ainv = np.linalg.inv(A)

    # strip the linear part; the tail drives the fixed-point iteration
    tx, ty = fx.copy(), fy.copy()
    tx.coef[1, 0] = tx.coef[0, 1] = 0.0
    ty.coef[1, 0] = ty.coef[0, 1] = 0.0
    tx.coef[0, 0] = ty.coef[0, 0] = 0.0

    zu = Jet2.variable(0, n)
    zv = Jet2.variable(1, n)
    gu = Ainv[0, 0] * zu + Ainv[0, 1] * zv
    gv = Ainv[1, 0] * zu + Ainv[1, 1] * zv
    # each pass fixes one more order
    for _ in range(n - 1):
        ru = zu - tx.compose(gu, gv)
        rv = zv - ty.compose(gu, gv)
        gu = Ainv[0, 0] * ru + Ainv[0, 1] * rv
        gv = Ainv[1, 0] * ru + Ainv[1, 1] * rv
    return gu, gv


def rotate_jet(jet: Jet2, angle):
    """Express ``jet`` in axes rotated by ``angle`` (new = R(-angle) old)."""
    c, s = np.cos(angle), np.sin(angle)
    X = Jet2.variable(0, jet.order)
    Y = Jet2.variable(1, jet.order)
    # old coordinates in terms of the rotated ones
    x = c * X - s * Y
    y = s * X + c * Y
    return jet.compose(x, y)
