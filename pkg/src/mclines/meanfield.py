"""Mean-curvature functions and their quadratic line fields.

For a mean function mu(k1, k2), the mu-curvature lines are the directions
with normal curvature equal to mu; over a chart they solve the binary
quadratic equation

    Lc dv^2 + Mc du dv + Nc du^2 = 0,

with (Lc, Mc, Nc) = (g - mu G, 2 (f - mu F), e - mu E).  The harmonic case
also admits a polynomial form (no division by H) built from nested Jacobians
of the two fundamental forms; both are provided and their root pairs agree
on the elliptic region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import (AmbiguousBranch, HarmonicUndefined, MuUndefined,
                     UmbilicPoint)
from .surfaces import FundamentalForms, curvatures, fundamental_forms


class MeanKind(Enum):
    HARMONIC = "harmonic"
    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"
    ASYMPTOTIC = "asymptotic"
    PRINCIPAL_MIN = "principal-min"
    PRINCIPAL_MAX = "principal-max"
    HOLDER = "holder"


@dataclass(frozen=True)
class MeanCurvatureFunction:
    """A tagged mean of the principal curvatures.

    The evaluator is odd under a simultaneous sign flip of (k1, k2), so the
    means stay consistent on surfaces where both principal curvatures are
    negative (outward normals on convex bodies).
    """

    kind: MeanKind
    r: Optional[float] = None   # Holder exponent

    def __call__(self, k1, k2):
        kind = self.kind
        if kind is MeanKind.ASYMPTOTIC:
            return 0.0
        if kind is MeanKind.PRINCIPAL_MIN:
            return min(k1, k2)
        if kind is MeanKind.PRINCIPAL_MAX:
            return max(k1, k2)
        if kind is MeanKind.ARITHMETIC:
            return 0.5 * (k1 + k2)
        if kind is MeanKind.HARMONIC:
            s = k1 + k2
            if s == 0.0:
                raise MuUndefined("harmonic mean undefined at H = 0")
            return 2.0 * k1 * k2 / s
        # geometric and Holder need a common sign
        if k1 * k2 < 0.0:
            raise MuUndefined(f"{kind.value} mean needs k1*k2 >= 0")
        sgn = -1.0 if (k1 + k2) < 0.0 else 1.0
        a1, a2 = abs(k1), abs(k2)
        if kind is MeanKind.GEOMETRIC:
            return sgn * math.sqrt(a1 * a2)
        if kind is MeanKind.HOLDER:
            r = self.r
            if r is None or r == 0.0:
                return sgn * math.sqrt(a1 * a2)
            if a1 == 0.0 or a2 == 0.0:
                if r > 0:
                    return sgn * (0.5 * (a1**r + a2**r)) ** (1.0 / r)
                raise MuUndefined("Holder mean with r < 0 undefined at a zero curvature")
            return sgn * (0.5 * (a1**r + a2**r)) ** (1.0 / r)
        raise MuUndefined(f"unknown mean kind {kind}")

    @classmethod
    def parse(cls, text):
        """Parse CLI/config spellings: harmonic | arithmetic | geometric |
        asymptotic | principal-min | principal-max | holder:<r>."""
        t = text.strip().lower()
        if t.startswith("holder:"):
            return cls(MeanKind.HOLDER, r=float(t.split(":", 1)[1]))
        return cls(MeanKind(t))


HARMONIC = MeanCurvatureFunction(MeanKind.HARMONIC)
ARITHMETIC = MeanCurvatureFunction(MeanKind.ARITHMETIC)
GEOMETRIC = MeanCurvatureFunction(MeanKind.GEOMETRIC)
ASYMPTOTIC = MeanCurvatureFunction(MeanKind.ASYMPTOTIC)


def harmonic_bde_eq1(forms, curv, tol=1e-12):
    """Rational-form coefficients (g - (K/H)G, 2(f - (K/H)F), e - (K/H)E)."""
    if curv.harmonic is None:
        raise HarmonicUndefined("K/H undefined: H ~ 0")
    kh = curv.harmonic
    return (forms.g - kh * forms.G,
            2.0 * (forms.f - kh * forms.F),
            forms.e - kh * forms.E)


def harmonic_bde_eq2(forms):
    """Polynomial-form coefficients of the harmonic line equation.

    L = g(gE - eG) + 2f(fG - gF)
    M = 2g(fE - eF) + 2e(fG - gF)
    N = e(eG - gE) + 2f(fE - eF)

    These equal 2H (EG - F^2) times the rational-form coefficients, so the
    root directions coincide wherever H != 0; unlike the rational form they
    are defined at H = 0 as well.
    """
    E, F, G, e, f, g = forms.E, forms.F, forms.G, forms.e, forms.f, forms.g
    L = g * (g * E - e * G) + 2.0 * f * (f * G - g * F)
    M = 2.0 * g * (f * E - e * F) + 2.0 * e * (f * G - g * F)
    N = e * (e * G - g * E) + 2.0 * f * (f * E - e * F)
    return (L, M, N)


def mu_bde(forms, curv, mu):
    """Coefficients (g - mu G, 2(f - mu F), e - mu E) for a mean function."""
    val = mu(curv.k1, curv.k2)
    return (forms.g - val * forms.G,
            2.0 * (forms.f - val * forms.F),
            forms.e - val * forms.E)


@dataclass(frozen=True)
class QuadraticLineField:
    """A binary quadratic direction field over a chart.

    ``coefficients(u, v)`` returns the triple (Lc, Mc, Nc) of
    Lc dv^2 + Mc du dv + Nc du^2 = 0 at a chart point; ``from_forms``
    computes the same triple from already-evaluated fundamental forms
    (the tracing hot path evaluates the forms once and reuses them).
    """

    patch: object
    mean: Optional[MeanCurvatureFunction]
    provenance: str        # "eq1" | "eq2" | "generic-mu"
    from_forms: Callable

    def coefficients(self, u, v):
        return self.from_forms(fundamental_forms(self.patch, (u, v)))

    @classmethod
    def harmonic(cls, patch, form="eq2"):
        if form == "eq1":
            def from_forms(forms):
                return harmonic_bde_eq1(forms, curvatures(forms))
            return cls(patch, HARMONIC, "eq1", from_forms)
        return cls(patch, HARMONIC, "eq2", harmonic_bde_eq2)

    @classmethod
    def for_mean(cls, patch, mu):
        if mu.kind is MeanKind.HARMONIC:
            return cls.harmonic(patch)

        def from_forms(forms):
            return mu_bde(forms, curvatures(forms), mu)

        return cls(patch, mu, "generic-mu", from_forms)

    @classmethod
    def principal(cls, patch):
        """Principal-direction equation (Fg - Gf, Eg - Ge, Ef - Fe)."""

        def from_forms(forms):
            E, F, G, e, f, g = (forms.E, forms.F, forms.G,
                                forms.e, forms.f, forms.g)
            return (F * g - G * f, E * g - G * e, E * f - F * e)

        return cls(patch, None, "principal", from_forms)


@dataclass(frozen=True)
class DirectionSet:
    """Root directions of a binary quadratic equation at one point.

    ``dirs`` holds 0, 1 or 2 unit chart vectors; a double root is one
    direction with multiplicity 2; identically-zero coefficients are
    reported as indeterminate (umbilic), never raised.
    """

    dirs: tuple
    multiplicity: int = 1
    indeterminate: bool = False

    @property
    def count(self):
        return len(self.dirs)


def directions(coeffs, forms, tol=1e-13):
    """Solve Lc dv^2 + Mc du dv + Nc du^2 = 0 for unit chart directions.

    The quadratic is solved in whichever slope variable has the dominant
    leading coefficient (dv/du against Lc, du/dv against Nc), which avoids
    cancellation when a root aligns with a chart axis.  Directions are
    normalized in the first fundamental form.
    """
    Lc, Mc, Nc = (float(c) for c in coeffs)
    scale = max(abs(Lc), abs(Mc), abs(Nc))
    if scale <= tol:
        return DirectionSet(dirs=(), indeterminate=True)

    def unit(w):
        return w / forms.length(w)

    swap = abs(Nc) > abs(Lc)
    # put the dominant coefficient in the leading slot
    aa, bb, cc = (Nc, Mc, Lc) if swap else (Lc, Mc, Nc)

    disc = bb * bb - 4.0 * aa * cc
    if disc < 0.0:
        if disc > -tol * scale * scale:
            disc = 0.0
        else:
            return DirectionSet(dirs=())
    sq = math.sqrt(disc)

    if aa == 0.0:
        roots = [-cc / bb] if bb != 0.0 else []
    else:
        q = -0.5 * (bb + math.copysign(sq, bb if bb != 0.0 else 1.0))
        r1 = q / aa
        r2 = cc / q if q != 0.0 else -bb / aa - r1
        roots = [r1, r2]

    vecs = []
    for t in roots:
        # non-swapped roots are slopes dv/du, swapped ones du/dv
        w = np.array([t, 1.0]) if swap else np.array([1.0, t])
        vecs.append(unit(w))

    if len(vecs) == 2:
        if disc == 0.0:
            return DirectionSet(dirs=(vecs[0],), multiplicity=2)
        return DirectionSet(dirs=tuple(vecs))
    if len(vecs) == 1:
        # linear degeneration: one root plus the axis direction at infinite slope
        w_inf = np.array([1.0, 0.0]) if swap else np.array([0.0, 1.0])
        vecs.append(unit(w_inf))
        return DirectionSet(dirs=tuple(vecs))
    return DirectionSet(dirs=())


def metric_rotation(forms, w):
    """The chart vector w rotated by +90 degrees in the surface metric."""
    root = math.sqrt(forms.det1)
    return np.array([
        (-forms.F * w[0] - forms.G * w[1]) / root,
        (forms.E * w[0] + forms.F * w[1]) / root,
    ])


def direction_angle(forms, curv, direction):
    """(cos, sin) of the oriented metric angle from the k1-principal axis."""
    if curv.umbilic_indeterminate or curv.dir1 is None:
        raise UmbilicPoint("principal axes indeterminate at an umbilic")
    e1 = curv.dir1
    e2 = metric_rotation(forms, e1)
    w = np.asarray(direction, dtype=float)
    ell = forms.length(w)
    if ell == 0.0:
        raise UmbilicPoint("zero direction")
    c = forms.inner(w, e1) / ell
    s = forms.inner(w, e2) / ell
    return c, s


def geodesic_torsion(forms, curv, direction):
    """tau_g = (k2 - k1) sin(theta) cos(theta) for the given direction.

    theta is the metric angle from the k1-principal axis; the result is
    independent of the sign choices of the direction and of the axis.
    """
    c, s = direction_angle(forms, curv, direction)
    return (curv.k2 - curv.k1) * s * c


class Branch(Enum):
    MINIMAL = "minimal"
    MAXIMAL = "maximal"

    def flipped(self):
        return Branch.MAXIMAL if self is Branch.MINIMAL else Branch.MINIMAL


def foliation_branch(forms, curv, direction, tol=1e-9):
    """Label a root direction by the sign of its geodesic torsion.

    Minimal <=> tau_g < 0, Maximal <=> tau_g > 0; near-zero torsion means
    the point is too close to the umbilic/parabolic set to label and raises
    AmbiguousBranch.
    """
    tau = geodesic_torsion(forms, curv, direction)
    scale = abs(curv.k2 - curv.k1)
    if abs(tau) <= tol * max(scale, 1e-300):
        raise AmbiguousBranch(f"|tau_g| = {abs(tau)} below tolerance")
    return Branch.MINIMAL if tau < 0.0 else Branch.MAXIMAL


def branch_direction(field, u, v, branch, tol=1e-9):
    """The unit direction of the requested foliation branch at a point."""
    forms = fundamental_forms(field.patch, (u, v))
    curv = curvatures(forms)
    ds = directions(field.coefficients(u, v), forms)
    if ds.indeterminate or ds.count == 0:
        raise AmbiguousBranch("no real root directions at this point")
    for w in ds.dirs:
        if foliation_branch(forms, curv, w, tol=tol) is branch:
            return w, forms, curv
    raise AmbiguousBranch(f"no {branch.value} root found")
