"""Parametrized surface patches, fundamental forms and curvature data.

A :class:`SurfacePatch` is an analytic chart into R^3 with exact derivative
evaluators.  The chart normal is always N = (a_u x a_v)/|a_u x a_v| (the
positive-frame convention); built-in parametrizations are oriented so that
this rule yields the outward normal on the closed example surfaces, which
fixes the signs of the second-form coefficients used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
import sympy as sp

from .errors import DegenerateJet, InvalidParameters, MinimalPoint
from .symjet import build_jet_evaluators, fd_jet_from_position


@dataclass(frozen=True)
class SurfacePatch:
    """An analytic chart with exact jets and domain/periodicity metadata."""

    name: str
    jet2_fn: Callable
    domain: tuple            # ((u_min, u_max), (v_min, v_max))
    periodic: tuple = (False, False)
    jet_fn: Optional[Callable] = None   # full jet up to max_exact_order
    max_exact_order: int = 2
    params: dict = field(default_factory=dict)

    def position(self, u, v):
        return self.jet2_fn(u, v)[0]

    def jet2(self, u, v):
        return self.jet2_fn(u, v)

    def jet(self, u, v, order=4):
        """Embedding derivatives up to ``order`` as {(i, j): vec3}."""
        if self.jet_fn is not None and order <= self.max_exact_order:
            full = self.jet_fn(u, v)
            return {ij: d for ij, d in full.items() if sum(ij) <= order}
        return fd_jet_from_position(self.position, u, v, order=order)

    def in_domain(self, u, v, margin=0.0):
        (u0, u1), (v0, v1) = self.domain
        ok_u = self.periodic[0] or (u0 + margin <= u <= u1 - margin)
        ok_v = self.periodic[1] or (v0 + margin <= v <= v1 - margin)
        return ok_u and ok_v

    def wrap(self, u, v):
        """Wrap periodic coordinates into the base window (for output only)."""
        (u0, u1), (v0, v1) = self.domain
        if self.periodic[0]:
            u = u0 + (u - u0) % (u1 - u0)
        if self.periodic[1]:
            v = v0 + (v - v0) % (v1 - v0)
        return u, v


@dataclass(frozen=True)
class FundamentalForms:
    """First (E, F, G) and second (e, f, g) fundamental form coefficients."""

    E: float
    F: float
    G: float
    e: float
    f: float
    g: float

    @property
    def det1(self):
        return self.E * self.G - self.F * self.F

    def length(self, w):
        """Metric length of a chart vector w = (du, dv)."""
        du, dv = float(w[0]), float(w[1])
        q = self.E * du * du + 2.0 * self.F * du * dv + self.G * dv * dv
        return math.sqrt(max(q, 0.0))

    def inner(self, w1, w2):
        return (self.E * w1[0] * w2[0] + self.F * (w1[0] * w2[1] + w1[1] * w2[0])
                + self.G * w1[1] * w2[1])


class PointClass(Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    UMBILIC = "umbilic"


@dataclass(frozen=True)
class CurvatureData:
    """Principal curvatures (k1 <= k2), invariants and principal directions.

    ``harmonic`` is K/H and is None when |H| is below tolerance.  Principal
    directions are unit chart vectors in the metric of the point and are
    None at umbilics (flagged indeterminate rather than picked arbitrarily).
    """

    k1: float
    k2: float
    K: float
    H: float
    harmonic: Optional[float]
    dir1: Optional[np.ndarray]
    dir2: Optional[np.ndarray]
    residual: float                 # H^2 - K, clamped at 0
    umbilic_indeterminate: bool


def point_frame(patch, u, v):
    """Position, chart tangents and unit normal at a chart point."""
    r, ru, rv, ruu, ruv, rvv = patch.jet2(u, v)
    n = np.cross(ru, rv)
    nn = float(np.linalg.norm(n))
    if nn == 0.0:
        raise DegenerateJet(f"{patch.name}: a_u x a_v = 0 at ({u}, {v})")
    return r, ru, rv, n / nn


def fundamental_forms(patch, point):
    """Both fundamental forms at a chart point.

    Raises DegenerateJet when EG - F^2 <= 0 (non-immersion or broken
    derivative evaluators).
    """
    u, v = float(point[0]), float(point[1])
    r, ru, rv, ruu, ruv, rvv = patch.jet2(u, v)
    E = float(ru @ ru)
    F = float(ru @ rv)
    G = float(rv @ rv)
    if E * G - F * F <= 0.0:
        raise DegenerateJet(f"{patch.name}: EG - F^2 <= 0 at ({u}, {v})")
    n = np.cross(ru, rv)
    n = n / np.linalg.norm(n)
    e = float(n @ ruu)
    f = float(n @ ruv)
    g = float(n @ rvv)
    return FundamentalForms(E, F, G, e, f, g)


def _principal_direction(forms, k):
    """Kernel of (II - k I) as a chart vector; picks the better row."""
    a11 = forms.e - k * forms.E
    a12 = forms.f - k * forms.F
    a22 = forms.g - k * forms.G
    # rows of the singular 2x2 system
    w1 = np.array([-a12, a11])
    w2 = np.array([-a22, a12])
    w = w1 if max(abs(a11), abs(a12)) >= max(abs(a12), abs(a22)) else w2
    ell = forms.length(w)
    if ell == 0.0:
        return None
    return w / ell


def curvatures(forms, tol=1e-10):
    """Principal curvatures, invariants and directions from the forms.

    k1 <= k2 always.  At umbilics the directions are flagged indeterminate.
    ``harmonic`` is None wherever |H| is below tolerance; use
    :func:`harmonic_mean` to turn that into a typed error.
    """
    A = forms.det1
    if A <= 0.0:
        raise DegenerateJet("EG - F^2 <= 0")
    B = forms.e * forms.G - 2.0 * forms.f * forms.F + forms.g * forms.E
    C = forms.e * forms.g - forms.f * forms.f
    H = B / (2.0 * A)
    K = C / A
    disc = H * H - K
    scale = 1.0 + H * H
    umb = disc <= tol * tol * scale
    disc = max(disc, 0.0)
    root = math.sqrt(disc)
    k1, k2 = H - root, H + root

    hscale = math.sqrt(abs(K)) + abs(H) + tol
    harmonic = None if abs(H) <= tol * hscale else K / H

    if umb:
        d1 = d2 = None
    else:
        d1 = _principal_direction(forms, k1)
        d2 = _principal_direction(forms, k2)

    return CurvatureData(k1=k1, k2=k2, K=K, H=H, harmonic=harmonic,
                         dir1=d1, dir2=d2, residual=disc,
                         umbilic_indeterminate=umb)


def harmonic_mean(curv):
    """K/H with a typed error where it is undefined.

    Raises MinimalPoint at genuinely minimal points (H ~ 0 with K < 0);
    near-flat points (K ~ 0 as well) also have no harmonic mean and raise
    the same error with K ~ 0 noted.
    """
    if curv.harmonic is None:
        raise MinimalPoint(f"harmonic mean undefined: H ~ 0 with K = {curv.K}")
    return curv.harmonic


def normal_curvature(forms, direction):
    """II(t, t) / I(t, t) for a nonzero chart direction t = [du : dv]."""
    du, dv = float(direction[0]), float(direction[1])
    den = forms.E * du * du + 2.0 * forms.F * du * dv + forms.G * dv * dv
    if den <= 0.0:
        raise InvalidParameters("normal_curvature needs a nonzero direction")
    num = forms.e * du * du + 2.0 * forms.f * du * dv + forms.g * dv * dv
    return num / den


def classify_point(curv, tol=1e-8):
    """Elliptic / hyperbolic / parabolic / umbilic at a stated tolerance."""
    if curv.residual <= tol * tol * (1.0 + curv.H * curv.H):
        return PointClass.UMBILIC
    if abs(curv.K) <= tol:
        return PointClass.PARABOLIC
    return PointClass.ELLIPTIC if curv.K > 0 else PointClass.HYPERBOLIC


# ---------------------------------------------------------------------------
# built-in surfaces
# ---------------------------------------------------------------------------

_PATCH_CACHE = {}


def _cached(key, builder):
    patch = _PATCH_CACHE.get(key)
    if patch is None:
        patch = builder()
        _PATCH_CACHE[key] = patch
    return patch


def torus(r, R):
    """Torus of revolution: tube radius r around a circle of radius R > r.

    Chart (s, theta), both 2*pi-periodic; s is the tube angle.  The theta
    direction is mirrored relative to the counterclockwise convention so the
    positive-frame normal points out of the tube, which gives
    e = -r, f = 0, g = -cos(s) (R + r cos(s)).
    """
    r, R = float(r), float(R)
    if not (R > r > 0.0):
        raise InvalidParameters(f"torus needs R > r > 0, got r={r}, R={R}")

    def build():
        s, t = sp.symbols("s t", real=True)
        w = R + r * sp.cos(s)
        exprs = [w * sp.cos(t), -w * sp.sin(t), r * sp.sin(s)]
        jet2, jet = build_jet_evaluators(exprs, s, t, order=4)
        return SurfacePatch(
            name=f"torus(r={r}, R={R})",
            jet2_fn=jet2, jet_fn=jet, max_exact_order=4,
            domain=((-math.pi, math.pi), (-math.pi, math.pi)),
            periodic=(True, True),
            params={"kind": "torus", "r": r, "R": R},
        )

    return _cached(("torus", r, R), build)


def ellipsoid_trig(a, b, c):
    """Ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 in a polar-angle chart.

    Chart (u, v): u is the (mirrored) azimuth, periodic; v in (0, pi) is the
    polar angle, with the poles excluded.  Mirroring the azimuth makes the
    positive-frame normal outward.
    """
    a, b, c = float(a), float(b), float(c)
    if not (a > b > c > 0.0):
        raise InvalidParameters(f"ellipsoid needs a > b > c > 0, got {(a, b, c)}")

    def build():
        u, v = sp.symbols("u v", real=True)
        exprs = [a * sp.cos(u) * sp.sin(v), -b * sp.sin(u) * sp.sin(v), c * sp.cos(v)]
        jet2, jet = build_jet_evaluators(exprs, u, v, order=4)
        eps = 1e-8
        return SurfacePatch(
            name=f"ellipsoid_trig({a}, {b}, {c})",
            jet2_fn=jet2, jet_fn=jet, max_exact_order=4,
            domain=((-math.pi, math.pi), (eps, math.pi - eps)),
            periodic=(True, False),
            params={"kind": "ellipsoid_trig", "a": a, "b": b, "c": c},
        )

    return _cached(("ellipsoid_trig", a, b, c), build)


def ellipsoid_ellipsoidal(a, b, c, margin=1e-6):
    """Ellipsoid in confocal (ellipsoidal) coordinates, one octant.

    u in (-b^2, -c^2), v in (-a^2, -b^2); the chart covers the open octant
    x, z > 0, y < 0 (y mirrored so the positive-frame normal is outward).
    The domain is shrunk by ``margin`` because the jets degenerate on the
    boundary lines (curvature lines / umbilic corners).
    """
    a, b, c = float(a), float(b), float(c)
    if not (a > b > c > 0.0):
        raise InvalidParameters(f"ellipsoid needs a > b > c > 0, got {(a, b, c)}")

    def build():
        u, v = sp.symbols("u v", real=True)
        a2, b2, c2 = a * a, b * b, c * c
        x = sp.sqrt(a2 * (u + a2) * (v + a2) / ((a2 - b2) * (a2 - c2)))
        y = sp.sqrt(b2 * (u + b2) * (v + b2) / ((b2 - a2) * (b2 - c2)))
        z = sp.sqrt(c2 * (u + c2) * (v + c2) / ((c2 - a2) * (c2 - b2)))
        exprs = [x, -y, z]
        jet2, jet = build_jet_evaluators(exprs, u, v, order=4)
        du = (b2 - c2) * margin
        dv = (a2 - b2) * margin
        return SurfacePatch(
            name=f"ellipsoid_ellipsoidal({a}, {b}, {c})",
            jet2_fn=jet2, jet_fn=jet, max_exact_order=4,
            domain=((-b2 + du, -c2 - du), (-a2 + dv, -b2 - dv)),
            periodic=(False, False),
            params={"kind": "ellipsoid_ellipsoidal", "a": a, "b": b, "c": c},
        )

    return _cached(("ellipsoid_ellipsoidal", a, b, c, margin), build)


def monge_umbilic(k, a, b, c, quartic=None, halfwidth=0.75):
    """Graph z = k/2 (x^2+y^2) + a/6 x^3 + b/2 x y^2 + c/6 y^3 (+ quartic).

    The normal form of an umbilic at the origin; ``quartic`` optionally maps
    (i, j) -> coefficient of x^i y^j for i + j = 4 (raw monomial
    coefficients, no factorial conventions).
    """
    k, a, b, c = float(k), float(a), float(b), float(c)
    qt = tuple(sorted((tuple(ij), float(cf)) for ij, cf in (quartic or {}).items()))

    def build():
        x, y = sp.symbols("x y", real=True)
        h = k / 2 * (x**2 + y**2) + a / 6 * x**3 + b / 2 * x * y**2 + c / 6 * y**3
        for (i, j), cf in qt:
            if i + j != 4:
                raise InvalidParameters("quartic keys must have total degree 4")
            h += cf * x**i * y**j
        jet2, jet = build_jet_evaluators([x, y, h], x, y, order=4)
        return SurfacePatch(
            name=f"monge_umbilic(k={k}, a={a}, b={b}, c={c})",
            jet2_fn=jet2, jet_fn=jet, max_exact_order=4,
            domain=((-halfwidth, halfwidth), (-halfwidth, halfwidth)),
            periodic=(False, False),
            params={"kind": "monge_umbilic", "k": k, "a": a, "b": b, "c": c,
                    "quartic": {f"{i},{j}": cf for (i, j), cf in qt}},
        )

    return _cached(("monge_umbilic", k, a, b, c, qt, halfwidth), build)


def monge_parabolic(k, a=0.0, b=0.0, c=0.0, d=0.0, A=0.0, B=0.0, C=0.0,
                    D=0.0, E=0.0, halfwidth=0.75):
    """Graph adapted to a parabolic point at the origin.

    z = k/2 y^2 + a/6 x^3 + b/2 x y^2 + d/2 x^2 y + c/6 y^3
        + A/24 x^4 + B/6 x^3 y + C/4 x^2 y^2 + D/6 x y^3 + E/24 y^4.

    The x-axis is the zero-curvature principal direction at 0.
    """
    vals = tuple(float(t) for t in (k, a, b, c, d, A, B, C, D, E))
    k, a, b, c, d, A, B, C, D, E = vals

    def build():
        x, y = sp.symbols("x y", real=True)
        h = (k / 2 * y**2 + a / 6 * x**3 + b / 2 * x * y**2 + d / 2 * x**2 * y
             + c / 6 * y**3 + A / 24 * x**4 + B / 6 * x**3 * y
             + C / 4 * x**2 * y**2 + D / 6 * x * y**3 + E / 24 * y**4)
        jet2, jet = build_jet_evaluators([x, y, h], x, y, order=4)
        return SurfacePatch(
            name=f"monge_parabolic(k={k}, a={a}, d={d}, A={A})",
            jet2_fn=jet2, jet_fn=jet, max_exact_order=4,
            domain=((-halfwidth, halfwidth), (-halfwidth, halfwidth)),
            periodic=(False, False),
            params={"kind": "monge_parabolic", "k": k, "a": a, "b": b, "c": c,
                    "d": d, "A": A, "B": B, "C": C, "D": D, "E": E},
        )

    return _cached(("monge_parabolic", vals, halfwidth), build)


_BUILTINS = {
    "torus": (torus, ("r", "R")),
    "ellipsoid_trig": (ellipsoid_trig, ("a", "b", "c")),
    "ellipsoid": (ellipsoid_trig, ("a", "b", "c")),
    "ellipsoid_ellipsoidal": (ellipsoid_ellipsoidal, ("a", "b", "c")),
    "monge_umbilic": (monge_umbilic, ("k", "a", "b", "c")),
    "monge_parabolic": (monge_parabolic, ("k", "a", "b", "c", "d", "A", "B", "C", "D", "E")),
}


def builtin_surface(kind, **params):
    """Construct a built-in surface by kind name and keyword parameters."""
    try:
        fn, required = _BUILTINS[kind]
    except KeyError:
        raise InvalidParameters(
            f"unknown surface kind {kind!r}; choose from {sorted(_BUILTINS)}") from None
    return fn(**params)
