"""Umbilic points, the parabolic curve, Monge normal forms, classification.

Umbilics are classified through the cubic normal form

    h = k/2 (x^2 + y^2) + a/6 x^3 + b/2 x y^2 + c/6 y^3 + O(4)

obtained by a tangent-plane graph plus an axis rotation killing the x^2 y
term.  Parabolic points use the adapted quartic graph whose x-axis is the
kernel of the second form; a vanishing 'a' coefficient there means the
parabolic curve is tangent to the kernel line (a tangential point), and
the folded saddle / node / focus trichotomy is decided by
sigma = k^2 (A k - 3 d^2) and the discriminants delta = 8Ak - 23 d^2
(curvature-line lift) and delta_a = 25 d^2 - 8Ak (asymptotic lift).
All verdicts carry explicit margins: these are open conditions and
near-boundary inputs must be flagged, never silently classified.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dfield
from enum import Enum
from typing import Optional

import numpy as np

from .errors import (DegenerateCubic, InvalidParameters, NotUmbilic,
                     SingularParabolicPoint, UmbilicParabolic)
from .jets import Jet2, invert_map, rotate_jet
from .meanfield import QuadraticLineField, directions
from .surfaces import curvatures, fundamental_forms


# ---------------------------------------------------------------------------
# umbilic location
# ---------------------------------------------------------------------------


def _residual(patch, u, v):
    curv = curvatures(fundamental_forms(patch, (u, v)))
    return curv.residual / (1.0 + curv.H * curv.H)


def _grad_fd(fn, y, rel=2.5e-4):
    out = np.zeros(2)
    for i in range(2):
        h = max(1.0, abs(y[i])) * rel
        vals = []
        for k in (-2, -1, 1, 2):
            yy = y.copy()
            yy[i] += k * h
            vals.append(fn(yy))
        out[i] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
    return out


def _hess_fd(fn, y, rel=5e-4):
    H = np.zeros((2, 2))
    h = np.array([max(1.0, abs(y[0])) * rel, max(1.0, abs(y[1])) * rel])
    f0 = fn(y)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h[i]
        H[i, i] = (fn(y + e) - 2 * f0 + fn(y - e)) / h[i] ** 2
    e0 = np.array([h[0], 0.0])
    e1 = np.array([0.0, h[1]])
    H[0, 1] = H[1, 0] = (fn(y + e0 + e1) - fn(y + e0 - e1)
                         - fn(y - e0 + e1) + fn(y - e0 - e1)) / (4 * h[0] * h[1])
    return H


def locate_umbilics(patch, region=None, tol=1e-8, grid=48):
    """Chart points minimizing the scaled umbilic residual (H^2 - K).

    Grid seeding, Newton descent on the residual's gradient, then a polish
    on the form-proportionality equations (e G - g E, e F - f E), which are
    regular at generic umbilics.  Duplicates within 10*tol are merged.
    """
    (u0, u1), (v0, v1) = region if region is not None else patch.domain
    eps_u = 0.0 if patch.periodic[0] else (u1 - u0) * 1e-3
    eps_v = 0.0 if patch.periodic[1] else (v1 - v0) * 1e-3
    us = np.linspace(u0 + eps_u, u1 - eps_u, grid)
    vs = np.linspace(v0 + eps_v, v1 - eps_v, grid)
    vals = np.array([[_residual(patch, uu, vv) for vv in vs] for uu in us])

    def fn(y):
        return _residual(patch, y[0], y[1])

    # candidates: all strict local grid minima, best first, capped
    cands = []
    for i in range(grid):
        for j in range(grid):
            lo = vals[max(0, i - 1):i + 2, max(0, j - 1):j + 2].min()
            if vals[i, j] <= lo:
                cands.append((vals[i, j], i, j))
    cands.sort()
    found = []
    for _, i, j in cands[:48]:
            y = np.array([us[i], vs[j]])
            for _ in range(40):                # Newton on grad(residual)
                g = _grad_fd(fn, y)
                Hm = _hess_fd(fn, y)
                try:
                    step = np.linalg.solve(Hm, -g)
                except np.linalg.LinAlgError:
                    break
                nstep = float(np.linalg.norm(step))
                if nstep > 0.2:
                    step *= 0.2 / nstep
                y = y + step
                if not patch.in_domain(y[0], y[1]):
                    break
                if nstep < 1e-12:
                    break
            if not patch.in_domain(y[0], y[1]):
                continue
            y = _polish_umbilic(patch, y)
            if fn(y) <= tol * tol:
                found.append(y)

    merged = []
    for y in found:
        y = np.array(patch.wrap(y[0], y[1]))
        if all(_chart_dist(patch, y, z) > 10 * max(tol, 1e-10) for z in merged):
            merged.append(y)
    return [tuple(map(float, y)) for y in merged]


def _chart_dist(patch, p, q):
    du = p[0] - q[0]
    dv = p[1] - q[1]
    (u0, u1), (v0, v1) = patch.domain
    if patch.periodic[0]:
        period = u1 - u0
        du = (du + 0.5 * period) % period - 0.5 * period
    if patch.periodic[1]:
        period = v1 - v0
        dv = (dv + 0.5 * period) % period - 0.5 * period
    return math.hypot(du, dv)


def _polish_umbilic(patch, y, iters=12):
    """Newton on the proportionality system (eG - gE, eF - fE) = 0."""

    def sys(yy):
        fo = fundamental_forms(patch, (yy[0], yy[1]))
        return np.array([fo.e * fo.G - fo.g * fo.E, fo.e * fo.F - fo.f * fo.E])

    for _ in range(iters):
        r = sys(y)
        J = np.zeros((2, 2))
        for i in range(2):
            h = max(1.0, abs(y[i])) * 1e-6
            e = np.zeros(2)
            e[i] = h
            J[:, i] = (sys(y + e) - sys(y - e)) / (2 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return y
        if not np.all(np.isfinite(step)):
            return y
        y2 = y + step
        if not patch.in_domain(y2[0], y2[1]):
            return y
        y = y2
        if np.linalg.norm(step) < 1e-14:
            break
    return y


# ---------------------------------------------------------------------------
# tangent-plane graph jets and Monge normal forms
# ---------------------------------------------------------------------------


def graph_jet(patch, point, x_axis=None, order=4):
    """Taylor jet of the tangent-plane graph z = h(x, y) at a surface point.

    The frame is (X, Y, N) with X = ``x_axis`` (a unit tangent 3-vector,
    defaulting to normalized a_u), Y = N x X.  Returns the :class:`Jet2`
    of h together with the frame.
    """
    u, v = float(point[0]), float(point[1])
    jets = patch.jet(u, v, order=order)
    p0 = jets[(0, 0)]
    ru, rv = jets[(1, 0)], jets[(0, 1)]
    n = np.cross(ru, rv)
    n = n / np.linalg.norm(n)
    if x_axis is None:
        X = ru / np.linalg.norm(ru)
    else:
        X = np.asarray(x_axis, dtype=float)
        X = X - (X @ n) * n
        X = X / np.linalg.norm(X)
    Y = np.cross(n, X)

    fact = [1.0, 1.0, 2.0, 6.0, 24.0]
    Xj, Yj, Zj = Jet2(order), Jet2(order), Jet2(order)
    for (i, j), d in jets.items():
        if i + j > order or (i, j) == (0, 0):
            continue
        w = 1.0 / (fact[i] * fact[j])
        rel = d
        Xj.coef[i, j] = w * float(rel @ X)
        Yj.coef[i, j] = w * float(rel @ Y)
        Zj.coef[i, j] = w * float(rel @ n)
    gu, gv = invert_map(Xj, Yj)
    h = Zj.compose(gu, gv)
    return h, (X, Y, n)


def _flip_y(jet):
    out = jet.copy()
    for i in range(jet.order + 1):
        for j in range(jet.order + 1 - i):
            out.coef[i, j] = -jet.coef[i, j] * ((-1.0) ** j)
    return out


def _flip_x(jet):
    out = jet.copy()
    for i in range(jet.order + 1):
        for j in range(jet.order + 1 - i):
            out.coef[i, j] = jet.coef[i, j] * ((-1.0) ** i)
    return out


def _rotate_pi(jet):
    """(x, y) -> (-x, -y): the orientation-preserving axis flip."""
    out = jet.copy()
    for i in range(jet.order + 1):
        for j in range(jet.order + 1 - i):
            out.coef[i, j] = jet.coef[i, j] * ((-1.0) ** (i + j))
    return out


@dataclass(frozen=True)
class UmbilicNormalForm:
    k: float
    a: float
    b: float
    c: float
    rotation: float        # applied axis rotation
    residual_x2y: float    # leftover x^2 y coefficient (should be ~ 0)


def monge_normal_form(patch, point, tol=1e-6):
    """Cubic normal form (k, a, b, c) of an umbilic point.

    Rotates the tangent axes so the x^2 y coefficient vanishes; among the
    admissible angles the smallest non-negative one is chosen, ties broken
    towards b >= 0.  Raises NotUmbilic away from umbilics and
    DegenerateCubic when the whole cubic jet vanishes (spherical jet).
    """
    curv = curvatures(fundamental_forms(patch, point))
    if curv.residual > tol * tol * (1.0 + curv.H ** 2):
        raise NotUmbilic(f"residual {curv.residual} too large at {tuple(point)}")

    h, _frame = graph_jet(patch, point, order=3 if patch.max_exact_order < 4 else 4)
    k = h.coef[2, 0] + h.coef[0, 2]          # = 2 * (k/2)
    cubic_scale = max(abs(h.coef[3, 0]), abs(h.coef[2, 1]),
                      abs(h.coef[1, 2]), abs(h.coef[0, 3]))
    if cubic_scale < 1e-12 * max(1.0, abs(k)):
        raise DegenerateCubic("cubic jet vanishes at the umbilic")

    def c21(phi):
        return rotate_jet(h, phi).coef[2, 1]

    # c21 is a trig polynomial in cos/sin(phi), cos/sin(3 phi): scan + bisect
    n_scan = 720
    phis = np.linspace(0.0, 2.0 * math.pi, n_scan, endpoint=False)
    vals = np.array([c21(p) for p in phis])
    roots = []
    for i in range(n_scan):
        a0, a1 = vals[i], vals[(i + 1) % n_scan]
        if a0 == 0.0:
            roots.append(phis[i])
        elif a0 * a1 < 0.0:
            lo, hi = phis[i], phis[i] + 2.0 * math.pi / n_scan
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if c21(lo) * c21(mid) <= 0.0:
                    hi = mid
                else:
                    lo = mid
            roots.append(0.5 * (lo + hi))
    if not roots:
        raise DegenerateCubic("no rotation kills the x^2 y term")
    roots = sorted(roots)

    def extract(phi):
        hr = rotate_jet(h, phi)
        return UmbilicNormalForm(
            k=hr.coef[2, 0] + hr.coef[0, 2],
            a=6.0 * hr.coef[3, 0], b=2.0 * hr.coef[1, 2], c=6.0 * hr.coef[0, 3],
            rotation=phi, residual_x2y=hr.coef[2, 1])

    best = extract(roots[0])
    # tie break: among angles equal to the smallest within tolerance, b >= 0
    for phi in roots[1:]:
        if abs(phi - roots[0]) < 1e-7:
            cand = extract(phi)
            if best.b < 0.0 <= cand.b:
                best = cand
    return best


class UmbilicClass(Enum):
    H1 = "H1"
    H2 = "H2"
    H3 = "H3"
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class UmbilicVerdict:
    label: UmbilicClass
    margin: float              # distance of the deciding quantity to zero
    discriminant: float
    transversality: float

    def to_dict(self):
        return {"label": self.label.value, "margin": self.margin,
                "discriminant": self.discriminant,
                "transversality": self.transversality}


def delta_harmonic(a, b, c):
    return (4.0 * c * c * (2.0 * a - b) ** 2
            - (3.0 * c * c + (a - 5.0 * b) ** 2)
            * (3.0 * (a - 5.0 * b) * (a - b) + c * c))


def delta_principal(a, b, c):
    return 4.0 * b * (a - 2.0 * b) ** 3 - c * c * (a - 2.0 * b) ** 2


def _classify_darbouxian(disc, trans, a, b, labels, margin, scales):
    m_disc = margin if margin is not None else 1e-6 * scales[0]
    m_trans = margin if margin is not None else 1e-6 * scales[1]
    if abs(trans) <= m_trans:
        return UmbilicVerdict(UmbilicClass.DEGENERATE, abs(trans), disc, trans)
    if disc > m_disc:
        return UmbilicVerdict(labels[0], abs(disc), disc, trans)
    ratio_sign = a / b - 1.0     # b != 0 is implied by the transversality
    if disc < -m_disc and ratio_sign > 0.0:
        return UmbilicVerdict(labels[1], min(abs(disc), abs(ratio_sign)), disc, trans)
    if ratio_sign < 0.0:
        return UmbilicVerdict(labels[2], abs(ratio_sign), disc, trans)
    return UmbilicVerdict(UmbilicClass.DEGENERATE, min(abs(disc), abs(ratio_sign)),
                          disc, trans)


def classify_umbilic_harmonic(k, a, b, c, margin=None):
    """H1 / H2 / H3, decided in that order (H1 when the discriminant is
    positive, H2 when negative with a/b > 1, H3 when a/b < 1); degenerate
    when k b (b - a) or the deciding quantity sits inside the margin."""
    disc = delta_harmonic(a, b, c)
    trans = k * b * (b - a)
    s = abs(a) + abs(b) + abs(c)
    return _classify_darbouxian(disc, trans, a, b,
                                (UmbilicClass.H1, UmbilicClass.H2, UmbilicClass.H3),
                                margin, (s ** 4 + 1e-30, abs(k) * s * s + 1e-30))


def classify_umbilic_principal(a, b, c, margin=None):
    disc = delta_principal(a, b, c)
    trans = b * (b - a)
    s = abs(a) + abs(b) + abs(c)
    return _classify_darbouxian(disc, trans, a, b,
                                (UmbilicClass.D1, UmbilicClass.D2, UmbilicClass.D3),
                                margin, (s ** 4 + 1e-30, s * s + 1e-30))


# ---------------------------------------------------------------------------
# projective-lift equilibria over an umbilic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftEquilibrium:
    slope: float               # dv/du, inf for the vertical direction
    eigenvalues: tuple         # the two transverse eigenvalues
    kind: str                  # "saddle" | "node" | "focus" | "degenerate"


@dataclass(frozen=True)
class LiftEquilibriaReport:
    equilibria: tuple
    saddle_count: int
    cubic: tuple               # coefficients of the slope cubic, highest first


def _coeff_field_jets(field, point, rel=2.5e-4):
    """First and second chart derivatives of the (L, M, N) fields."""
    u0, v0 = float(point[0]), float(point[1])

    def at(du, dv):
        return np.array(field.coefficients(u0 + du, v0 + dv))

    h = max(1.0, abs(u0), abs(v0)) * rel
    c0 = at(0, 0)
    fx = {}
    for key, (du, dv) in {"x": (1, 0), "y": (0, 1)}.items():
        vals = [at(k * du * h, k * dv * h) for k in (-2, -1, 1, 2)]
        fx[key] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
    sec = {}
    for key, (du, dv) in {"xx": (1, 0), "yy": (0, 1)}.items():
        vals = [at(k * du * h, k * dv * h) for k in (-2, -1, 0, 1, 2)]
        sec[key] = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)
    pp = at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)
    sec["xy"] = pp / (4 * h * h)
    return c0, fx, sec


def _transverse_pair(J):
    """Two dominant eigenvalues of the 3x3 lift Jacobian (third is ~ 0)."""
    lam = np.linalg.eigvals(J)
    idx = np.argsort(np.abs(lam))
    return lam[idx[1]], lam[idx[2]]


def _equilibrium_kind(l1, l2, scale):
    prod = l1 * l2
    if abs(prod.imag) > 1e-8 * scale * scale or abs(prod) < 1e-10 * scale * scale:
        pass
    if abs(l1.imag) > 1e-8 * scale and abs(l2.imag) > 1e-8 * scale:
        return "focus"
    p = prod.real
    if p < -1e-10 * scale * scale:
        return "saddle"
    if p > 1e-10 * scale * scale:
        return "node"
    return "degenerate"


def umbilic_lift_equilibria(patch, point, field=None):
    """Equilibria of the projective lift over an umbilic, with types.

    The slope cubic (from the 1-jets of the coefficient fields) gives the
    candidate directions; each equilibrium's transverse eigenvalue pair is
    computed from the analytic Jacobian built out of first and second
    coefficient-field derivatives.  The vertical direction participates
    exactly when the cubic degree drops.
    """
    field = field or QuadraticLineField.harmonic(patch, form="eq1")
    _c0, fx, sec = _coeff_field_jets(field, point)
    Lx, Mx, Nx = fx["x"]
    Ly, My, Ny = fx["y"]
    cubic = np.array([Ly, Lx + My, Mx + Ny, Nx])
    scale = max(abs(cubic).max(), 1e-300)

    eqs = []
    # finite slopes
    if abs(cubic[0]) > 1e-9 * scale:
        roots = np.roots(cubic)
    else:
        roots = np.roots(cubic[1:]) if abs(cubic[1]) > 1e-9 * scale else np.roots(cubic[2:])
    for r in roots:
        if abs(r.imag) > 1e-7 * max(1.0, abs(r)):
            continue
        p = float(r.real)
        J = _lift_jacobian_p(p, fx, sec)
        l1, l2 = _transverse_pair(J)
        eqs.append(LiftEquilibrium(slope=p, eigenvalues=(complex(l1), complex(l2)),
                                   kind=_equilibrium_kind(l1, l2, scale)))
    # vertical direction (du = 0): equilibrium iff the cubic degree drops
    if abs(cubic[0]) <= 1e-9 * scale:
        J = _lift_jacobian_q(0.0, fx, sec)
        l1, l2 = _transverse_pair(J)
        eqs.append(LiftEquilibrium(slope=math.inf, eigenvalues=(complex(l1), complex(l2)),
                                   kind=_equilibrium_kind(l1, l2, scale)))
    saddles = sum(1 for e in eqs if e.kind == "saddle")
    return LiftEquilibriaReport(equilibria=tuple(eqs), saddle_count=saddles,
                                cubic=tuple(float(x) for x in cubic))


def _lift_jacobian_p(p, fx, sec):
    Lx, Mx, Nx = fx["x"]
    Ly, My, Ny = fx["y"]
    Lxx, Mxx, Nxx = sec["xx"]
    Lxy, Mxy, Nxy = sec["xy"]
    Lyy, Myy, Nyy = sec["yy"]
    r1 = np.array([2 * Lx * p + Mx, 2 * Ly * p + My, 0.0])
    Hxx = Lxx * p * p + Mxx * p + Nxx
    Hxy = Lxy * p * p + Mxy * p + Nxy
    Hyy = Lyy * p * p + Myy * p + Nyy
    dphi_dp = 3 * Ly * p * p + 2 * (Lx + My) * p + (Mx + Ny)
    return np.array([r1, p * r1, [-(Hxx + p * Hxy), -(Hxy + p * Hyy), -dphi_dp]])


def _lift_jacobian_q(q, fx, sec):
    Lx, Mx, Nx = fx["x"]
    Ly, My, Ny = fx["y"]
    Lxx, Mxx, Nxx = sec["xx"]
    Lxy, Mxy, Nxy = sec["xy"]
    Lyy, Myy, Nyy = sec["yy"]
    # dual chart: H~ = L + M q + N q^2, field (q H~_q, H~_q, -(H~_y + q H~_x))
    r2 = np.array([Mx + 2 * Nx * q, My + 2 * Ny * q, 0.0])
    Hyy_t = Lyy + Myy * q + Nyy * q * q
    Hxy_t = Lxy + Mxy * q + Nxy * q * q
    Hxx_t = Lxx + Mxx * q + Nxx * q * q
    dpsi_dq = (My + Lx) + 2 * (Ny + Mx) * q + 3 * Nx * q * q
    return np.array([q * r2, r2, [-(Hxy_t + q * Hxx_t), -(Hyy_t + q * Hxy_t), -dpsi_dq]])


# ---------------------------------------------------------------------------
# parabolic curve tracing and tangential points
# ---------------------------------------------------------------------------


@dataclass
class ParabolicCurve:
    points: np.ndarray         # (n, 2) chart vertices on K = 0
    grad_norms: np.ndarray     # |grad K| at the vertices (regularity record)
    closed: bool
    note: str = ""


def _K_at(patch, y):
    return curvatures(fundamental_forms(patch, (y[0], y[1]))).K


def _gradK(patch, y):
    return _grad_fd(lambda z: _K_at(patch, z), np.asarray(y, dtype=float))


def _newton_to_parabolic(patch, y, tol=1e-12, gmin=1e-8, max_iter=40):
    y = np.asarray(y, dtype=float)
    for _ in range(max_iter):
        K = _K_at(patch, y)
        g = _gradK(patch, y)
        gn = float(np.linalg.norm(g))
        if gn < gmin:
            raise SingularParabolicPoint(
                f"|grad K| = {gn} below threshold near {tuple(y)}")
        y = y - K * g / (gn * gn)
        if abs(K) < tol:
            break
    return y


def trace_parabolic_curve(patch, seed, step=0.02, max_steps=4000,
                          corrector_tol=1e-12, gmin=1e-8, max_turn=0.15):
    """Predictor-corrector marching along the K = 0 level curve.

    Every vertex satisfies |K| <= corrector_tol; the gradient norm along
    the curve is returned as the regularity certificate.  Marching stops on
    loop closure, domain exit, or the step budget.
    """
    y = _newton_to_parabolic(patch, seed, tol=corrector_tol, gmin=gmin)
    pts = [y.copy()]
    gnorms = [float(np.linalg.norm(_gradK(patch, y)))]
    t_prev = None
    h = step
    closed = False
    n = 0
    while n < max_steps:
        n += 1
        g = _gradK(patch, y)
        t = np.array([-g[1], g[0]])
        t = t / np.linalg.norm(t)
        if t_prev is not None and t @ t_prev < 0:
            t = -t
        # adaptive turn control
        if t_prev is not None:
            turn = math.acos(min(1.0, max(-1.0, float(t @ t_prev))))
            if turn > max_turn and h > 1e-4 * step:
                h *= 0.5
            elif turn < 0.3 * max_turn:
                h = min(step, h * 1.3)
        y_try = y + h * t
        if not patch.in_domain(y_try[0], y_try[1]):
            break
        try:
            y_new = _newton_to_parabolic(patch, y_try, tol=corrector_tol, gmin=gmin)
        except SingularParabolicPoint:
            raise
        pts.append(y_new.copy())
        gnorms.append(float(np.linalg.norm(_gradK(patch, y_new))))
        t_prev = t
        # closure
        if n > 5 and _chart_dist(patch, y_new, pts[0]) < 0.75 * h:
            closed = True
            break
        y = y_new
    return ParabolicCurve(points=np.array(pts), grad_norms=np.array(gnorms),
                          closed=closed)


def _double_root_direction(field, forms, coeffs):
    ds = directions(coeffs, forms, tol=1e-9)
    if ds.count >= 1:
        return ds.dirs[0]
    Lc, Mc, Nc = coeffs
    if abs(Lc) >= abs(Nc) and Lc != 0.0:
        w = np.array([1.0, -Mc / (2.0 * Lc)])
    elif Nc != 0.0:
        w = np.array([-Mc / (2.0 * Nc), 1.0])
    else:
        return None
    return w / forms.length(w)


def kernel_alignment(patch, y, field=None):
    """Metric sine of the angle between the parabolic-curve tangent and the
    kernel (double-root) direction at a point of {K = 0}."""
    field = field or QuadraticLineField.harmonic(patch)
    forms = fundamental_forms(patch, (y[0], y[1]))
    coeffs = field.from_forms(forms)
    d = _double_root_direction(field, forms, coeffs)
    if d is None:
        return 0.0
    g = _gradK(patch, np.asarray(y, dtype=float))
    t = np.array([-g[1], g[0]])
    ell = forms.length(t)
    if ell == 0.0:
        return 0.0
    t = t / ell
    return math.sqrt(forms.det1) * (t[0] * d[1] - t[1] * d[0])


@dataclass(frozen=True)
class TangentialPoint:
    u: float
    v: float
    alignment_residual: float
    adapted_a: float


@dataclass
class TangentialSearch:
    points: list
    note: str = ""


def find_tangential_points(patch, curve: ParabolicCurve, field=None,
                           tol=1e-10, noise_floor=1e-6):
    """Zeros of the kernel-alignment function along a parabolic polyline.

    Sign changes are bisected to ``tol``; at each returned point the
    adapted-chart 'a' coefficient is evaluated as a diagnostic.  The noise
    floor reflects that double-root directions carry square-root noise from
    the coefficient fields; alignment below it along the whole polyline
    means the tangency is degenerate (revolution symmetry) and no isolated
    tangential points exist, which is reported in the note.
    """
    field = field or QuadraticLineField.harmonic(patch)
    pts = curve.points
    vals = np.array([kernel_alignment(patch, y, field) for y in pts])
    if np.abs(vals).max() < noise_floor:
        return TangentialSearch(points=[], note="alignment identically ~ 0 "
                                "(degenerate tangency along the whole curve)")
    out = []
    for i in range(len(pts) - 1):
        a0, a1 = vals[i], vals[i + 1]
        if a0 == 0.0 and abs(a1) > noise_floor:
            root = pts[i]
        elif a0 * a1 < 0.0 and min(abs(a0), abs(a1)) > noise_floor:
            lo, hi = pts[i], pts[i + 1]
            flo = a0
            for _ in range(80):
                mid = _newton_to_parabolic(patch, 0.5 * (lo + hi))
                fm = kernel_alignment(patch, mid, field)
                if abs(fm) < tol or np.linalg.norm(hi - lo) < 1e-14:
                    break
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            root = _newton_to_parabolic(patch, 0.5 * (lo + hi))
        else:
            continue
        try:
            form = adapted_monge_form(patch, root)
            a_diag = form.a
        except Exception:
            a_diag = math.nan
        out.append(TangentialPoint(u=float(root[0]), v=float(root[1]),
                                   alignment_residual=float(
                                       kernel_alignment(patch, root, field)),
                                   adapted_a=a_diag))
    return TangentialSearch(points=out)


# ---------------------------------------------------------------------------
# adapted parabolic normal form and folded classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParabolicNormalForm:
    k: float
    a: float
    b: float
    c: float
    d: float
    A: float
    B: float
    C: float
    D: float
    E: float

    def as_tuple(self):
        return (self.k, self.a, self.b, self.c, self.d,
                self.A, self.B, self.C, self.D, self.E)


def adapted_monge_form(patch, point, tol=1e-7):
    """Quartic graph coefficients adapted to a parabolic point.

    x runs along the kernel of the second form, y completes the positive
    frame, the normal is flipped if needed so k > 0, and the x-orientation
    is fixed by d >= 0 (then a >= 0).  Requires a single vanishing
    principal curvature: both vanishing raises UmbilicParabolic.
    """
    forms = fundamental_forms(patch, point)
    curv = curvatures(forms)
    kscale = abs(curv.k1) + abs(curv.k2)
    if kscale < 1e-10:
        raise UmbilicParabolic("both principal curvatures vanish")
    if abs(curv.K) > tol * kscale * kscale:
        raise InvalidParameters(f"point {tuple(point)} is not parabolic: K = {curv.K}")
    if curv.umbilic_indeterminate:
        raise UmbilicParabolic("flat umbilic: kernel direction undefined")

    # kernel = principal direction of the vanishing curvature
    if abs(curv.k1) <= abs(curv.k2):
        d_chart = curv.dir1
    else:
        d_chart = curv.dir2
    jets = patch.jet(float(point[0]), float(point[1]), order=1)
    ru, rv = jets[(1, 0)], jets[(0, 1)]
    X = d_chart[0] * ru + d_chart[1] * rv
    X = X / np.linalg.norm(X)

    h, _frame = graph_jet(patch, point, x_axis=X, order=4)
    if h.coef[0, 2] < 0.0:
        h = _flip_y(h)      # flips (y, z): normal flipped, frame stays positive
    d_coef = 2.0 * h.coef[2, 1]
    a_coef = 6.0 * h.coef[3, 0]
    if d_coef < -1e-12 or (abs(d_coef) <= 1e-12 and a_coef < 0.0):
        h = _rotate_pi(h)   # orientation-preserving x-axis reversal

    return ParabolicNormalForm(
        k=2.0 * h.coef[0, 2],
        a=6.0 * h.coef[3, 0], b=2.0 * h.coef[1, 2], d=2.0 * h.coef[2, 1],
        c=6.0 * h.coef[0, 3],
        A=24.0 * h.coef[4, 0], B=6.0 * h.coef[3, 1], C=4.0 * h.coef[2, 2],
        D=6.0 * h.coef[1, 3], E=24.0 * h.coef[0, 4])


class FoldedClass(Enum):
    CUSPIDAL = "cuspidal"
    FOLDED_SADDLE = "folded-saddle"
    FOLDED_NODE = "folded-node"
    FOLDED_FOCUS = "folded-focus"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class FoldedVerdict:
    label: FoldedClass
    eigenvalues: tuple
    sigma: float
    discriminant: float        # delta (curvature lift) or delta_a (asymptotic)
    margin: float

    def to_dict(self):
        return {"label": self.label.value,
                "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
                "sigma": self.sigma, "discriminant": self.discriminant,
                "margin": self.margin}


def _sigma_margin(k, d, A, margin):
    scale = k * k * (abs(A * k) + 3 * d * d) + 1e-30
    return margin if margin is not None else 1e-6 * scale


def classify_parabolic_harmonic(k, d, A, margin=None):
    """Folded type of the curvature-line foliations at a tangential point.

    sigma > 0: folded saddle; sigma < 0: folded node or focus by the sign
    of delta = 8Ak - 23 d^2.  Eigenvalues (d/2 +- sqrt(delta)/2) k are
    reported (complex for a focus).
    """
    sigma = k * k * (A * k - 3.0 * d * d)
    delta = 8.0 * A * k - 23.0 * d * d
    m = _sigma_margin(k, d, A, margin)
    root = cmath.sqrt(complex(delta, 0.0))
    lam = ((0.5 * d + 0.5 * root) * k, (0.5 * d - 0.5 * root) * k)
    d_scale = 23 * d * d + 8 * abs(A * k) + 1e-30
    m_delta = margin if margin is not None else 1e-6 * d_scale
    if sigma > m:
        return FoldedVerdict(FoldedClass.FOLDED_SADDLE, lam, sigma, delta, abs(sigma))
    if sigma < -m:
        if delta > m_delta:
            return FoldedVerdict(FoldedClass.FOLDED_NODE, lam, sigma, delta,
                                 min(abs(sigma), abs(delta)))
        if delta < -m_delta:
            return FoldedVerdict(FoldedClass.FOLDED_FOCUS, lam, sigma, delta,
                                 min(abs(sigma), abs(delta)))
    return FoldedVerdict(FoldedClass.DEGENERATE, lam, sigma, delta,
                         min(abs(sigma), abs(delta)))


def classify_parabolic_asymptotic(k, d, A, margin=None):
    """Folded type of the asymptotic foliation at the same tangential point.

    The saddle condition is the sign-opposite of the curvature-line one
    (Ak - 3d^2 < 0), making saddles of one family adjacent to nodes/foci of
    the other; the node/focus split uses delta_a = 25 d^2 - 8Ak and the
    eigenvalues are d/2 +- sqrt(delta_a)/2.
    """
    core = A * k - 3.0 * d * d
    sigma = k * k * core
    delta_a = 25.0 * d * d - 8.0 * A * k
    m_core = (margin if margin is not None
              else 1e-6 * (abs(A * k) + 3 * d * d + 1e-30))
    root = cmath.sqrt(complex(delta_a, 0.0))
    r_pair = (0.5 * d + 0.5 * root, 0.5 * d - 0.5 * root)
    d_scale = 25 * d * d + 8 * abs(A * k) + 1e-30
    m_delta = margin if margin is not None else 1e-6 * d_scale
    if core < -m_core:
        return FoldedVerdict(FoldedClass.FOLDED_SADDLE, r_pair, sigma, delta_a,
                             abs(core))
    if core > m_core:
        if delta_a > m_delta:
            return FoldedVerdict(FoldedClass.FOLDED_NODE, r_pair, sigma, delta_a,
                                 min(abs(core), abs(delta_a)))
        if delta_a < -m_delta:
            return FoldedVerdict(FoldedClass.FOLDED_FOCUS, r_pair, sigma, delta_a,
                                 min(abs(core), abs(delta_a)))
    return FoldedVerdict(FoldedClass.DEGENERATE, r_pair, sigma, delta_a,
                         min(abs(core), abs(delta_a)))


def lie_cartan_jacobians(k, b, d, A, B):
    """The two 3x3 lift Jacobians at a tangential parabolic point.

    Curvature-line lift rows: [2kd, 2kb, 2k^2], [0, 0, 0],
    [Ak - 4d^2, kB - 3bd, -kd]; asymptotic lift rows: [2d, 2b, 2k],
    [0, 0, 0], [-A, -B, -3d].  Returns (DX, DY, eig(DX), eig(DY)).
    """
    DX = np.array([
        [2 * k * d, 2 * k * b, 2 * k * k],
        [0.0, 0.0, 0.0],
        [A * k - 4 * d * d, k * B - 3 * b * d, -k * d],
    ])
    DY = np.array([
        [2 * d, 2 * b, 2 * k],
        [0.0, 0.0, 0.0],
        [-A, -B, -3 * d],
    ])
    return DX, DY, np.linalg.eigvals(DX), np.linalg.eigvals(DY)


# ---------------------------------------------------------------------------
# aggregated reports
# ---------------------------------------------------------------------------


@dataclass
class UmbilicReport:
    chart_point: tuple
    space_point: tuple
    normal_form: UmbilicNormalForm
    harmonic: UmbilicVerdict
    principal: UmbilicVerdict
    lift: Optional[LiftEquilibriaReport] = None

    def to_dict(self):
        d = {
            "chart_point": list(self.chart_point),
            "space_point": list(self.space_point),
            "normal_form": {"k": self.normal_form.k, "a": self.normal_form.a,
                            "b": self.normal_form.b, "c": self.normal_form.c,
                            "rotation": self.normal_form.rotation},
            "harmonic": self.harmonic.to_dict(),
            "principal": self.principal.to_dict(),
        }
        if self.lift is not None:
            d["lift_equilibria"] = [
                {"slope": (None if math.isinf(e.slope) else e.slope),
                 "kind": e.kind,
                 "eigenvalues": [[z.real, z.imag] for z in e.eigenvalues]}
                for e in self.lift.equilibria]
            d["saddle_count"] = self.lift.saddle_count
        return d


@dataclass
class ParabolicReport:
    chart_point: tuple
    space_point: tuple
    form: ParabolicNormalForm
    harmonic: FoldedVerdict
    asymptotic: FoldedVerdict

    def to_dict(self):
        f = self.form
        return {
            "chart_point": list(self.chart_point),
            "space_point": list(self.space_point),
            "form": {"k": f.k, "a": f.a, "b": f.b, "c": f.c, "d": f.d,
                     "A": f.A, "B": f.B, "C": f.C, "D": f.D, "E": f.E},
            "harmonic": self.harmonic.to_dict(),
            "asymptotic": self.asymptotic.to_dict(),
        }


def umbilic_report(patch, chart_point, with_lift=True):
    nf = monge_normal_form(patch, chart_point)
    rep = UmbilicReport(
        chart_point=tuple(float(x) for x in chart_point),
        space_point=tuple(float(x) for x in patch.position(*chart_point)),
        normal_form=nf,
        harmonic=classify_umbilic_harmonic(nf.k, nf.a, nf.b, nf.c),
        principal=classify_umbilic_principal(nf.a, nf.b, nf.c),
        lift=umbilic_lift_equilibria(patch, chart_point) if with_lift else None,
    )
    return rep


def parabolic_report(patch, chart_point, tangential_tol=1e-6):
    form = adapted_monge_form(patch, chart_point)
    scale = abs(form.a) + abs(form.d) + 1e-30
    if abs(form.a) > tangential_tol * scale:
        lam = classify_parabolic_harmonic(form.k, form.d, form.A)
        verdict_h = FoldedVerdict(FoldedClass.CUSPIDAL, lam.eigenvalues,
                                  lam.sigma, lam.discriminant, abs(form.a))
        verdict_a = FoldedVerdict(FoldedClass.CUSPIDAL, (complex(0), complex(0)),
                                  lam.sigma, 0.0, abs(form.a))
    else:
        verdict_h = classify_parabolic_harmonic(form.k, form.d, form.A)
        verdict_a = classify_parabolic_asymptotic(form.k, form.d, form.A)
    return ParabolicReport(
        chart_point=tuple(float(x) for x in chart_point),
        space_point=tuple(float(x) for x in patch.position(*chart_point)),
        form=form, harmonic=verdict_h, asymptotic=verdict_a)
