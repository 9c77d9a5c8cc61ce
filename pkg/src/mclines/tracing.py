"""Integral curves of quadratic direction fields.

Supports plain leaf tracing inside the elliptic region, folded-extended
continuation across the parabolic curve, and a projective (Lie-Cartan
style) lift for passing cuspidal contacts where the planar field is a
square root.  Periodic chart coordinates are kept unwrapped internally so
winding counts survive; wrap only for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import AmbiguousBranch, BadSeed, TangentialContact
from .meanfield import Branch, directions, foliation_branch, metric_rotation
from .rk import AdaptiveRK, StepFailed, bisect_event, hermite
from .surfaces import PointClass, classify_point, curvatures, fundamental_forms


class Termination(Enum):
    DOMAIN_EXIT = "domain-exit"
    PARABOLIC_CONTACT = "parabolic-contact"
    UMBILIC_CONTACT = "umbilic-contact"
    MAX_LENGTH = "max-length"
    MAX_STEPS = "max-steps"
    CLOSED_UP = "closed-up"
    STEP_FAILURE = "step-failure"
    MAX_TRANSITS = "max-transits"


@dataclass(frozen=True)
class Section:
    """A transversal section given by a signed crossing function.

    ``value(u, v)`` changes sign across the section; ``coord(u, v)`` is the
    coordinate along it used for return maps and cycle detection.
    """

    name: str
    value: Callable
    coord: Callable


@dataclass(frozen=True)
class SectionCrossing:
    section: str
    arclength: float
    u: float
    v: float
    coord: float
    direction: int       # sign of d(value)/ds at the crossing


@dataclass(frozen=True)
class ContactEvent:
    """A parabolic contact of a folded-extended curve."""

    arclength: float
    u: float
    v: float
    branch_after: Branch
    kind: str            # "tangential" | "cuspidal"


@dataclass
class TraceConfig:
    initial_step: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    max_arclength: float = 60.0
    max_steps: int = 200000
    max_step_size: float = 0.05
    parabolic_tol: float = 1e-10     # K threshold that ends a plain trace
    umbilic_tol: float = 1e-6        # residual threshold for umbilic stop
    branch_tol: float = 1e-9
    fold_trigger: float = 1e-7       # normalized BDE discriminant for fold handling
    closure_tol: Optional[float] = None
    min_closure_length: float = 1e-2
    sections: tuple = ()
    max_transits: Optional[int] = None


@dataclass
class IntegralCurve:
    """A traced leaf: samples, per-sample branch labels, events."""

    us: np.ndarray
    vs: np.ndarray
    tus: np.ndarray          # unit chart tangent components
    tvs: np.ndarray
    arclengths: np.ndarray
    branches: np.ndarray     # +1 maximal, -1 minimal
    reason: Termination
    crossings: list = dfield(default_factory=list)
    contacts: list = dfield(default_factory=list)
    max_residual: float = 0.0

    @property
    def n(self):
        return len(self.us)

    @property
    def length(self):
        return float(self.arclengths[-1]) if self.n else 0.0

    def endpoint(self):
        return float(self.us[-1]), float(self.vs[-1])

    def slopes(self):
        """Per-sample slope p = dv/du, falling back to the dual du/dv.

        Returns (values, kinds) with kind 'p' or 'q' per sample.
        """
        vals, kinds = [], []
        for tu, tv in zip(self.tus, self.tvs):
            if abs(tu) >= abs(tv):
                vals.append(tv / tu if tu != 0.0 else math.inf)
                kinds.append("p")
            else:
                vals.append(tu / tv)
                kinds.append("q")
        return np.array(vals), kinds

    def interpolators(self):
        """Periodic-free cubic interpolants u(s), v(s) over arclength."""
        from scipy.interpolate import CubicSpline
        s = self.arclengths
        return CubicSpline(s, self.us), CubicSpline(s, self.vs)


class _Recorder:
    def __init__(self, cfg):
        self.cfg = cfg
        self.us, self.vs, self.tus, self.tvs, self.ss, self.brs = [], [], [], [], [], []
        self.crossings = []
        self.contacts = []
        self.max_residual = 0.0

    def add(self, s, u, v, w, branch_sign):
        self.us.append(u)
        self.vs.append(v)
        self.tus.append(w[0])
        self.tvs.append(w[1])
        self.ss.append(s)
        self.brs.append(branch_sign)

    def curve(self, reason):
        return IntegralCurve(
            us=np.array(self.us), vs=np.array(self.vs),
            tus=np.array(self.tus), tvs=np.array(self.tvs),
            arclengths=np.array(self.ss), branches=np.array(self.brs, dtype=int),
            reason=reason, crossings=self.crossings, contacts=self.contacts,
            max_residual=self.max_residual)


def _bde_state(field, u, v):
    forms = fundamental_forms(field.patch, (u, v))
    return forms, field.from_forms(forms)


def _norm_disc(coeffs):
    Lc, Mc, Nc = coeffs
    scale = max(abs(Lc), abs(Mc), abs(Nc), 1e-300)
    return (Mc * Mc - 4.0 * Lc * Nc) / (4.0 * scale * scale)


def _pick_root(forms, coeffs, w_ref):
    """Root direction with positive metric inner product against w_ref."""
    ds = directions(coeffs, forms)
    if ds.indeterminate or ds.count == 0:
        return None
    best, best_dot = None, 0.0
    for w in ds.dirs:
        dot = forms.inner(w, w_ref)
        if abs(dot) > abs(best_dot):
            best, best_dot = w, dot
    if best is None:
        return None
    return best if best_dot >= 0.0 else -best


def _seed_state(patch, field, seed, branch, cfg, initial_direction=None):
    u, v = float(seed[0]), float(seed[1])
    if not patch.in_domain(u, v):
        raise BadSeed(f"seed {seed} outside the chart domain")
    forms = fundamental_forms(patch, (u, v))
    curv = curvatures(forms)
    cls = classify_point(curv)
    if cls is not PointClass.ELLIPTIC:
        raise BadSeed(f"seed classifies as {cls.value}; need an elliptic non-umbilic point")
    coeffs = field.from_forms(forms)
    ds = directions(coeffs, forms)
    if ds.indeterminate or ds.count < 2:
        raise BadSeed("no transversal root pair at the seed")
    w0 = None
    for w in ds.dirs:
        try:
            b = foliation_branch(forms, curv, w, tol=cfg.branch_tol)
        except AmbiguousBranch as exc:
            raise BadSeed(f"seed too close to the singular set: {exc}") from exc
        if b is branch:
            w0 = w
    if w0 is None:
        raise BadSeed(f"no {branch.value} direction at the seed")
    if initial_direction is not None and forms.inner(w0, initial_direction) < 0.0:
        w0 = -w0
    return u, v, w0


def _make_rhs(field, state):
    """Unit-speed branch field with direction continuity via state['w']."""

    def rhs(_t, y):
        try:
            forms, coeffs = _bde_state(field, y[0], y[1])
        except Exception:
            return np.array([math.nan, math.nan])
        w = _pick_root(forms, coeffs, state["w"])
        if w is None:
            return np.array([math.nan, math.nan])
        return w

    return rhs


def _section_machinery(cfg, patch, rec, field, state):
    prev_vals = {}

    def check(s0, y0, f0, s1, y1, f1):
        for sec in cfg.sections:
            v0 = prev_vals.get(sec.name)
            v1 = sec.value(y1[0], y1[1])
            if v0 is not None and v0 * v1 < 0.0:
                def g(t):
                    yy = hermite(s0, y0, f0, s1, y1, f1, t)
                    return sec.value(yy[0], yy[1])
                t_star = bisect_event(g, s0, s1, tol=1e-13)
                yy = _refine_point(field, state, s0, y0, t_star - s0)
                rec.crossings.append(SectionCrossing(
                    section=sec.name, arclength=t_star,
                    u=float(yy[0]), v=float(yy[1]),
                    coord=float(sec.coord(yy[0], yy[1])),
                    direction=1 if v1 > v0 else -1))
            prev_vals[sec.name] = v1

    def prime(y):
        for sec in cfg.sections:
            prev_vals[sec.name] = sec.value(y[0], y[1])

    return check, prime


def _refine_point(field, state, s0, y0, ds):
    """Re-integrate a short sub-arc for an accurate event point."""
    if ds <= 0.0:
        return np.asarray(y0, dtype=float)
    sub = AdaptiveRK(_make_rhs(field, state), s0, y0, h0=min(ds, 1e-3),
                     rtol=1e-12, atol=1e-14, h_max=max(ds, 1e-12))
    target = s0 + ds
    while sub.t < target:
        if sub.t + sub.h > target:
            sub.set_h(target - sub.t)
        sub.step()
    return sub.y


def trace_line(patch, field, seed, branch, cfg=None, initial_direction=None):
    """Trace one leaf of the chosen foliation branch from an elliptic seed.

    The curve is parametrized by surface arclength; it ends at the domain
    boundary, at parabolic or umbilic contact, at the length/step budget,
    or by closing up when ``cfg.closure_tol`` is set.  Reversing the seed
    direction retraces the same leaf.
    """
    cfg = cfg or TraceConfig()
    u0, v0, w0 = _seed_state(patch, field, seed, branch, cfg, initial_direction)
    rec = _Recorder(cfg)
    state = {"w": w0, "w0": w0.copy()}
    reason = _trace_segment(patch, field, np.array([u0, v0]), w0, branch,
                            cfg, rec, state, s_start=0.0)
    return rec.curve(reason)


def _trace_segment(patch, field, y0, w0, branch, cfg, rec, state, s_start,
                   fold_mode=False, seed_ref=None, add_initial=True):
    """March one branch segment; returns the termination reason.

    With ``fold_mode`` the segment does not stop at the parabolic set; the
    caller (folded-extended tracer) owns contact handling, triggered by the
    normalized discriminant dropping below ``cfg.fold_trigger``.
    """
    state["w"] = w0
    rhs = _make_rhs(field, state)
    rk = AdaptiveRK(rhs, s_start, y0, h0=cfg.initial_step, rtol=cfg.rtol,
                    atol=cfg.atol, h_max=cfg.max_step_size)
    branch_sign = 1 if branch is Branch.MAXIMAL else -1
    if add_initial:
        rec.add(rk.t, y0[0], y0[1], w0, branch_sign)
    check_sections, prime_sections = _section_machinery(cfg, patch, rec, field, state)
    prime_sections(y0)

    n_steps = 0
    while True:
        if n_steps >= cfg.max_steps:
            return Termination.MAX_STEPS
        s0, yy0, f0 = rk.t, rk.y.copy(), rk.fy.copy()
        try:
            out = rk.step()
        except StepFailed:
            return Termination.STEP_FAILURE
        n_steps += 1
        y1, s1 = out.y_new, out.t_new

        # domain exit on non-periodic coordinates
        if not patch.in_domain(y1[0], y1[1]):
            def outside(t):
                yy = hermite(s0, yy0, f0, s1, y1, out.f_new, t)
                return -1.0 if patch.in_domain(yy[0], yy[1]) else 1.0
            t_exit = bisect_event(outside, s0, s1, tol=1e-12)
            y_exit = hermite(s0, yy0, f0, s1, y1, out.f_new, t_exit)
            rec.add(t_exit, y_exit[0], y_exit[1], state["w"], branch_sign)
            return Termination.DOMAIN_EXIT

        forms, coeffs = _bde_state(field, y1[0], y1[1])
        curv = curvatures(forms)

        # umbilic contact
        if curv.residual <= cfg.umbilic_tol**2 * (1.0 + curv.H**2):
            rec.add(s1, y1[0], y1[1], state["w"], branch_sign)
            return Termination.UMBILIC_CONTACT

        # parabolic contact / fold trigger
        disc = _norm_disc(coeffs)
        if fold_mode:
            if disc < cfg.fold_trigger:
                w_here = out.f_new
                ell = forms.length(w_here)
                if ell > 0:
                    w_here = w_here / ell
                state["w"] = w_here
                rec.add(s1, y1[0], y1[1], w_here, branch_sign)
                check_sections(s0, yy0, f0, s1, y1, out.f_new)
                return Termination.PARABOLIC_CONTACT
            if disc < 1e-2:
                # keep steps below the distance to the fold so a step cannot
                # silently jump across the contact
                rk.set_h(min(rk.h, max(0.3 * math.sqrt(disc), 2e-6)))
        else:
            if curv.K <= cfg.parabolic_tol:
                def gK(t):
                    yy = hermite(s0, yy0, f0, s1, y1, out.f_new, t)
                    fo = fundamental_forms(patch, (yy[0], yy[1]))
                    return curvatures(fo).K - cfg.parabolic_tol
                try:
                    t_hit = bisect_event(gK, s0, s1, tol=1e-13)
                except ValueError:
                    t_hit = s1
                y_hit = hermite(s0, yy0, f0, s1, y1, out.f_new, t_hit)
                rec.add(t_hit, y_hit[0], y_hit[1], state["w"], branch_sign)
                return Termination.PARABOLIC_CONTACT

        # accepted sample
        w_new = out.f_new
        ell = forms.length(w_new)
        if ell > 0:
            w_new = w_new / ell
        state["w"] = w_new
        rec.add(s1, y1[0], y1[1], w_new, branch_sign)
        Lc, Mc, Nc = coeffs
        scale = max(abs(Lc), abs(Mc), abs(Nc), 1e-300)
        p_u, p_v = w_new
        rec.max_residual = max(rec.max_residual,
                               abs(Lc * p_v**2 + Mc * p_u * p_v + Nc * p_u**2) / scale)

        check_sections(s0, yy0, f0, s1, y1, out.f_new)

        # closure against the reference seed (distance of the step segment)
        ref = seed_ref if seed_ref is not None else np.array(
            [rec.us[0], rec.vs[0]])
        if cfg.closure_tol is not None and s0 > cfg.min_closure_length:
            hit = _segment_closure(patch, yy0, y1, ref, cfg.closure_tol)
            if hit is not None and forms.inner(state["w"], state["w0"]) > 0.0:
                def dist_at(t):
                    yy = hermite(s0, yy0, f0, s1, y1, out.f_new, t)
                    return math.hypot(*_wrapped_delta(patch, yy, ref))
                lo, hi = s0, s1
                for _ in range(60):      # ternary search on the step interval
                    m1 = lo + (hi - lo) / 3
                    m2 = hi - (hi - lo) / 3
                    if dist_at(m1) <= dist_at(m2):
                        hi = m2
                    else:
                        lo = m1
                s_hit = 0.5 * (lo + hi)
                y_hit = hermite(s0, yy0, f0, s1, y1, out.f_new, s_hit)
                rec.add(s_hit, y_hit[0], y_hit[1], state["w"], branch_sign)
                return Termination.CLOSED_UP

        if s1 >= cfg.max_arclength:
            return Termination.MAX_LENGTH


def _wrapped_delta(patch, p1, p0):
    """Chart displacement p1 - p0 with periodic coordinates wrapped."""
    (u0d, u1d), (v0d, v1d) = patch.domain
    du = p1[0] - p0[0]
    dv = p1[1] - p0[1]
    if patch.periodic[0]:
        period = u1d - u0d
        du = (du + 0.5 * period) % period - 0.5 * period
    if patch.periodic[1]:
        period = v1d - v0d
        dv = (dv + 0.5 * period) % period - 0.5 * period
    return du, dv


def _segment_closure(patch, y_prev, y_new, ref, tol):
    """Distance of the step segment to the seed in wrapped coordinates.

    Returns (fraction along the segment, distance) when within tolerance.
    """
    d0 = np.array(_wrapped_delta(patch, y_prev, ref))
    seg = np.asarray(y_new, dtype=float) - np.asarray(y_prev, dtype=float)
    L2 = float(seg @ seg)
    if L2 == 0.0:
        t = 0.0
    else:
        t = min(1.0, max(0.0, -float(d0 @ seg) / L2))
    closest = d0 + t * seg
    dist = float(np.hypot(closest[0], closest[1]))
    if dist <= tol:
        return t, dist
    return None


# ---------------------------------------------------------------------------
# folded extension across the parabolic curve
# ---------------------------------------------------------------------------


def _project_to_parabolic(patch, y, max_iter=30):
    """Newton steps along grad K onto the K = 0 level set."""
    y = np.asarray(y, dtype=float)
    for _ in range(max_iter):
        K = _K_at(patch, y)
        g = _gradK(patch, y)
        g2 = g @ g
        if g2 == 0.0:
            break
        y = y - K * g / g2
        if abs(K) < 1e-14:
            break
    return y


def _K_at(patch, y):
    return curvatures(fundamental_forms(patch, (y[0], y[1]))).K


def _gradK(patch, y, rel=2.5e-4):
    """Fourth-order central gradient of the K field."""
    out = np.zeros(2)
    for i in range(2):
        h = max(1.0, abs(y[i])) * rel
        vals = []
        for k in (-2, -1, 1, 2):
            yy = y.copy()
            yy[i] += k * h
            vals.append(_K_at(patch, yy))
        out[i] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
    return out


def _double_root_direction(field, y):
    forms, coeffs = _bde_state(field, y[0], y[1])
    ds = directions(coeffs, forms, tol=1e-9)
    if ds.count == 0:
        # clamp a slightly negative discriminant to its double root
        Lc, Mc, Nc = coeffs
        if abs(Lc) >= abs(Nc) and Lc != 0.0:
            w = np.array([1.0, -Mc / (2.0 * Lc)])
        elif Nc != 0.0:
            w = np.array([-Mc / (2.0 * Nc), 1.0])
        else:
            return None, forms
        return w / forms.length(w), forms
    return ds.dirs[0], forms


def _alignment(patch, field, y):
    """Metric sine of the angle between the parabolic tangent and the
    double-root direction at a point of the K = 0 curve."""
    d, forms = _double_root_direction(field, y)
    if d is None:
        return 0.0
    g = _gradK(patch, y)
    t = np.array([-g[1], g[0]])
    ell = forms.length(t)
    if ell == 0.0:
        return 0.0
    t = t / ell
    area = math.sqrt(forms.det1)
    return area * (t[0] * d[1] - t[1] * d[0])


def _march_on_parabolic(patch, y, delta):
    """Step delta along the K = 0 curve (tangent predictor + projection)."""
    g = _gradK(patch, y)
    t = np.array([-g[1], g[0]])
    norm = np.linalg.norm(t)
    if norm == 0.0:
        return y
    return _project_to_parabolic(patch, y + delta * t / norm)


def trace_folded_extended(patch, seed, cfg=None, field=None,
                          branch=Branch.MAXIMAL, initial_direction=None,
                          cusp_alignment=0.05, isolation_factor=20.0):
    """Trace a leaf and continue it across the parabolic set.

    Each contact switches the foliation branch; the two arcs at a contact
    share the limiting double-root tangent.  Contacts are classified as
    cuspidal (double root transversal to the parabolic curve; passed via
    the projective lift) or tangential (double root along the curve).  An
    isolated tangential point is a folded singularity and continuation is
    refused with TangentialContact; on curves whose tangency is degenerate
    along the whole parabolic set (surfaces of revolution) the contact is a
    regular fold and is passed by local reflection.
    """
    from .meanfield import QuadraticLineField

    cfg = cfg or TraceConfig()
    field = field or QuadraticLineField.harmonic(patch)
    u0, v0, w0 = _seed_state(patch, field, seed, branch, cfg, initial_direction)
    rec = _Recorder(cfg)
    state = {"w": w0, "w0": w0.copy()}
    y = np.array([u0, v0])
    w = w0
    seed_ref = y.copy()
    transits = 0
    first_segment = True

    while True:
        reason = _trace_segment(patch, field, y, w, branch, cfg, rec, state,
                                s_start=rec.ss[-1] if rec.ss else 0.0,
                                fold_mode=True, seed_ref=seed_ref,
                                add_initial=first_segment)
        first_segment = False
        if reason is not Termination.PARABOLIC_CONTACT:
            return rec.curve(reason)

        transits += 1
        if cfg.max_transits is not None and transits > cfg.max_transits:
            return rec.curve(Termination.MAX_TRANSITS)

        y_arr = np.array([rec.us[-1], rec.vs[-1]])
        w_arr = state["w"]
        s_arr = rec.ss[-1]

        y_c = _project_to_parabolic(patch, y_arr)
        align_c = _alignment(patch, field, y_c)

        if abs(align_c) > cusp_alignment:
            y_new, w_new, s_new, y_contact = _lift_passage(
                patch, field, y_arr, w_arr, s_arr, cfg)
            kind = "cuspidal"
        else:
            # isolated tangential singularity vs degenerate fold
            probe = max(1e-3, 10.0 * np.linalg.norm(y_arr - y_c))
            a_plus = _alignment(patch, field, _march_on_parabolic(patch, y_c, probe))
            a_minus = _alignment(patch, field, _march_on_parabolic(patch, y_c, -probe))
            floor = 1e-7
            if max(abs(a_plus), abs(a_minus)) > max(floor, isolation_factor * abs(align_c)):
                raise TangentialContact(
                    f"contact at {tuple(y_c)} is an isolated tangential singularity")
            y_new, w_new, s_new, y_contact = _mirror_passage(
                patch, field, y_arr, w_arr, s_arr, y_c)
            kind = "tangential"

        branch = branch.flipped()
        rec.contacts.append(ContactEvent(
            arclength=s_new, u=float(y_contact[0]), v=float(y_contact[1]),
            branch_after=branch, kind=kind))
        y, w = y_new, w_new
        state["w"] = w
        rec.add(s_new, y[0], y[1], w, 1 if branch is Branch.MAXIMAL else -1)

        # closing exactly at a relaunch point
        if cfg.closure_tol is not None and s_new > cfg.min_closure_length:
            du, dv = _wrapped_delta(patch, y, seed_ref)
            if math.hypot(du, dv) <= cfg.closure_tol:
                return rec.curve(Termination.CLOSED_UP)

        if s_new >= cfg.max_arclength:
            return rec.curve(Termination.MAX_LENGTH)


def _mirror_passage(patch, field, y_arr, w_arr, s_arr, y_c):
    """Local even-model reflection across a degenerate (tangential) fold.

    Around the contact the leaf is a metric parabola eta = C (zeta - z*)^2
    in the frame (e = fold direction, m = transverse); the arrival state
    determines C and the apex, and the outgoing state is the mirror image.
    """
    forms = fundamental_forms(patch, (y_c[0], y_c[1]))
    d, _ = _double_root_direction(field, y_c)
    e_hat = d
    m_hat = metric_rotation(forms, e_hat)

    rel = y_arr - y_c
    zeta = forms.inner(rel, e_hat)
    eta = forms.inner(rel, m_hat)
    we = forms.inner(w_arr, e_hat)
    wm = forms.inner(w_arr, m_hat)
    if we == 0.0:
        we = 1e-300
    q = wm / we

    if abs(q) < 1e-14 or abs(eta) < 1e-18:
        # effectively at the apex already: reflect the direction only
        y_out = y_arr.copy()
        zeta_star = zeta
        arc = 0.0
    else:
        c2 = q * q / (4.0 * eta) if eta != 0.0 else 0.0
        if c2 == 0.0:
            zeta_star = zeta
            y_out = y_arr.copy()
            arc = 0.0
        else:
            zeta_star = zeta - q / (2.0 * c2)
            zeta_out = 2.0 * zeta_star - zeta
            y_out = y_c + (e_hat * zeta_out + m_hat * eta)
            # arclength of the parabolic arc between arrival and exit
            half = abs(zeta_star - zeta)
            qa = abs(q)
            arc = 2.0 * half * (1.0 + qa * qa / 6.0)

    w_out = w_arr - 2.0 * forms.inner(w_arr, m_hat) * m_hat
    ell = forms.length(w_out)
    if ell > 0:
        w_out = w_out / ell
    contact = y_c + e_hat * zeta_star
    return y_out, w_out, s_arr + arc, contact


def _lift_passage(patch, field, y_arr, w_arr, s_arr, cfg):
    """Pass a cuspidal fold by integrating the projective lift.

    State is (u, v, slope, arclength); the slope chart (p = dv/du or its
    dual) is chosen so the double root is a finite small slope.  The fold
    shows up as a transversal zero of dH/dslope, after which the planar
    projection re-emerges on the other foliation branch.
    """
    d, forms0 = _double_root_direction(field, _project_to_parabolic(patch, y_arr))
    use_p = abs(d[0]) >= abs(d[1])  # p-chart iff the root has finite dv/du

    def coeff_fields(y):
        _, coeffs = _bde_state(field, y[0], y[1])
        return coeffs

    def H_and_grads(x, yv, slope):
        rel = 2.5e-4
        Lc, Mc, Nc = coeff_fields((x, yv))
        grads = []
        for i in range(2):
            h = max(1.0, abs((x, yv)[i])) * rel
            pts = []
            for k in (-2, -1, 1, 2):
                q = [x, yv]
                q[i] += k * h
                pts.append(coeff_fields(q))
            gL = (pts[0][0] - 8 * pts[1][0] + 8 * pts[2][0] - pts[3][0]) / (12 * h)
            gM = (pts[0][1] - 8 * pts[1][1] + 8 * pts[2][1] - pts[3][1]) / (12 * h)
            gN = (pts[0][2] - 8 * pts[1][2] + 8 * pts[2][2] - pts[3][2]) / (12 * h)
            grads.append((gL, gM, gN))
        if use_p:
            H = Lc * slope**2 + Mc * slope + Nc
            Hs = 2 * Lc * slope + Mc
            Hx = grads[0][0] * slope**2 + grads[0][1] * slope + grads[0][2]
            Hy = grads[1][0] * slope**2 + grads[1][1] * slope + grads[1][2]
        else:
            H = Lc + Mc * slope + Nc * slope**2
            Hs = Mc + 2 * Nc * slope
            Hx = grads[0][0] + grads[0][1] * slope + grads[0][2] * slope**2
            Hy = grads[1][0] + grads[1][1] * slope + grads[1][2] * slope**2
        return H, Hx, Hy, Hs

    # initial lifted state from the arrival direction
    if use_p:
        slope0 = w_arr[1] / w_arr[0]
    else:
        slope0 = w_arr[0] / w_arr[1]

    sign_holder = {"val": None}

    def rhs(_t, Y):
        x, yv, slope, _s = Y
        H, Hx, Hy, Hs = H_and_grads(x, yv, slope)
        if use_p:
            dx, dy = Hs, slope * Hs
            dslope = -(Hx + slope * Hy)
        else:
            dx, dy = slope * Hs, Hs
            dslope = -(Hy + slope * Hx)
        vec = np.array([dx, dy, dslope])
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            return np.array([math.nan] * 4)
        vec = vec / norm
        if sign_holder["val"] is None:
            sign_holder["val"] = 1.0 if (vec[0] * w_arr[0] + vec[1] * w_arr[1]) >= 0 else -1.0
        vec = vec * sign_holder["val"]
        try:
            fo = fundamental_forms(patch, (x, yv))
            dsdt = fo.length(vec[:2])
        except Exception:
            dsdt = 0.0
        return np.array([vec[0], vec[1], vec[2], dsdt])

    Y0 = np.array([y_arr[0], y_arr[1], slope0, s_arr])
    rk = AdaptiveRK(rhs, 0.0, Y0, h0=1e-4, rtol=1e-10, atol=1e-12, h_max=1e-2)
    crossed = False
    Hs_prev = H_and_grads(*Y0[:3])[3]
    xy_prev = Y0[:2].copy()
    contact = None
    for _ in range(20000):
        rk.step()
        x, yv, slope, s_here = rk.y
        H, Hx, Hy, Hs = H_and_grads(x, yv, slope)
        if not crossed and Hs_prev * Hs < 0.0:
            crossed = True
            lam = abs(Hs_prev) / (abs(Hs_prev) + abs(Hs))
            contact = (1.0 - lam) * xy_prev + lam * np.array([x, yv])
        Hs_prev = Hs
        xy_prev = np.array([x, yv])
        if crossed:
            _, coeffs = _bde_state(field, x, yv)
            if _norm_disc(coeffs) > 4.0 * cfg.fold_trigger:
                if use_p:
                    w_new = np.array([1.0, slope])
                else:
                    w_new = np.array([slope, 1.0])
                fo = fundamental_forms(patch, (x, yv))
                w_new = w_new / fo.length(w_new)
                # keep the downstream orientation of the lift
                vec = rhs(0.0, rk.y)
                if (w_new[0] * vec[0] + w_new[1] * vec[1]) < 0:
                    w_new = -w_new
                return np.array([x, yv]), w_new, float(s_here), contact
    raise StepFailed("projective lift failed to traverse the fold")
