"""Embedded Dormand-Prince 5(4) stepper with PI step-size control.

Direction fields of curvature-line equations are smooth away from the
singular sets, so a classical explicit pair with proportional-integral
error control is the right tool.  The stepper is deliberately low-level:
trace loops own the event logic and call :meth:`AdaptiveRK.step` directly.
Dense output is cubic Hermite on the accepted step, which is enough to
bracket events; precise event times are then refined by re-integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Dormand-Prince RK5(4)7M tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class StepOutcome:
    accepted: bool
    t_new: float
    y_new: np.ndarray
    f_new: np.ndarray          # FSAL derivative at the new point
    h_used: float
    h_next: float
    err_norm: float


class StepFailed(Exception):
    """Step-size control underflow: the field is too rough to integrate."""


class AdaptiveRK:
    """Stateful adaptive stepper; one instance per trace."""

    def __init__(self, f, t0, y0, h0=1e-3, rtol=1e-10, atol=1e-12,
                 h_min=1e-14, h_max=1.0, safety=0.9):
        self.f = f
        self.t = float(t0)
        self.y = np.asarray(y0, dtype=float)
        self.fy = np.asarray(f(self.t, self.y), dtype=float)
        self.h = float(h0)
        self.rtol, self.atol = rtol, atol
        self.h_min, self.h_max = h_min, h_max
        self.safety = safety
        self._err_prev = 1.0

    def _error_norm(self, y, y_new, diff):
        scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
        return float(np.sqrt(np.mean((diff / scale) ** 2)))

    def attempt(self, h):
        """One trial step of size h from the current state (no commit)."""
        k = [self.fy]
        for i in range(1, 7):
            yi = self.y + h * (_A[i] @ np.array(k[:i]))
            k.append(np.asarray(self.f(self.t + _C[i] * h, yi), dtype=float))
        karr = np.array(k)
        y5 = self.y + h * (_B5 @ karr)
        y4 = self.y + h * (_B4 @ karr)
        err = self._error_norm(self.y, y5, y5 - y4)
        return y5, k[6], err

    def step(self):
        """Advance by one accepted step, shrinking h as needed."""
        while True:
            h = self.h
            if abs(h) < self.h_min:
                raise StepFailed(f"step size underflow at t={self.t}")
            y5, f_new, err = self.attempt(h)
            if not np.all(np.isfinite(y5)):
                self.h = 0.5 * h
                continue
            if err <= 1.0:
                # PI controller (orders 5/4): beta = 0.4/5, alpha = 0.7/5
                fac = self.safety * (err + 1e-300) ** (-0.7 / 5) \
                    * (self._err_prev + 1e-300) ** (0.4 / 5)
                fac = min(5.0, max(0.2, fac))
                h_next = min(self.h_max, abs(h) * fac) * math.copysign(1.0, h)
                out = StepOutcome(True, self.t + h, y5, f_new, h, h_next, err)
                self.t, self.y, self.fy = out.t_new, out.y_new, out.f_new
                self._err_prev = max(err, 1e-10)
                self.h = h_next
                return out
            fac = max(0.1, self.safety * err ** (-1.0 / 5))
            self.h = h * fac

    def set_h(self, h):
        self.h = math.copysign(min(abs(h), self.h_max), self.h)


def hermite(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite interpolant on one step."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h * h10 * f0 + h01 * y1 + h * h11 * f1


def bisect_event(g, lo, hi, tol=1e-12, max_iter=200):
    """Root of a scalar function with a sign change on [lo, hi]."""
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0:
        raise ValueError("bisect_event: no sign change in bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0 or (hi - lo) < tol:
            return mid
        if glo * gm < 0:
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
    return 0.5 * (lo + hi)
