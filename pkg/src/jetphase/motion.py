"""Integration of the unparametrized equation of motion.

The chart time ``x^0`` is the integration parameter; the state is the
six-vector ``(x^1, x^2, x^3, v^1, v^2, v^3)``.  Termination events (loss of
the timelike condition, chart boundary crossing, step-size underflow) are
located by bisection and recorded on the trajectory instead of raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import ChartDomain, NotTimelike, SingularMetric
from .fields import SpacetimeModel, christoffel
from .phase import (PhasePoint, alpha0, delta_bar_dn, delta_bar_up, g_hat00,
                    validate_timelike)

EVENT_MARGIN = 1e-9      # timelike event fires when g_hat00 >= -margin
EVENT_X0_TOL = 1e-10     # bisection tolerance on x^0


def eom_rhs(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Acceleration triple ``d v^i / d x^0`` of the unparametrized motion.

    ``-dbar^i_t K_r{}^t_s dbar^r_0 dbar^s_0`` (geodesic part, horizontal-lift
    sign) plus the Lorentz term
    ``-(1/(c alpha0)) (hbar/m) gperpbar^{ik} dbar^r_0 fhat_{r k}``.
    Agrees with the jet component of the flow field from the total phase
    connection, and with reprojected 4-velocity dynamics.
    """
    validate_timelike(model, p.x, p.v)
    k = model.constants
    dd = delta_bar_dn(p.v)
    du = delta_bar_up(p.v)
    K = christoffel(model, p.x)
    acc = -np.einsum("is,lsr,l,r->i", dd, K, du, du)
    if model.em is not None:
        a0 = alpha0(model, p)
        gperpbar = dd @ model.ginv(p.x) @ dd.T
        phi = du @ model.fhat(p.x)          # dbar^rho_0 fhat_{rho k}
        acc -= (1.0 / (k.c * a0)) * (k.hbar / k.m) * (gperpbar @ phi[1:])
    return acc


@dataclass(frozen=True)
class IntegratorOptions:
    """Stepper selection and control parameters.

    ``method`` is ``rk4-fixed`` or ``rkf45-adaptive``.  Fixed-step uses
    ``step``; the adaptive controller uses ``atol``/``rtol`` with safety 0.9
    and growth capped at 5.
    """

    method: str = "rk4-fixed"
    step: float = 1e-3
    atol: float = 1e-10
    rtol: float = 1e-10
    max_steps: int = 2_000_000
    event_margin: float = EVENT_MARGIN
    min_step: float = 1e-13

    def __post_init__(self):
        if self.method not in ("rk4-fixed", "rkf45-adaptive"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.step <= 0 or self.atol <= 0 or self.rtol <= 0 or self.max_steps <= 0:
            raise ValueError("steps and tolerances must be positive")


@dataclass
class Trajectory:
    """Ordered samples of a motion, with bookkeeping metadata."""

    x0: np.ndarray         # (n,) strictly increasing chart times
    x: np.ndarray          # (n,3) spatial coordinates
    v: np.ndarray          # (n,3) velocities
    termination: str       # range_end | timelike_lost | chart_exit | step_failure | max_steps
    method: str
    detail: str = ""

    def __len__(self) -> int:
        return len(self.x0)

    def point(self, k: int) -> PhasePoint:
        return PhasePoint(np.concatenate([[self.x0[k]], self.x[k]]), self.v[k].copy())

    def samples(self) -> np.ndarray:
        """All samples as one (n, 7) array."""
        return np.concatenate([self.x0[:, None], self.x, self.v], axis=1)


def _event_values(model: SpacetimeModel, t: float, y: np.ndarray, margin: float) -> List[float]:
    """Scalar functions that are positive while integration may continue."""
    x4 = np.concatenate([[t], y[:3]])
    vals = [-g_hat00(model, x4, y[3:]) - margin]
    for fn in model.chart.boundary_fns:
        vals.append(float(fn(x4)))
    return vals


def _event_names(model: SpacetimeModel) -> List[str]:
    return ["timelike_lost"] + ["chart_exit"] * len(model.chart.boundary_fns)


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


# Fehlberg 4(5) tableau
_RKF_A = [0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2]
_RKF_B = [
    [],
    [1 / 4],
    [3 / 32, 9 / 32],
    [1932 / 2197, -7200 / 2197, 7296 / 2197],
    [439 / 216, -8.0, 3680 / 513, -845 / 4104],
    [-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40],
]
_RKF_C4 = [25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0]
_RKF_C5 = [16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55]


def _rkf45_step(f, t, y, h):
    ks = [f(t, y)]
    for i in range(1, 6):
        yi = y + h * sum(b * k for b, k in zip(_RKF_B[i], ks))
        ks.append(f(t + _RKF_A[i] * h, yi))
    y4 = y + h * sum(c * k for c, k in zip(_RKF_C4, ks))
    y5 = y + h * sum(c * k for c, k in zip(_RKF_C5, ks))
    return y5, y4


def integrate(model: SpacetimeModel, p0: PhasePoint, x0_range, opts: Optional[IntegratorOptions] = None) -> Trajectory:
    """Integrate the motion through ``p0`` over ``x0_range = (t0, t1)``."""
    opts = opts or IntegratorOptions()
    t0, t1 = float(x0_range[0]), float(x0_range[1])
    if not t1 > t0:
        raise ValueError("x0 range must be nonempty and increasing")
    if abs(p0.x[0] - t0) > 1e-14:
        raise ValueError("p0 must sit at the start of the x0 range")
    validate_timelike(model, p0.x, p0.v)
    model.require_in_chart(p0.x)

    def f(t, y):
        x4 = np.concatenate([[t], y[:3]])
        p = PhasePoint(x4, y[3:])
        return np.concatenate([y[3:], eom_rhs(model, p)])

    names = _event_names(model)
    ts = [t0]
    ys = [np.concatenate([p0.x[1:], p0.v])]
    termination, detail = "range_end", ""

    def probe(ta, ya, tb):
        """Step from (ta, ya) to tb; None when the state is invalid past an event."""
        try:
            yb = _rk4_step(f, ta, ya, tb - ta)
            vals = _event_values(model, tb, yb, opts.event_margin)
        except (NotTimelike, ChartDomain, SingularMetric, FloatingPointError):
            return None
        if not np.all(np.isfinite(yb)):
            return None
        return yb, vals

    def resolve_event(ta, ya, tb, first_exc=None):
        """Bisect in x0 for the first event crossing in (ta, tb]; record it."""
        nonlocal termination, detail
        hit = None
        for _ in range(200):
            if tb - ta <= EVENT_X0_TOL:
                break
            tm = 0.5 * (ta + tb)
            res = probe(ta, ya, tm)
            if res is None or min(res[1]) <= 0:
                tb = tm
                if res is not None:
                    hit = int(np.argmin(res[1]))
            else:
                ta, ya = tm, res[0]
        if ta > ts[-1] + EVENT_X0_TOL:
            ts.append(ta)
            ys.append(ya)
        if hit is None:
            if isinstance(first_exc, ChartDomain):
                hit = 1 if model.chart.boundary_fns else 0
            else:
                hit = 0
        termination = names[hit] if hit < len(names) else "chart_exit"
        detail = f"event at x0 = {ta!r}"

    def advance(t, y, hs):
        """One accepted step with event handling; returns new state or None when done."""
        try:
            ynew = _stepper(t, y, hs)
        except (NotTimelike, ChartDomain, SingularMetric, FloatingPointError) as exc:
            resolve_event(t, y, t + hs, exc)
            return None
        return ynew

    if opts.method == "rk4-fixed":
        _stepper = lambda t, y, hs: _rk4_step(f, t, y, hs)
        t, y = t0, ys[0]
        steps = 0
        while t < t1 - 1e-14:
            if steps >= opts.max_steps:
                termination = "max_steps"
                break
            hs = min(opts.step, t1 - t)
            ynew = advance(t, y, hs)
            if ynew is None:
                break
            tnew = t + hs
            try:
                vals = _event_values(model, tnew, ynew, opts.event_margin)
            except (NotTimelike, ChartDomain, SingularMetric):
                vals = [-1.0]
            if min(vals) <= 0:
                resolve_event(t, y, tnew)
                break
            ts.append(tnew)
            ys.append(ynew)
            t, y = tnew, ynew
            steps += 1
    else:
        h = min(1e-2, t1 - t0)
        t, y = t0, ys[0]
        steps = 0
        while t < t1 - 1e-14:
            if steps >= opts.max_steps:
                termination = "max_steps"
                break
            hs = min(h, t1 - t)
            try:
                y5, y4 = _rkf45_step(f, t, y, hs)
            except (NotTimelike, ChartDomain, SingularMetric, FloatingPointError) as exc:
                if hs > 4 * opts.min_step:
                    h = hs / 4.0           # retry shorter before declaring a crossing
                    steps += 1
                    continue
                resolve_event(t, y, t + hs, exc)
                break
            scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y5))
            err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
            if err <= 1.0:
                tnew = t + hs
                try:
                    vals = _event_values(model, tnew, y5, opts.event_margin)
                except (NotTimelike, ChartDomain, SingularMetric):
                    vals = [-1.0]
                if min(vals) <= 0:
                    resolve_event(t, y, tnew)
                    break
                ts.append(tnew)
                ys.append(y5)
                t, y = tnew, y5
            fac = 0.9 * (1.0 / err) ** 0.2 if err > 0 else 5.0
            h = hs * min(5.0, max(0.2, fac))
            if h < opts.min_step:
                termination, detail = "step_failure", f"step underflow at x0 = {t!r}"
                break
            steps += 1

    ys_arr = np.asarray(ys)
    return Trajectory(
        x0=np.asarray(ts),
        x=ys_arr[:, :3],
        v=ys_arr[:, 3:],
        termination=termination,
        method=opts.method,
        detail=detail,
    )
