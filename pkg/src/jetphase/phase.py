"""Phase-space kinematics.

A phase point is an event plus a timelike velocity triple, with coordinates
``(x^0, x^1, x^2, x^3; v^1, v^2, v^3)`` where ``v^i = dx^i/dx^0``.  All
seven-component objects use the fixed basis ordering

    (d_0, d_1, d_2, d_3, dv_1, dv_2, dv_3)

i.e. the four spacetime directions followed by the three velocity directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotTimelike
from .fields import SpacetimeModel

TIMELIKE_MARGIN = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """Event ``x`` (4,) and velocity triple ``v`` (3,), validated timelike."""

    x: np.ndarray
    v: np.ndarray

    def seven(self) -> np.ndarray:
        return np.concatenate([self.x, self.v])

    @staticmethod
    def from_seven(z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        return PhasePoint(z[:4].copy(), z[4:].copy())


def delta_bar_up(v) -> np.ndarray:
    """Horizontal direction components ``(1, v^1, v^2, v^3)``."""
    return np.concatenate([[1.0], np.asarray(v, dtype=float)])


def delta_bar_dn(v) -> np.ndarray:
    """Contact projection coefficients, shape (3, 4): row i is ``d^i - v^i d^0``."""
    v = np.asarray(v, dtype=float)
    out = np.zeros((3, 4))
    out[:, 1:] = np.eye(3)
    out[:, 0] = -v
    return out


def g_hat00(model: SpacetimeModel, x, v) -> float:
    """``g_00 + 2 g_0j v^j + g_ij v^i v^j``; negative iff the direction is timelike."""
    du = delta_bar_up(v)
    return float(du @ model.g(x) @ du)


def validate_timelike(model: SpacetimeModel, x, v, margin: float = TIMELIKE_MARGIN) -> float:
    gh = g_hat00(model, x, v)
    if gh >= -margin:
        raise NotTimelike(f"g_hat00 = {gh:.6e} >= -{margin:g} at x = {np.asarray(x)}")
    return gh


def phase_point(model: SpacetimeModel, x, v) -> PhasePoint:
    """Construct a validated phase point; raises NotTimelike or ChartDomain."""
    x = np.asarray(x, dtype=float).copy()
    v = np.asarray(v, dtype=float).copy()
    validate_timelike(model, x, v)
    return PhasePoint(x, v)


def alpha0(model: SpacetimeModel, p: PhasePoint) -> float:
    """Normalization factor ``|g_hat00|^{-1/2}``."""
    gh = validate_timelike(model, p.x, p.v)
    return (-gh) ** -0.5


def tau(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Time form components ``tau_lam = -(1/c) alpha0 (g_{0 lam} + g_{i lam} v^i)``."""
    a0 = alpha0(model, p)
    c = model.constants.c
    return -(a0 / c) * (model.g(p.x) @ delta_bar_up(p.v))


def tau_hat(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Mass-rescaled time form ``(m c^2 / hbar) tau`` as a 7-covector.

    The velocity components are identically zero.
    """
    k = model.constants
    return np.concatenate([(k.m * k.c**2 / k.hbar) * tau(model, p), np.zeros(3)])


def normalized_d(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Unit future-directed vector ``c alpha0 (1, v)``; satisfies g(d,d) = -c^2."""
    a0 = alpha0(model, p)
    return model.constants.c * a0 * delta_bar_up(p.v)


def theta_projector(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Projection ``id - tau (x) d`` onto the rest space, shape (4, 4)."""
    d = normalized_d(model, p)
    t = tau(model, p)
    return np.eye(4) - np.outer(d, t)


@dataclass(frozen=True)
class AdaptedFrame:
    """Frame (D0, N_i) adapted to the horizontal/rest splitting, with coframe."""

    D0: np.ndarray       # (4,)  horizontal direction
    N: np.ndarray        # (3,4) rows N_i, rest-space basis
    N0: np.ndarray       # (4,)  covector dual to D0
    omega: np.ndarray    # (3,4) rows omega^i = d^i - v^i d^0, dual to N_i
    alpha0: float


def adapted_frame(model: SpacetimeModel, p: PhasePoint) -> AdaptedFrame:
    """Build the adapted frame; the full 4x4 frame/coframe pairing is identity."""
    a0 = alpha0(model, p)
    c = model.constants.c
    t = tau(model, p)
    D0 = delta_bar_up(p.v)
    om = delta_bar_dn(p.v)
    # N_i = d_i - c alpha0 tau_i D0
    N = np.zeros((3, 4))
    N[:, 1:] = np.eye(3)
    N -= c * a0 * np.outer(t[1:], D0)
    N0 = np.zeros(4)
    N0[0] = 1.0
    N0 += c * a0 * (t[1:] @ om)
    return AdaptedFrame(D0=D0, N=N, N0=N0, omega=om, alpha0=a0)


def perp_metrics(model: SpacetimeModel, p: PhasePoint):
    """Rest-space metric pair ``(gperp_{ij}, gperpbar^{ij})``, both (3, 3).

    ``gperp_{ij} = g_{ij} + c^2 tau_i tau_j`` and
    ``gperpbar^{ij} = dbar^i_lam dbar^j_mu g^{lam mu}``; they are mutually
    inverse, and ``gperpbar`` equals the rest-space block of the projected
    contravariant metric ``theta g^{-1} theta^T`` in the adapted frame.
    """
    t = tau(model, p)
    c = model.constants.c
    gx = model.g(p.x)
    gperp = gx[1:, 1:] + c**2 * np.outer(t[1:], t[1:])
    dd = delta_bar_dn(p.v)
    gperpbar = dd @ model.ginv(p.x) @ dd.T
    return gperp, gperpbar


def gperp_scaled(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Mass-rescaled rest metric ``(m/hbar) gperp_{ij}``."""
    k = model.constants
    gperp, _ = perp_metrics(model, p)
    return (k.m / k.hbar) * gperp
