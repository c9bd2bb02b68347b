"""Dynamical structures on the seven-dimensional phase space.

The pair (time form, phase 2-form) and its dual (flow field, phase 2-vector)
are represented as plain arrays in the coordinate basis

    (d_0, d_1, d_2, d_3, dv_1, dv_2, dv_3).

Matrix conventions, fixed once for the whole package:

* a 2-form is the antisymmetric matrix ``Om[A, B] = Om(e_A, e_B)``;
* the exterior derivative of a 1-form is ``(dth)[A, B] = d_A th_B - d_B th_A``;
* a 2-vector is the antisymmetric matrix ``L[A, B]`` acting on covectors in
  the first slot, ``L_sharp(beta)^A = beta_B L[B, A]``;
* Christoffel symbols enter phase-space formulas through the *horizontal
  lift* convention, which is opposite in sign to the symbols returned by
  :func:`jetphase.fields.christoffel` (geodesics read ``x'' = -K x'x'``).

With these choices the assembled 2-form equals the numerical exterior
derivative of the potential 1-form, and the contracted pair identities
(r1..r4 below) hold at machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MissingEMField, MissingPotential, ObserverNotAdapted
from .fields import SpacetimeModel, christoffel
from .phase import (PhasePoint, alpha0, delta_bar_dn, delta_bar_up,
                    gperp_scaled, perp_metrics, tau, tau_hat, validate_timelike)

VEL = np.s_[4:]
SPC = np.s_[:4]


def grav_connection_raw(model: SpacetimeModel, x, v) -> np.ndarray:
    """Gravitational connection coefficients without the timelike check.

    Polynomial (degree two) in the velocities, hence well-defined for any
    velocity triple; used by finite-difference probes in velocity directions.
    """
    dd = delta_bar_dn(v)
    du = delta_bar_up(v)
    K = christoffel(model, x)
    return -np.einsum("is,lsr,r->il", dd, K, du)


def phase_connection(model: SpacetimeModel, p: PhasePoint, part: str = "total") -> np.ndarray:
    """Connection coefficients ``Gamma[i, lam]`` of the phase bundle.

    ``part`` selects the gravitational piece (from the Christoffel symbols),
    the electromagnetic piece (Lorentz coupling), or their sum.
    """
    if part not in ("grav", "em", "total"):
        raise ValueError(f"unknown part {part!r}")
    validate_timelike(model, p.x, p.v)
    dd = delta_bar_dn(p.v)
    du = delta_bar_up(p.v)
    out = np.zeros((3, 4))
    if part in ("grav", "total"):
        out += grav_connection_raw(model, p.x, p.v)
    if part in ("em", "total"):
        if model.em is None:
            if part == "em":
                raise MissingEMField("model has no electromagnetic field")
        else:
            k = model.constants
            a0 = alpha0(model, p)
            Fh = model.fhat(p.x)
            Gbar = (k.hbar / k.m) * (dd @ model.ginv(p.x))       # Gbar_0^{i mu}
            gbr = du @ model.g(p.x)                               # gbreve_{0 lam}
            # term[mu, lam] = Fhat_{lam mu} - alpha0^2 gbreve_{0 lam} (dbar^rho_0 Fhat_{rho mu})
            term = Fh.T - a0**2 * np.outer(du @ Fh, gbr)
            out += -(1.0 / (2 * k.c * a0)) * np.einsum("im,ml->il", Gbar, term)
    return out


def omega(model: SpacetimeModel, p: PhasePoint, grav_only: bool = False) -> np.ndarray:
    """Phase 2-form as an antisymmetric 7x7 matrix.

    Assembled from ``c alpha0 Gperp_{ij} a^i /\\ omega^j`` with
    ``a^i = dv^i - Gamma^grav_lam{}^i d^lam``; the electromagnetic field adds
    the charge-rescaled block ``fhat`` on the spacetime indices (so that the
    total equals d(-tau_hat + a_hat) exactly).
    """
    k = model.constants
    a0 = alpha0(model, p)
    Gp = gperp_scaled(model, p)
    Gg = phase_connection(model, p, "grav")
    a = np.zeros((3, 7))
    a[:, VEL] = np.eye(3)
    a[:, SPC] = -Gg
    b = np.zeros((3, 7))
    b[:, SPC] = delta_bar_dn(p.v)
    om = k.c * a0 * np.einsum("ij,iA,jB->AB", Gp, a, b)
    om = om - om.T
    if not grav_only and model.em is not None:
        om[SPC, SPC] += model.fhat(p.x)
    return om


def two_vector(model: SpacetimeModel, p: PhasePoint, part: str = "total") -> np.ndarray:
    """Phase 2-vector as an antisymmetric 7x7 matrix.

    The total is the connection-form display evaluated on the *total* phase
    connection; it coincides with the gravitational 2-vector (built from the
    gravitational connection alone) plus the electromagnetic block ``em``
    returned by ``part="em"``.
    """
    if part not in ("grav", "em", "total"):
        raise ValueError(f"unknown part {part!r}")
    validate_timelike(model, p.x, p.v)
    k = model.constants
    a0 = alpha0(model, p)
    dd = delta_bar_dn(p.v)
    Gbar = (k.hbar / k.m) * (dd @ model.ginv(p.x))               # Gbar_0^{j lam}
    if part == "em":
        out = np.zeros((7, 7))
        if model.em is not None:
            Fh = model.fhat(p.x)
            out[VEL, VEL] = (1.0 / (k.c * a0)) ** 2 * (Gbar @ Fh @ Gbar.T)
        return out
    G = phase_connection(model, p, part)
    U = np.zeros((4, 7))
    U[:, SPC] = np.eye(4)
    U[:, VEL] = G.T                                              # U_lam = d_lam + Gamma_lam^i dv_i
    V = np.zeros((3, 7))
    V[:, VEL] = np.eye(3)
    lam = (1.0 / (k.c * a0)) * np.einsum("jl,lA,jB->AB", Gbar, U, V)
    return lam - lam.T


def reeb(model: SpacetimeModel, p: PhasePoint):
    """Dynamical flow vector ``gamma`` and its rescaling ``gamma_hat``.

    ``gamma = c alpha0 (1, v, gamma0^i)`` with jet component
    ``gamma0^i = Gamma_lam{}^i dbar^lam_0`` (total connection);
    ``gamma_hat = (hbar / m c^2) gamma`` is the Reeb field of the pair.
    Both are returned as 7-vectors.
    """
    k = model.constants
    a0 = alpha0(model, p)
    G = phase_connection(model, p, "total")
    du = delta_bar_up(p.v)
    gamma = k.c * a0 * np.concatenate([du, G @ du])
    return gamma, (k.hbar / (k.m * k.c**2)) * gamma


@dataclass(frozen=True)
class PhaseStructure:
    """The dual structure pair and flow data at one phase point."""

    tau_hat: np.ndarray     # 7-covector, velocity components zero
    omega: np.ndarray       # 7x7 antisymmetric
    lam: np.ndarray         # 7x7 antisymmetric
    gamma: np.ndarray       # 7-vector, unscaled flow
    reeb: np.ndarray        # 7-vector E = -gamma_hat


def phase_structure(model: SpacetimeModel, p: PhasePoint) -> PhaseStructure:
    gamma, gamma_hat = reeb(model, p)
    return PhaseStructure(
        tau_hat=tau_hat(model, p),
        omega=omega(model, p),
        lam=two_vector(model, p),
        gamma=gamma,
        reeb=-gamma_hat,
    )


@dataclass(frozen=True)
class DualityResiduals:
    r1: float   # |w(E) - 1|
    r2: float   # max |Om . E|
    r3: float   # max |L . w|
    r4: float   # max |L Om - (I - E w)|

    def max(self) -> float:
        return max(self.r1, self.r2, self.r3, self.r4)


def duality_residuals(model: SpacetimeModel, p: PhasePoint) -> DualityResiduals:
    """Contracted-pair identities with ``E = -gamma_hat`` and ``w = -tau_hat``."""
    s = phase_structure(model, p)
    E = s.reeb
    w = -s.tau_hat
    r1 = abs(float(w @ E) - 1.0)
    r2 = float(np.max(np.abs(s.omega @ E)))
    r3 = float(np.max(np.abs(s.lam @ w)))
    r4 = float(np.max(np.abs(s.lam @ s.omega - (np.eye(7) - np.outer(E, w)))))
    return DualityResiduals(r1, r2, r3, r4)


# -- Lagrangian, potential, Hamiltonian ------------------------------------


def lagrangian(model: SpacetimeModel, p: PhasePoint) -> float:
    """Scalar Lagrangian ``-(m c)/(hbar alpha0) + a_hat(1, v)``."""
    k = model.constants
    a0 = alpha0(model, p)
    L0 = -(k.m * k.c) / (k.hbar * a0)
    if model.em is not None and model.constants.q != 0.0:
        if not model.has_potential:
            raise MissingPotential("Lagrangian needs the electromagnetic potential")
        L0 += float(model.ahat(p.x) @ delta_bar_up(p.v))
    return L0


def lagrangian_hessian(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Velocity Hessian of the Lagrangian, ``(m c / hbar) alpha0 gperp_{ij}``.

    Positive definite: the Lorentzian norm is concave in the velocities, so
    its negative (the kinetic part of the Lagrangian) is convex.  Matches the
    finite-difference Hessian and the acceleration coefficient of the
    Euler-Lagrange density.
    """
    k = model.constants
    gperp, _ = perp_metrics(model, p)
    return (k.m * k.c / k.hbar) * alpha0(model, p) * gperp


def potential_theta(model: SpacetimeModel, p: PhasePoint) -> np.ndarray:
    """Potential 1-form ``-tau_hat + a_hat`` as a 7-covector."""
    th = -tau_hat(model, p)
    if model.em is not None and model.constants.q != 0.0:
        if not model.has_potential:
            raise MissingPotential("potential 1-form needs the electromagnetic potential")
        th[SPC] += model.ahat(p.x)
    return th


@dataclass(frozen=True)
class Observer:
    """Velocity section ``x -> o^i(x)`` assigning a phase point to each event."""

    o: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.o(np.asarray(x, dtype=float)), dtype=float)


ZERO_OBSERVER = Observer(lambda x: np.zeros(3))


def hamiltonian(model: SpacetimeModel, obs: Observer, p: PhasePoint) -> float:
    """Observed Hamiltonian ``-Theta(o-lift)``, chart-free.

    Contracts the potential 1-form at the phase point against the observer's
    horizontal direction ``(1, o(x))``.
    """
    th = potential_theta(model, p)
    lift = delta_bar_up(obs(p.x))
    return -float(th[SPC] @ lift)


def momentum_display(model: SpacetimeModel, p: PhasePoint, h: float = 1e-6) -> np.ndarray:
    """Velocity gradient of the Lagrangian by central differences, shape (3,)."""
    out = np.zeros(3)
    for i in range(3):
        vp = p.v.copy()
        vm = p.v.copy()
        vp[i] += h
        vm[i] -= h
        out[i] = (lagrangian(model, PhasePoint(p.x, vp))
                  - lagrangian(model, PhasePoint(p.x, vm))) / (2 * h)
    return out


def lagrangian_hessian_fd(model: SpacetimeModel, p: PhasePoint, h: float = 5e-3) -> np.ndarray:
    """Velocity Hessian of the Lagrangian by second differences.

    Central stencil with one Richardson refinement, steps scaled per velocity
    component by the spatial metric so angular directions are probed at the
    same physical size as radial ones.  Independent of the closed-form
    :func:`lagrangian_hessian`.
    """

    def L(v):
        return lagrangian(model, PhasePoint(p.x, np.asarray(v, dtype=float)))

    scale = h / np.sqrt(np.maximum(np.diag(model.g(p.x))[1:], 1.0))

    def stencil(steps):
        out = np.zeros((3, 3))
        L0 = L(p.v)
        for i in range(3):
            for j in range(i, 3):
                ei = np.zeros(3)
                ej = np.zeros(3)
                ei[i] = steps[i]
                ej[j] = steps[j]
                if i == j:
                    out[i, i] = (L(p.v + ei) - 2 * L0 + L(p.v - ei)) / steps[i] ** 2
                else:
                    val = (L(p.v + ei + ej) - L(p.v + ei - ej)
                           - L(p.v - ei + ej) + L(p.v - ei - ej)) / (4 * steps[i] * steps[j])
                    out[i, j] = out[j, i] = val
        return out

    return (4.0 * stencil(scale / 2) - stencil(scale)) / 3.0


def legendre_residual(model: SpacetimeModel, obs: Observer, p: PhasePoint) -> float:
    """``|H[o] - (dL/dv . v - L)|`` in a chart adapted to the observer.

    Requires the observer velocities to vanish in the current chart.
    """
    if np.max(np.abs(obs(p.x))) > 1e-12:
        raise ObserverNotAdapted("Legendre identity needs a chart adapted to the observer")
    H = hamiltonian(model, obs, p)
    dLdv = momentum_display(model, p)
    return abs(H - (float(dLdv @ p.v) - lagrangian(model, p)))


def el_density(model: SpacetimeModel, p: PhasePoint, xi00) -> np.ndarray:
    """Euler-Lagrange density ``eta_j`` for a candidate acceleration triple.

    Vanishes exactly when ``xi00`` equals the equation-of-motion right-hand
    side.  The field-strength term enters with the sign that makes this so.
    """
    k = model.constants
    xi00 = np.asarray(xi00, dtype=float)
    a0 = alpha0(model, p)
    gperp, _ = perp_metrics(model, p)
    Gg = phase_connection(model, p, "grav")
    gamma_g = Gg @ delta_bar_up(p.v)
    eta = k.c * a0 * (gperp @ (xi00 - gamma_g))
    if model.em is not None:
        # (q/m) F = (hbar/m) fhat, well-defined for a neutral particle too
        eta += (k.hbar / k.m) * (delta_bar_up(p.v) @ model.fhat(p.x))[1:]
    return (k.m / k.hbar) * eta
