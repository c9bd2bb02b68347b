"""Lie derivatives, Killing checks, lifts, special phase functions and brackets.

A *special phase function* is the pair of a spacetime vector field ``X`` and
a spacetime scalar ``f_breve``; its value at a phase point is
``tau_hat(X) + f_breve``.  These are the observables that generate projectable
symmetries of the phase structure, and the module provides both the
closed-form expressions and independent finite-difference / flow-transport
oracles for every identity they satisfy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import grav_connection_raw, omega, phase_connection, reeb, two_vector
from .errors import MissingDerivatives
from .fields import SpacetimeModel, _fd_jacobian, christoffel, dchristoffel
from .phase import (PhasePoint, alpha0, delta_bar_dn, delta_bar_up, tau_hat,
                    validate_timelike)


# -- field wrappers ---------------------------------------------------------


class ScalarField:
    """Spacetime scalar with optional analytic gradient and Hessian."""

    def __init__(self, value, grad=None, hess=None):
        self._value = value
        self._grad = grad
        self._hess = hess

    def __call__(self, x) -> float:
        return float(self._value(np.asarray(x, dtype=float)))

    def grad(self, x) -> np.ndarray:
        if self._grad is not None:
            return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(lambda y: self._value(y), x).reshape(4)

    def hess(self, x) -> np.ndarray:
        if self._hess is not None:
            return np.asarray(self._hess(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(self.grad, x)

    @staticmethod
    def zero() -> "ScalarField":
        return ScalarField(lambda x: 0.0, lambda x: np.zeros(4), lambda x: np.zeros((4, 4)))

    @staticmethod
    def constant(c: float) -> "ScalarField":
        return ScalarField(lambda x: c, lambda x: np.zeros(4), lambda x: np.zeros((4, 4)))

    @staticmethod
    def affine(const: float, linear) -> "ScalarField":
        lin = np.asarray(linear, dtype=float)
        return ScalarField(lambda x: const + float(lin @ x),
                           lambda x: lin.copy(),
                           lambda x: np.zeros((4, 4)))


class VectorField:
    """Spacetime vector field with optional analytic first/second derivatives.

    ``jac(x)[mu, lam] = d_mu X^lam`` and ``hess(x)[mu, nu, lam] = d^2_{mu nu} X^lam``.
    """

    def __init__(self, value, jac=None, hess=None, name: str = ""):
        self._value = value
        self._jac = jac
        self._hess = hess
        self.name = name

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self._value(np.asarray(x, dtype=float)), dtype=float)

    def jac(self, x) -> np.ndarray:
        if self._jac is not None:
            return np.asarray(self._jac(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(self._value, x)

    def hess(self, x) -> np.ndarray:
        if self._hess is not None:
            return np.asarray(self._hess(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(self.jac, x)

    @property
    def has_hess(self) -> bool:
        return self._hess is not None

    @staticmethod
    def affine(const, linear=None, name: str = "") -> "VectorField":
        """Degree-one polynomial field ``X^lam(x) = const^lam + linear[lam, mu] x^mu``."""
        a = np.asarray(const, dtype=float)
        B = np.zeros((4, 4)) if linear is None else np.asarray(linear, dtype=float)
        return VectorField(lambda x: a + B @ x,
                           lambda x: B.T.copy(),      # jac[mu, lam] = d_mu X^lam = B[lam, mu]
                           lambda x: np.zeros((4, 4, 4)),
                           name=name)


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """Lie bracket ``[X, Y]`` with analytic first derivatives via the chain rule."""

    def value(x):
        return X(x) @ Y.jac(x) - Y(x) @ X.jac(x)

    def jac(x):
        dX, dY = X.jac(x), Y.jac(x)
        d2X, d2Y = X.hess(x), Y.hess(x)
        return (np.einsum("nm,ml->nl", dX, dY) + np.einsum("m,nml->nl", X(x), d2Y)
                - np.einsum("nm,ml->nl", dY, dX) - np.einsum("m,nml->nl", Y(x), d2X))

    name = f"[{X.name},{Y.name}]" if X.name and Y.name else ""
    return VectorField(value, jac, name=name)


@dataclass(frozen=True)
class SpecialPhaseFunction:
    """Pair (X, f_breve) representing the phase function ``tau_hat(X) + f_breve``."""

    X: VectorField
    f_breve: ScalarField
    name: str = ""


# -- Lie derivatives of spacetime objects -----------------------------------


def lie_metric(model: SpacetimeModel, X: VectorField, x) -> np.ndarray:
    """``(L_X g)_{lam mu} = X^r d_r g_{lam mu} + g_{r mu} d_lam X^r + g_{lam r} d_mu X^r``."""
    x = np.asarray(x, dtype=float)
    model.require_in_chart(x)
    gx = model.metric.g(x)
    dgx = model.metric.dg(x)
    dX = X.jac(x)
    out = np.einsum("r,rlm->lm", X(x), dgx)
    out += np.einsum("rm,lr->lm", gx, dX)
    out += np.einsum("lr,mr->lm", gx, dX)
    return out


def lie_em(model: SpacetimeModel, X: VectorField, x) -> np.ndarray:
    """Lie derivative of the charge-rescaled field strength, ``(L_X fhat)_{lam mu}``."""
    x = np.asarray(x, dtype=float)
    Fh = model.fhat(x)
    dFh = model.dfhat(x)
    dX = X.jac(x)
    out = np.einsum("r,rlm->lm", X(x), dFh)
    out += np.einsum("rm,lr->lm", Fh, dX)
    out += np.einsum("lr,mr->lm", Fh, dX)
    return out


def lie_connection(model: SpacetimeModel, X: VectorField, x) -> np.ndarray:
    """Lie derivative of the Christoffel symbols, ``(L_X K)[mu, lam, nu]``.

    Standard tensorial formula (the inhomogeneous term is ``+ d^2_{mu nu} X^lam``);
    needs second derivatives of ``X``.
    """
    x = np.asarray(x, dtype=float)
    if X._jac is None or X._hess is None:
        # finite differences would silently degrade the 2nd-derivative term
        raise MissingDerivatives("lie_connection needs analytic first and second derivatives of X")
    K = christoffel(model, x)
    dK = dchristoffel(model, x)
    dX = X.jac(x)
    d2X = X.hess(x)
    out = np.einsum("r,rmln->mln", X(x), dK)
    out -= np.einsum("mrn,rl->mln", K, dX)
    out += np.einsum("rln,mr->mln", K, dX)
    out += np.einsum("mlr,nr->mln", K, dX)
    out += d2X.transpose(0, 2, 1)
    return out


def is_killing(model: SpacetimeModel, X: VectorField, probes: Sequence[np.ndarray], tol: float = 1e-8):
    """Max metric Lie-derivative residual over probe points, with verdict."""
    if len(probes) == 0:
        raise ValueError("probe set must be nonempty")
    res = max(float(np.max(np.abs(lie_metric(model, X, x)))) for x in probes)
    return res < tol, res


# -- lifts -------------------------------------------------------------------


def holonomic_lift(model: SpacetimeModel, X: VectorField, p: PhasePoint) -> np.ndarray:
    """First-jet prolongation of ``X`` at ``p`` as a 7-vector.

    Velocity components are ``dbar^i_lam dbar^mu_0 d_mu X^lam``.
    """
    validate_timelike(model, p.x, p.v)
    dX = X.jac(p.x)
    jet = np.einsum("il,m,ml->i", delta_bar_dn(p.v), delta_bar_up(p.v), dX)
    return np.concatenate([X(p.x), jet])


def special_eval(model: SpacetimeModel, spf: SpecialPhaseFunction, p: PhasePoint) -> float:
    """Value ``tau_hat(X) + f_breve`` at the phase point."""
    th = tau_hat(model, p)
    return float(th[:4] @ spf.X(p.x)) + spf.f_breve(p.x)


def special_gradient(model: SpacetimeModel, spf: SpecialPhaseFunction, p: PhasePoint) -> np.ndarray:
    """Analytic 7-gradient of the special phase function.

    Chain rule through ``alpha0`` and the velocity-contracted metric; cross
    checked against finite differences in the test-suite.
    """
    k = model.constants
    x, v = p.x, p.v
    a0 = alpha0(model, p)
    gx = model.g(x)
    dgx = model.dg(x)
    du = delta_bar_up(v)
    gbr = du @ gx                                  # gbreve_{0 rho}
    Xv = spf.X(x)
    dX = spf.X.jac(x)
    cm = k.c * k.m / k.hbar
    out = np.zeros(7)
    # spacetime derivatives
    dgh = np.einsum("r,s,lrs->l", du, du, dgx)     # d_lam g_hat00
    da0 = 0.5 * a0**3 * dgh
    dgbr = np.einsum("s,lsr->lr", du, dgx)         # d_lam gbreve_{0 rho}
    out[:4] = -cm * (da0 * float(gbr @ Xv) + a0 * (dgbr @ Xv) + a0 * (dX @ gbr))
    out[:4] += spf.f_breve.grad(x)
    # velocity derivatives: d a0/d v^k = a0^3 gbreve_{0 k}, d gbreve_{0 rho}/d v^k = g_{k rho}
    da0v = a0**3 * gbr[1:]
    out[4:] = -cm * (da0v * float(gbr @ Xv) + a0 * (gx[1:, :] @ Xv))
    return out


def special_hamiltonian_lift(model: SpacetimeModel, spf: SpecialPhaseFunction, p: PhasePoint) -> np.ndarray:
    """Hamiltonian-type lift of a special phase function, as a 7-vector.

    Spacetime part is ``X`` itself; the velocity part couples the scalar
    gradient, the metric drag of ``X`` and the field strength.  For a Killing
    ``X`` with ``d f_breve = X . fhat`` this equals the holonomic lift.
    """
    k = model.constants
    x, v = p.x, p.v
    validate_timelike(model, p.x, p.v)
    a0 = alpha0(model, p)
    gx = model.g(x)
    dgx = model.dg(x)
    du = delta_bar_up(v)
    dd = delta_bar_dn(v)
    Gbar = (k.hbar / k.m) * (dd @ model.ginv(x))            # Gbar_0^{i sigma}
    mh = k.m / k.hbar
    Xv = spf.X(x)
    dX = spf.X.jac(x)
    gbr = du @ gx
    # bracket_sigma = -(1/(c a0)) d_sigma f_breve + X^rho d_rho Gtick_{0 sigma}
    #                 + Gtick_{0 rho} d_sigma X^rho + (1/(c a0)) X^rho fhat_{rho sigma}
    term = -(1.0 / (k.c * a0)) * spf.f_breve.grad(x)
    term = term + mh * np.einsum("r,s,rst->t", Xv, du, dgx)
    term = term + mh * np.einsum("r,sr->s", gbr, dX)
    if model.em is not None:
        term = term + (1.0 / (k.c * a0)) * (Xv @ model.fhat(x))
    return np.concatenate([Xv, -(Gbar @ term)])


def special_bracket(model: SpacetimeModel, f: SpecialPhaseFunction, h: SpecialPhaseFunction) -> SpecialPhaseFunction:
    """Structural bracket of two special phase functions.

    Returns the pair ``([X, X'], X.h_breve - X'.f_breve + fhat(X, X'))``; the
    scalar part carries an analytic gradient so brackets can be nested.
    """
    Xc = commutator(f.X, h.X)

    def fb_value(x):
        val = float(f.X(x) @ h.f_breve.grad(x)) - float(h.X(x) @ f.f_breve.grad(x))
        val += float(f.X(x) @ model.fhat(x) @ h.X(x))
        return val

    def fb_grad(x):
        Xf, Xh = f.X(x), h.X(x)
        dXf, dXh = f.X.jac(x), h.X.jac(x)
        out = dXf @ h.f_breve.grad(x) + h.f_breve.hess(x) @ Xf
        out -= dXh @ f.f_breve.grad(x) + f.f_breve.hess(x) @ Xh
        Fh = model.fhat(x)
        out += np.einsum("rlm,l,m->r", model.dfhat(x), Xf, Xh)
        out += dXf @ (Fh @ Xh) - dXh @ (Fh @ Xf)
        return out

    name = f"[[{f.name},{h.name}]]" if f.name and h.name else ""
    return SpecialPhaseFunction(Xc, ScalarField(fb_value, fb_grad), name=name)


def bracket_value_jacobi(model: SpacetimeModel, f: SpecialPhaseFunction, h: SpecialPhaseFunction, p: PhasePoint) -> float:
    """Pointwise bracket value through the 2-vector and the flow field.

    ``Lambda(df, dh) + tau_hat(X) gamma_hat.h - tau_hat(X') gamma_hat.f``;
    independent of the structural route.
    """
    lam = two_vector(model, p)
    df = special_gradient(model, f, p)
    dh = special_gradient(model, h, p)
    _, gh = reeb(model, p)
    th = tau_hat(model, p)
    tf = float(th[:4] @ f.X(p.x))
    thv = float(th[:4] @ h.X(p.x))
    return float(df @ lam @ dh) + tf * float(gh @ dh) - thv * float(gh @ df)


def conservation_residual(model: SpacetimeModel, spf: SpecialPhaseFunction, p: PhasePoint):
    """Flow derivative ``gamma.f`` and the closed-form conservation criterion.

    Returns ``(gamma_dot_f, criterion)`` where the criterion is
    ``d.f_breve - (X . fhat)(d) - 1/2 (L_X G)(d, d)``; the two agree
    identically and both vanish exactly for conserved special functions.
    """
    k = model.constants
    gamma, _ = reeb(model, p)
    df = special_gradient(model, spf, p)
    gamma_dot_f = float(gamma @ df)
    a0 = alpha0(model, p)
    du = delta_bar_up(p.v)
    lg = lie_metric(model, spf.X, p.x)
    # (X . fhat)_lam = X^s fhat_{s lam} = -(fhat @ X)_lam
    crit = k.c * a0 * float(du @ (spf.f_breve.grad(p.x) + model.fhat(p.x) @ spf.X(p.x)))
    crit -= 0.5 * (k.m / k.hbar) * (k.c * a0) ** 2 * float(du @ lg @ du)
    return gamma_dot_f, crit


def self_holonomy_residual(model: SpacetimeModel, spf: SpecialPhaseFunction, p: PhasePoint) -> float:
    """Max-norm of ``i_{X_(1)} Omega - df`` at the phase point."""
    om = omega(model, p)
    lift = holonomic_lift(model, spf.X, p)
    df = special_gradient(model, spf, p)
    return float(np.max(np.abs(lift @ om - df)))


# -- finite-difference and flow-transport oracles ----------------------------


def seven_gradient_fd(fn: Callable[[PhasePoint], float], p: PhasePoint, h: float = 1e-6) -> np.ndarray:
    """Central-difference 7-gradient of a phase function."""
    z0 = p.seven()
    out = np.zeros(7)
    for A in range(7):
        zp = z0.copy()
        zm = z0.copy()
        zp[A] += h
        zm[A] -= h
        out[A] = (fn(PhasePoint.from_seven(zp)) - fn(PhasePoint.from_seven(zm))) / (2 * h)
    return out


def phase_flow(Y: Callable[[PhasePoint], np.ndarray], p: PhasePoint, eps: float, nsteps: int = 4) -> np.ndarray:
    """Flow a phase point along a 7-vector field by parameter ``eps`` (RK4)."""
    z = p.seven()
    dt = eps / nsteps
    for _ in range(nsteps):
        k1 = Y(PhasePoint.from_seven(z))
        k2 = Y(PhasePoint.from_seven(z + 0.5 * dt * k1))
        k3 = Y(PhasePoint.from_seven(z + 0.5 * dt * k2))
        k4 = Y(PhasePoint.from_seven(z + dt * k3))
        z = z + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


def lie_derivative_covector_flow(Y, covector_fn, p: PhasePoint, eps: float = 1e-4, jac_h: float = 1e-5) -> np.ndarray:
    """Flow-transport Lie derivative of a 7-covector field along ``Y``.

    Pulls the covector back along the time-``eps`` flow of ``Y`` and central
    differences in ``eps``:  ``(Fl_e^* th - Fl_{-e}^* th) / (2 eps)``.
    """

    def pullback(eps_):
        def flow_map(z):
            return phase_flow(Y, PhasePoint.from_seven(z), eps_)

        z0 = p.seven()
        J = np.zeros((7, 7))        # J[A, B] = d flow^B / d z^A
        for A in range(7):
            zp = z0.copy()
            zm = z0.copy()
            zp[A] += jac_h
            zm[A] -= jac_h
            J[A, :] = (flow_map(zp) - flow_map(zm)) / (2 * jac_h)
        th = covector_fn(PhasePoint.from_seven(flow_map(z0)))
        return J @ th

    return (pullback(eps) - pullback(-eps)) / (2 * eps)


def lie_tau_hat_flow(model: SpacetimeModel, X: VectorField, p: PhasePoint, eps: float = 1e-4) -> np.ndarray:
    """Flow-transport Lie derivative of the rescaled time form along the jet lift of ``X``."""
    return lie_derivative_covector_flow(
        lambda q: holonomic_lift(model, X, q),
        lambda q: tau_hat(model, q),
        p, eps=eps)


def lie_phase_connection_grav(model: SpacetimeModel, X: VectorField, p: PhasePoint) -> np.ndarray:
    """Lie derivative of the gravitational phase connection along the jet lift.

    Coordinate formula with analytic spacetime derivatives and exact
    (polynomial-in-velocity) central differences for the velocity slots;
    shape (3, 4) matching :func:`jetphase.dynamics.phase_connection`.
    """
    x, v = p.x, p.v
    dd = delta_bar_dn(v)
    du = delta_bar_up(v)
    dK = dchristoffel(model, x)
    Xv = X(x)
    dX = X.jac(x)
    Ylift = holonomic_lift(model, X, p)
    Yjet = Ylift[4:]

    # spacetime derivative of Gamma^g at fixed velocities
    dG = -np.einsum("is,rlst,t->ril", dd, dK, du)           # dG[rho, i, lam]
    out = np.einsum("r,ril->il", Xv, dG)
    # velocity derivative of Gamma^g: quadratic in v, so central FD is exact
    h = 0.5
    for pidx in range(3):
        vp = v.copy()
        vm = v.copy()
        vp[pidx] += h
        vm[pidx] -= h
        dGdv = (grav_connection_raw(model, x, vp) - grav_connection_raw(model, x, vm)) / (2 * h)
        out += Yjet[pidx] * dGdv
    G = phase_connection(model, p, "grav")
    out += np.einsum("ir,lr->il", G, dX)
    # d_lam Y^i_0 at fixed velocities: jet component built from dX and d2X
    d2X = X.hess(x)
    dYjet = np.einsum("it,m,lmt->li", dd, du, d2X)          # dYjet[lam, i]
    out -= dYjet.T
    # - Gamma_lam{}^p dYjet^i/dv^p ; jet component is linear in dX contractions
    djet_dv = np.zeros((3, 3))                               # [p, i]
    for pidx in range(3):
        vp = v.copy()
        vm = v.copy()
        vp[pidx] += h
        vm[pidx] -= h
        jp = np.einsum("il,m,ml->i", delta_bar_dn(vp), delta_bar_up(vp), dX)
        jm = np.einsum("il,m,ml->i", delta_bar_dn(vm), delta_bar_up(vm), dX)
        djet_dv[pidx] = (jp - jm) / (2 * h)
    out -= np.einsum("pl,pi->il", G, djet_dv)
    return out


def lie_phase_connection_display(model: SpacetimeModel, X: VectorField, p: PhasePoint) -> np.ndarray:
    """Closed-form value ``-dbar^i_s dbar^r_0 (L_X K)_lam{}^s_r`` (horizontal-lift sign)."""
    lk = lie_connection(model, X, p.x)
    return -np.einsum("is,lsr,r->il", delta_bar_dn(p.v), lk, delta_bar_up(p.v))
