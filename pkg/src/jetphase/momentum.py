"""Momentum maps for symmetry algebras acting by jet-lifted isometries.

Charges are ``J_i = -tau_hat(X_i) + a_hat(X_i)`` for each basis field; they
are conserved along motions, generate the lifted action through the phase
2-form, and transform by the coadjoint action under group elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dynamics import omega
from .errors import DegenerateDenominator, MissingPotential
from .fields import SpacetimeModel
from .motion import Trajectory
from .phase import PhasePoint, phase_point, tau_hat
from .symmetry import (ScalarField, SpecialPhaseFunction, VectorField,
                       commutator, holonomic_lift, is_killing, lie_em,
                       special_gradient)


@dataclass(frozen=True)
class GroupElement:
    """Affine spacetime map ``x -> A x + b`` with an optional algebra action.

    ``ad_inv`` is the matrix of the inverse-adjoint action on the algebra
    basis; when absent it is fitted numerically from field pushforwards.
    """

    name: str
    A: np.ndarray
    b: np.ndarray
    ad_inv: Optional[np.ndarray] = None


@dataclass
class SymmetryAlgebra:
    """Basis of conserved special phase functions with verified closure."""

    basis: List[SpecialPhaseFunction]
    structure_constants: np.ndarray          # c[i, j, k]: [X_i, X_j] = c[i,j,k] X_k
    group_elements: List[GroupElement] = field(default_factory=list)

    @property
    def names(self) -> List[str]:
        return [spf.name or f"xi_{i}" for i, spf in enumerate(self.basis)]

    def __len__(self) -> int:
        return len(self.basis)


def interior_potential(model: SpacetimeModel, X: VectorField) -> ScalarField:
    """The scalar ``a_hat(X)`` with analytic gradient."""

    def value(x):
        return float(model.ahat(x) @ X(x))

    def grad(x):
        return model.dahat(x) @ X(x) + X.jac(x) @ model.ahat(x)

    return ScalarField(value, grad)


def charge_function(model: SpacetimeModel, spf: SpecialPhaseFunction) -> SpecialPhaseFunction:
    """Momentum charge of a basis field as a special phase function.

    ``J = -tau_hat(X) + a_hat(X)`` is the special pair ``(-X, a_hat(X))``.
    """
    Xneg = VectorField(lambda x: -spf.X(x), lambda x: -spf.X.jac(x),
                       (lambda x: -spf.X.hess(x)) if spf.X.has_hess else None,
                       name=f"-{spf.X.name}")
    return SpecialPhaseFunction(Xneg, interior_potential(model, spf.X), name=f"J[{spf.name}]")


def _field_coefficients(fields_, basis, probes):
    """Least-squares expansion of each field in ``fields_`` over ``basis``."""
    rows = []
    cols = []
    for x in probes:
        rows.append(np.stack([Xb(x) for Xb in basis], axis=1))    # (4, n)
    A = np.concatenate(rows, axis=0)                               # (4 npts, n)
    out = np.zeros((len(basis), len(fields_)))
    for jdx, Y in enumerate(fields_):
        b = np.concatenate([Y(x) for x in probes], axis=0)
        coef, res, *_ = np.linalg.lstsq(A, b, rcond=None)
        if np.max(np.abs(A @ coef - b)) > 1e-8:
            raise ValueError("field does not lie in the span of the algebra basis")
        out[:, jdx] = coef
    return out


def build_algebra(model: SpacetimeModel, basis: Sequence[SpecialPhaseFunction],
                  probes: Sequence[np.ndarray],
                  group_elements: Sequence[GroupElement] = (),
                  killing_tol: float = 1e-10, struct_tol: float = 1e-10) -> SymmetryAlgebra:
    """Verify the basis (Killing + field symmetry) and fit structure constants."""
    for spf in basis:
        ok, res = is_killing(model, spf.X, probes, tol=killing_tol)
        if not ok:
            raise ValueError(f"basis field {spf.name!r} is not Killing: residual {res:.3e}")
        em_res = max(float(np.max(np.abs(lie_em(model, spf.X, x)))) for x in probes)
        if em_res > killing_tol:
            raise ValueError(f"basis field {spf.name!r} does not preserve the field strength")
    fields_ = [spf.X for spf in basis]
    n = len(basis)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            comm = commutator(fields_[i], fields_[j])
            coef = _field_coefficients([comm], fields_, probes)[:, 0]
            recon = max(float(np.max(np.abs(comm(x) - sum(coef[k] * fields_[k](x) for k in range(n)))))
                        for x in probes)
            if recon > struct_tol:
                raise ValueError(f"commutator [{i},{j}] not reproduced by structure constants")
            c[i, j] = coef
            c[j, i] = -coef
    return SymmetryAlgebra(list(basis), c, list(group_elements))


def momentum_map(model: SpacetimeModel, algebra: SymmetryAlgebra, p: PhasePoint) -> np.ndarray:
    """Charge coefficients ``J_i(p) = -tau_hat(X_i) + a_hat(X_i)``."""
    if model.has_em and model.constants.q != 0.0 and not model.has_potential:
        raise MissingPotential("momentum map needs the electromagnetic potential")
    th = tau_hat(model, p)
    out = np.zeros(len(algebra))
    ah = model.ahat(p.x)
    for i, spf in enumerate(algebra.basis):
        Xv = spf.X(p.x)
        out[i] = -float(th[:4] @ Xv) + float(ah @ Xv)
    return out


def momentum_generator_residual(model: SpacetimeModel, algebra: SymmetryAlgebra, p: PhasePoint) -> float:
    """Max-norm of ``i_{X_(1)} Omega + dJ`` over the basis (analytic gradients)."""
    om = omega(model, p)
    worst = 0.0
    for spf in algebra.basis:
        lift = holonomic_lift(model, spf.X, p)
        dJ = special_gradient(model, charge_function(model, spf), p)
        worst = max(worst, float(np.max(np.abs(lift @ om + dJ))))
    return worst


def prolong_action(model: SpacetimeModel, g: GroupElement, p: PhasePoint) -> PhasePoint:
    """Jet prolongation of an affine map: fractional-linear action on velocities."""
    A, b = np.asarray(g.A, dtype=float), np.asarray(g.b, dtype=float)
    if abs(np.linalg.det(A)) < 1e-12:
        raise ValueError(f"group element {g.name!r} is not invertible")
    xg = A @ p.x + b
    du = np.concatenate([[1.0], p.v])
    den = float(A[0] @ du)
    if abs(den) < 1e-12:
        raise DegenerateDenominator(f"jet action denominator {den:.3e} under {g.name!r}")
    vg = (A[1:] @ du) / den
    return phase_point(model, xg, vg)


def ad_inverse_matrix(g: GroupElement, algebra: SymmetryAlgebra, probes: Sequence[np.ndarray]) -> np.ndarray:
    """Matrix ``M[j, i]`` with ``Ad_{g^{-1}} xi_i = M[j, i] xi_j``, fitted from pushforwards."""
    if g.ad_inv is not None:
        return np.asarray(g.ad_inv, dtype=float)
    A, b = g.A, g.b
    Ainv = np.linalg.inv(A)
    pushed = [
        (lambda X: (lambda x: Ainv @ X(A @ x + b)))(spf.X)
        for spf in algebra.basis
    ]
    return _field_coefficients(pushed, [spf.X for spf in algebra.basis], probes)


def equivariance_residual(model: SpacetimeModel, algebra: SymmetryAlgebra, g: GroupElement,
                          p: PhasePoint, probes: Sequence[np.ndarray]) -> float:
    """``max_i |J_i(g . p) - (CoAd_g J(p))_i|`` for one group element."""
    M = ad_inverse_matrix(g, algebra, probes)
    J_at_gp = momentum_map(model, algebra, prolong_action(model, g, p))
    coad = M.T @ momentum_map(model, algebra, p)
    return float(np.max(np.abs(J_at_gp - coad)))


def charge_values(model: SpacetimeModel, algebra: SymmetryAlgebra, traj: Trajectory) -> np.ndarray:
    """Charges evaluated at every trajectory sample, shape (n_samples, n_charges)."""
    out = np.zeros((len(traj), len(algebra)))
    for kdx in range(len(traj)):
        out[kdx] = momentum_map(model, algebra, traj.point(kdx))
    return out


def charge_drift(model: SpacetimeModel, algebra: SymmetryAlgebra, traj: Trajectory) -> np.ndarray:
    """Per-charge ``max_k |J(p_k) - J(p_0)| / max(1, |J(p_0)|)`` along a trajectory."""
    if len(traj) == 0:
        return np.zeros(len(algebra))
    vals = charge_values(model, algebra, traj)
    ref = vals[0]
    denom = np.maximum(1.0, np.abs(ref))
    return np.max(np.abs(vals - ref), axis=0) / denom
