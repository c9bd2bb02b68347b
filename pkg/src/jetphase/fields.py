"""Spacetime background: metric, electromagnetic field, physical constants.

All arrays are plain numpy.  Index conventions used throughout the package:

* ``g[lam, mu]``        metric components ``g_{lam mu}``, signature (-+++)
* ``dg[rho, lam, mu]``  partial derivative ``d_rho g_{lam mu}``
* ``d2g[r, s, lam, mu]``second derivative ``d_r d_s g_{lam mu}``
* ``K[mu, lam, nu]``    Christoffel symbols of the second kind,
  ``K = 1/2 g^{lam rho} (d_mu g_{rho nu} + d_nu g_{rho mu} - d_rho g_{mu nu})``
* ``F[lam, mu]``        field strength, ``F_{lam mu} = d_lam A_mu - d_mu A_lam``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ChartDomain, MissingEMField, MissingPotential, SingularMetric

DET_TOL = 1e-12


@dataclass(frozen=True)
class Constants:
    """Particle and universal constants (m, q, c, hbar), all in chart units."""

    m: float = 1.0
    q: float = 0.0
    c: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.m <= 0 or self.c <= 0 or self.hbar <= 0:
            raise ValueError("m, c and hbar must be strictly positive")


def fd_step(x: np.ndarray) -> float:
    """Default central-difference step, scaled to the size of the point."""
    return 1e-5 * max(1.0, float(np.max(np.abs(x))))


def _fd_jacobian(fn, x, h=None):
    """Central-difference derivative d_rho fn(x), stacked on a new leading axis."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x) if h is None else h
    rows = []
    for rho in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[rho] += h
        xm[rho] -= h
        rows.append((np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2 * h))
    return np.stack(rows, axis=0)


class MetricField:
    """Lorentz metric with analytic or finite-difference derivatives.

    ``components`` maps a 4-point to the symmetric matrix ``g_{lam mu}``.
    ``derivatives`` and ``second_derivatives`` are optional analytic
    callbacks; when absent, central differences with the default step
    are used.
    """

    def __init__(self, components, derivatives=None, second_derivatives=None, fd_h=None):
        self._g = components
        self._dg = derivatives
        self._d2g = second_derivatives
        self.fd_h = fd_h

    def g(self, x) -> np.ndarray:
        val = np.asarray(self._g(np.asarray(x, dtype=float)), dtype=float)
        return val

    def dg(self, x) -> np.ndarray:
        if self._dg is not None:
            return np.asarray(self._dg(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(self._g, x, self.fd_h)

    def d2g(self, x) -> np.ndarray:
        if self._d2g is not None:
            return np.asarray(self._d2g(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(self.dg, x, self.fd_h)

    @property
    def analytic(self) -> bool:
        return self._dg is not None


class EMField:
    """Closed 2-form ``F`` with optional potential ``A`` (``F = curl A``).

    ``F[lam, mu] = d_lam A_mu - d_mu A_lam`` when the potential is given.
    Derivative callbacks are optional, with finite-difference fallback.
    """

    def __init__(self, F, dF=None, A=None, dA=None, fd_h=None):
        self._F = F
        self._dF = dF
        self._A = A
        self._dA = dA
        self.fd_h = fd_h

    def F(self, x) -> np.ndarray:
        return np.asarray(self._F(np.asarray(x, dtype=float)), dtype=float)

    def dF(self, x) -> np.ndarray:
        if self._dF is not None:
            return np.asarray(self._dF(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(self._F, x, self.fd_h)

    @property
    def has_potential(self) -> bool:
        return self._A is not None

    def A(self, x) -> np.ndarray:
        if self._A is None:
            raise MissingPotential("electromagnetic potential not supplied")
        return np.asarray(self._A(np.asarray(x, dtype=float)), dtype=float)

    def dA(self, x) -> np.ndarray:
        if self._dA is not None:
            return np.asarray(self._dA(np.asarray(x, dtype=float)), dtype=float)
        return _fd_jacobian(self.A, x, self.fd_h)


@dataclass
class ChartSpec:
    """Chart domain description: membership predicate plus boundary functions.

    ``boundary_fns`` are scalar functions of the 4-point that are positive
    inside the domain; trajectory integration bisects their sign changes.
    """

    name: str = "global"
    contains: Callable[[np.ndarray], bool] = lambda x: True
    boundary_fns: Sequence[Callable[[np.ndarray], float]] = field(default_factory=tuple)


class SpacetimeModel:
    """Bundle of metric, electromagnetic field, constants and chart data."""

    def __init__(self, metric: MetricField, constants: Constants,
                 em: Optional[EMField] = None, chart: Optional[ChartSpec] = None,
                 signature_probes: Optional[Sequence[np.ndarray]] = None):
        self.metric = metric
        self.constants = constants
        self.em = em
        self.chart = chart or ChartSpec()
        if signature_probes is not None:
            for xp in signature_probes:
                check_signature(self, np.asarray(xp, dtype=float))

    # -- metric accessors ------------------------------------------------

    def g(self, x) -> np.ndarray:
        self.require_in_chart(x)
        return self.metric.g(x)

    def ginv(self, x) -> np.ndarray:
        gx = self.g(x)
        if abs(np.linalg.det(gx)) < DET_TOL:
            raise SingularMetric(f"det g = {np.linalg.det(gx):.3e} at x = {x}")
        return np.linalg.inv(gx)

    def dg(self, x) -> np.ndarray:
        self.require_in_chart(x)
        return self.metric.dg(x)

    def d2g(self, x) -> np.ndarray:
        self.require_in_chart(x)
        return self.metric.d2g(x)

    # -- electromagnetic accessors ----------------------------------------
    # fhat/ahat are the charge-rescaled objects (q/hbar times F, A) that
    # enter every phase-space formula; they vanish for a neutral particle.

    @property
    def has_em(self) -> bool:
        return self.em is not None

    @property
    def has_potential(self) -> bool:
        return self.em is not None and self.em.has_potential

    def F(self, x) -> np.ndarray:
        if self.em is None:
            return np.zeros((4, 4))
        return self.em.F(x)

    def fhat(self, x) -> np.ndarray:
        k = self.constants.q / self.constants.hbar
        return k * self.F(x)

    def dfhat(self, x) -> np.ndarray:
        if self.em is None:
            return np.zeros((4, 4, 4))
        k = self.constants.q / self.constants.hbar
        return k * self.em.dF(x)

    def ahat(self, x) -> np.ndarray:
        k = self.constants.q / self.constants.hbar
        if self.em is None or k == 0.0:
            return np.zeros(4)
        return k * self.em.A(x)

    def dahat(self, x) -> np.ndarray:
        k = self.constants.q / self.constants.hbar
        if self.em is None or k == 0.0:
            return np.zeros((4, 4))
        return k * self.em.dA(x)

    # -- chart -------------------------------------------------------------

    def in_chart(self, x) -> bool:
        return bool(self.chart.contains(np.asarray(x, dtype=float)))

    def require_in_chart(self, x):
        if not self.in_chart(x):
            raise ChartDomain(f"point {np.asarray(x)} outside chart '{self.chart.name}'")


def christoffel(model: SpacetimeModel, x) -> np.ndarray:
    """Christoffel symbols ``K[mu, lam, nu]``, symmetric in the lower pair."""
    x = np.asarray(x, dtype=float)
    model.require_in_chart(x)
    gx = model.metric.g(x)
    det = np.linalg.det(gx)
    if abs(det) < DET_TOL:
        raise SingularMetric(f"det g = {det:.3e} at x = {x}")
    gi = np.linalg.inv(gx)
    d = model.metric.dg(x)
    # 1/2 g^{lam rho} (d_mu g_{rho nu} + d_nu g_{rho mu} - d_rho g_{mu nu})
    return 0.5 * np.einsum("lr,mrn->mln", gi, d + d.transpose(2, 1, 0) - d.transpose(1, 0, 2))


def dchristoffel(model: SpacetimeModel, x, h=None) -> np.ndarray:
    """Spacetime derivative ``dK[rho, mu, lam, nu] = d_rho K[mu, lam, nu]``.

    Analytic (chain rule through the inverse metric) when the metric carries
    second-derivative callbacks, otherwise central differences.
    """
    x = np.asarray(x, dtype=float)
    if model.metric._d2g is None:
        return _fd_jacobian(lambda y: christoffel(model, y), x, h)
    gi = model.ginv(x)
    d = model.metric.dg(x)
    d2 = model.metric.d2g(x)
    sym = d + d.transpose(2, 1, 0) - d.transpose(1, 0, 2)
    dsym = d2 + d2.transpose(0, 3, 2, 1) - d2.transpose(0, 2, 1, 3)
    dgi = -np.einsum("la,rab,bs->rls", gi, d, gi)
    return 0.5 * (np.einsum("rls,msn->rmln", dgi, sym)
                  + np.einsum("ls,rmsn->rmln", gi, dsym))


def metric_compatibility_residual(model: SpacetimeModel, x) -> float:
    """Max-norm of ``d_rho g_{lam mu} - K_rho^s_lam g_{s mu} - K_rho^s_mu g_{lam s}``."""
    gx = model.metric.g(x)
    d = model.metric.dg(x)
    K = christoffel(model, x)
    nabla = d - np.einsum("rsl,sm->rlm", K, gx) - np.einsum("rsm,ls->rlm", K, gx)
    return float(np.max(np.abs(nabla)))


def check_signature(model: SpacetimeModel, x) -> None:
    """Verify (-+++) signature by eigenvalue count; raises SingularMetric."""
    ev = np.linalg.eigvalsh(model.metric.g(x))
    if np.sum(ev < 0) != 1 or np.sum(ev > 0) != 3:
        raise SingularMetric(f"metric signature is not (-+++) at x = {x}: eigenvalues {ev}")


def check_closed(em: EMField, x, h: float) -> float:
    """Closedness residual via central differences.

    Returns ``max |d_rho F_{lam mu} + d_lam F_{mu rho} + d_mu F_{rho lam}|``
    over all index triples.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    dF = _fd_jacobian(em.F, np.asarray(x, dtype=float), h)
    cyc = dF + dF.transpose(1, 2, 0) + dF.transpose(2, 0, 1)
    return float(np.max(np.abs(cyc)))


def check_potential(em: EMField, x, h: float) -> float:
    """Residual of ``F - curl A`` via central differences on the potential."""
    if not em.has_potential:
        raise MissingEMField("no potential to check")
    dA = _fd_jacobian(em.A, np.asarray(x, dtype=float), h)
    return float(np.max(np.abs(dA - dA.T - em.F(x))))
