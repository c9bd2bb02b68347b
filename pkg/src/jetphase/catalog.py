"""Built-in spacetimes with analytic derivatives and their symmetry algebras.

Two models ship with the package:

* ``minkowski``: flat metric diag(-1, 1, 1, 1) in Cartesian coordinates, no
  electromagnetic field, ten-dimensional isometry algebra (four translations,
  three rotations, three boosts).
* ``reissner_nordstrom``: static spherically symmetric metric in chart
  ``(t, r, theta, phi)`` with lapse ``1 - k_s/r + k_q^2/r^2`` and Coulomb
  potential of strength ``q0``; isometries are the time translation and the
  three rotation generators.  ``k_q = 0, q0 = 0`` gives Schwarzschild.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .dynamics import Observer, ZERO_OBSERVER
from .fields import ChartSpec, Constants, EMField, MetricField, SpacetimeModel
from .momentum import GroupElement, SymmetryAlgebra, build_algebra
from .phase import PhasePoint, phase_point
from .symmetry import ScalarField, SpecialPhaseFunction, VectorField

POLE_MARGIN = 1e-6


@dataclass
class CatalogModel:
    """A named model, its verified Killing algebra and a probe sampler."""

    name: str
    model: SpacetimeModel
    killing: List[SpecialPhaseFunction]
    algebra: SymmetryAlgebra
    observer: Observer
    sample_event: Callable[[np.random.Generator], np.ndarray]

    def sample_point(self, rng: np.random.Generator, vmax_frac: float = 0.85) -> PhasePoint:
        """Random timelike phase point: event in chart, velocity inside the cone."""
        x = self.sample_event(rng)
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        gx = self.model.g(x)
        a = float(u @ gx[1:, 1:] @ u)
        b = 2.0 * float(gx[0, 1:] @ u)
        c = float(gx[0, 0])
        t_plus = (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)
        v = rng.uniform(0.05, vmax_frac) * t_plus * u
        return phase_point(self.model, x, v)

    def sample_points(self, rng: np.random.Generator, n: int, vmax_frac: float = 0.85):
        return [self.sample_point(rng, vmax_frac) for _ in range(n)]


# -- Minkowski ---------------------------------------------------------------


def _minkowski_killing() -> List[SpecialPhaseFunction]:
    out = []
    for lam, nm in enumerate(["e0", "e1", "e2", "e3"]):
        const = np.zeros(4)
        const[lam] = 1.0
        out.append(SpecialPhaseFunction(VectorField.affine(const, name=nm),
                                        ScalarField.zero(), name=nm))
    rot_pairs = [("r1", 2, 3), ("r2", 3, 1), ("r3", 1, 2)]
    for nm, i, j in rot_pairs:
        lin = np.zeros((4, 4))
        lin[j, i] = 1.0       # X^j = x^i
        lin[i, j] = -1.0      # X^i = -x^j
        out.append(SpecialPhaseFunction(VectorField.affine(np.zeros(4), lin, name=nm),
                                        ScalarField.zero(), name=nm))
    for i, nm in enumerate(["b1", "b2", "b3"], start=1):
        lin = np.zeros((4, 4))
        lin[i, 0] = 1.0       # X^i = x^0
        lin[0, i] = 1.0       # X^0 = x^i
        out.append(SpecialPhaseFunction(VectorField.affine(np.zeros(4), lin, name=nm),
                                        ScalarField.zero(), name=nm))
    return out


def _rotation_z(angle: float) -> GroupElement:
    A = np.eye(4)
    A[1, 1] = A[2, 2] = math.cos(angle)
    A[1, 2] = -math.sin(angle)
    A[2, 1] = math.sin(angle)
    return GroupElement(f"rot_z({angle:.4g})", A, np.zeros(4))


def _boost_x(rapidity: float) -> GroupElement:
    A = np.eye(4)
    A[0, 0] = A[1, 1] = math.cosh(rapidity)
    A[0, 1] = A[1, 0] = math.sinh(rapidity)
    return GroupElement(f"boost_x({rapidity:.4g})", A, np.zeros(4))


def minkowski(constants: Optional[Constants] = None, box: float = 2.0) -> CatalogModel:
    """Flat catalog model with the ten-dimensional isometry algebra."""
    constants = constants or Constants()
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    metric = MetricField(lambda x: eta.copy(),
                         lambda x: np.zeros((4, 4, 4)),
                         lambda x: np.zeros((4, 4, 4, 4)))
    model = SpacetimeModel(metric, constants, em=None, chart=ChartSpec(name="cartesian"))

    def sample_event(rng):
        return rng.uniform(-box, box, size=4)

    rng = np.random.default_rng(20240811)
    probes = [sample_event(rng) for _ in range(24)]
    killing = _minkowski_killing()
    group = [_rotation_z(math.pi / 2), _rotation_z(0.73), _boost_x(0.2)]
    algebra = build_algebra(model, killing, probes, group_elements=group)
    return CatalogModel("minkowski", model, killing, algebra, ZERO_OBSERVER, sample_event)


# -- Reissner-Nordstrom -------------------------------------------------------


def _rn_metric(k_s: float, k_q: float) -> MetricField:
    def lapse(r):
        return 1.0 - k_s / r + k_q**2 / r**2

    def dlapse(r):
        return k_s / r**2 - 2.0 * k_q**2 / r**3

    def d2lapse(r):
        return -2.0 * k_s / r**3 + 6.0 * k_q**2 / r**4

    def g(x):
        t, r, th, ph = x
        D = lapse(r)
        return np.diag([-D, 1.0 / D, r**2, r**2 * math.sin(th) ** 2])

    def dg(x):
        t, r, th, ph = x
        D, dD = lapse(r), dlapse(r)
        out = np.zeros((4, 4, 4))
        s, c = math.sin(th), math.cos(th)
        out[1, 0, 0] = -dD
        out[1, 1, 1] = -dD / D**2
        out[1, 2, 2] = 2.0 * r
        out[1, 3, 3] = 2.0 * r * s**2
        out[2, 3, 3] = 2.0 * r**2 * s * c
        return out

    def d2g(x):
        t, r, th, ph = x
        D, dD, d2D = lapse(r), dlapse(r), d2lapse(r)
        s, c = math.sin(th), math.cos(th)
        out = np.zeros((4, 4, 4, 4))
        out[1, 1, 0, 0] = -d2D
        out[1, 1, 1, 1] = -d2D / D**2 + 2.0 * dD**2 / D**3
        out[1, 1, 2, 2] = 2.0
        out[1, 1, 3, 3] = 2.0 * s**2
        out[1, 2, 3, 3] = out[2, 1, 3, 3] = 4.0 * r * s * c
        out[2, 2, 3, 3] = 2.0 * r**2 * (c**2 - s**2)
        return out

    return MetricField(g, dg, d2g)


def _rn_em(k_pot: float) -> EMField:
    """Coulomb field with potential ``A = -(k_pot / r) d^0``."""

    def A(x):
        return np.array([-k_pot / x[1], 0.0, 0.0, 0.0])

    def dA(x):
        out = np.zeros((4, 4))
        out[1, 0] = k_pot / x[1] ** 2
        return out

    def F(x):
        out = np.zeros((4, 4))
        out[0, 1] = -k_pot / x[1] ** 2
        out[1, 0] = -out[0, 1]
        return out

    def dF(x):
        out = np.zeros((4, 4, 4))
        out[1, 0, 1] = 2.0 * k_pot / x[1] ** 3
        out[1, 1, 0] = -out[1, 0, 1]
        return out

    return EMField(F, dF, A, dA)


def _rn_rotations() -> List[SpecialPhaseFunction]:
    def make(name, value, jac, hess):
        return SpecialPhaseFunction(VectorField(value, jac, hess, name=name),
                                    ScalarField.zero(), name=name)

    def v1(x):
        th, ph = x[2], x[3]
        return np.array([0.0, 0.0, math.sin(ph), math.cos(ph) / math.tan(th)])

    def j1(x):
        th, ph = x[2], x[3]
        out = np.zeros((4, 4))
        out[2, 3] = -math.cos(ph) / math.sin(th) ** 2
        out[3, 2] = math.cos(ph)
        out[3, 3] = -math.sin(ph) / math.tan(th)
        return out

    def h1(x):
        th, ph = x[2], x[3]
        s, c = math.sin(th), math.cos(th)
        out = np.zeros((4, 4, 4))
        out[2, 2, 3] = 2.0 * math.cos(ph) * c / s**3
        out[2, 3, 3] = out[3, 2, 3] = math.sin(ph) / s**2
        out[3, 3, 2] = -math.sin(ph)
        out[3, 3, 3] = -math.cos(ph) / math.tan(th)
        return out

    def v2(x):
        th, ph = x[2], x[3]
        return np.array([0.0, 0.0, math.cos(ph), -math.sin(ph) / math.tan(th)])

    def j2(x):
        th, ph = x[2], x[3]
        out = np.zeros((4, 4))
        out[2, 3] = math.sin(ph) / math.sin(th) ** 2
        out[3, 2] = -math.sin(ph)
        out[3, 3] = -math.cos(ph) / math.tan(th)
        return out

    def h2(x):
        th, ph = x[2], x[3]
        s, c = math.sin(th), math.cos(th)
        out = np.zeros((4, 4, 4))
        out[2, 2, 3] = -2.0 * math.sin(ph) * c / s**3
        out[2, 3, 3] = out[3, 2, 3] = math.cos(ph) / s**2
        out[3, 3, 2] = -math.cos(ph)
        out[3, 3, 3] = math.sin(ph) / math.tan(th)
        return out

    R1 = make("rot1", v1, j1, h1)
    R2 = make("rot2", v2, j2, h2)
    R3 = SpecialPhaseFunction(VectorField.affine([0.0, 0.0, 0.0, 1.0], name="rot_phi"),
                              ScalarField.zero(), name="rot_phi")
    return [R1, R2, R3]


def reissner_nordstrom(constants: Optional[Constants] = None, k_s: float = 1.0,
                       k_q: float = 0.0, q0: float = 0.0,
                       include_potential: bool = True) -> CatalogModel:
    """Static charged-center catalog model on the exterior chart.

    ``q0`` is the numerical charge entering the Coulomb potential rescaled by
    ``1/hbar``; a nonzero ``q0`` requires a charged test particle so the
    unscaled potential stays finite.  ``include_potential=False`` registers
    the field strength only, for exercising potential-dependent diagnostics.
    """
    constants = constants or Constants()
    if k_s < 0 or k_q < 0:
        raise ValueError("k_s and k_q must be nonnegative")
    if q0 != 0.0 and constants.q == 0.0:
        raise ValueError("q0 != 0 needs a particle with nonzero charge q")

    disc = k_s**2 - 4.0 * k_q**2
    r_plus = 0.5 * (k_s + math.sqrt(disc)) if disc >= 0 and k_s > 0 else 0.0

    def contains(x):
        r, th = x[1], x[2]
        return (r > r_plus) and (r > 0.0) and (0.0 < th < math.pi) \
            and (1.0 - k_s / r + k_q**2 / r**2 > 0.0)

    boundary = (
        lambda x: 1.0 - k_s / x[1] + k_q**2 / x[1] ** 2 if x[1] > 0 else -1.0,
        lambda x: x[2],
        lambda x: math.pi - x[2],
    )
    chart = ChartSpec(name="rn_exterior", contains=contains, boundary_fns=boundary)

    em = None
    if q0 != 0.0:
        # unscaled potential: ahat = (q/hbar) A must equal -(q0/hbar) / r d^0
        em = _rn_em(q0 / constants.q)
        if not include_potential:
            em = EMField(em._F, em._dF)
    model = SpacetimeModel(_rn_metric(k_s, k_q), constants, em=em, chart=chart)

    r_lo = max(1.5 * r_plus, r_plus + 1.0, 2.0)
    r_hi = r_lo + 8.0

    def sample_event(rng):
        return np.array([
            rng.uniform(-1.0, 1.0),
            rng.uniform(r_lo, r_hi),
            rng.uniform(0.35, math.pi - 0.35),
            rng.uniform(0.0, 2.0 * math.pi),
        ])

    hbar = constants.hbar
    if q0 != 0.0:
        f_time = ScalarField(lambda x: (q0 / hbar) / x[1],
                             lambda x: np.array([0.0, -(q0 / hbar) / x[1] ** 2, 0.0, 0.0]),
                             lambda x: _f_time_hess(q0 / hbar, x))
    else:
        f_time = ScalarField.zero()
    time_tr = SpecialPhaseFunction(VectorField.affine([1.0, 0.0, 0.0, 0.0], name="time"),
                                   f_time, name="time")
    killing = [time_tr] + _rn_rotations()

    rng = np.random.default_rng(20240812)
    probes = [sample_event(rng) for _ in range(24)]
    group = [
        GroupElement("phi_shift(pi/2)", _phi_shift_A(), np.array([0.0, 0.0, 0.0, math.pi / 2])),
        GroupElement("phi_shift(0.41)", _phi_shift_A(), np.array([0.0, 0.0, 0.0, 0.41])),
        GroupElement("t_shift(1.7)", np.eye(4), np.array([1.7, 0.0, 0.0, 0.0])),
    ]
    algebra = build_algebra(model, killing, probes, group_elements=group)
    return CatalogModel("reissner_nordstrom", model, killing, algebra, ZERO_OBSERVER, sample_event)


def _phi_shift_A():
    return np.eye(4)


def _f_time_hess(k, x):
    out = np.zeros((4, 4))
    out[1, 1] = 2.0 * k / x[1] ** 3
    return out


def schwarzschild(constants: Optional[Constants] = None, k_s: float = 1.0) -> CatalogModel:
    """Uncharged special case of the static catalog model."""
    cm = reissner_nordstrom(constants, k_s=k_s, k_q=0.0, q0=0.0)
    cm.name = "schwarzschild"
    return cm


def by_name(name: str, constants: Optional[Constants] = None, **params) -> CatalogModel:
    if name == "minkowski":
        return minkowski(constants)
    if name == "reissner_nordstrom":
        return reissner_nordstrom(constants, **params)
    if name == "schwarzschild":
        return schwarzschild(constants, **{k: v for k, v in params.items() if k == "k_s"})
    raise ValueError(f"unknown catalog model {name!r}")
