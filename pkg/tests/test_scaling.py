"""Constant-factor placement checks: every identity must survive m, q, c, hbar != 1."""

import numpy as np
import pytest

from jetphase import (Constants, IntegratorOptions, charge_drift,
                      duality_residuals, holonomic_lift, integrate,
                      minkowski, normalized_d, phase_point,
                      reissner_nordstrom, special_hamiltonian_lift)
from jetphase.audit import contact_residual, potential_residual

ODD = Constants(m=1.7, q=0.4, c=2.5, hbar=0.7)


@pytest.fixture(scope="module")
def models():
    return minkowski(ODD), reissner_nordstrom(ODD, k_s=1.0, k_q=0.3, q0=0.4)


def test_duality_and_norm(models, rng):
    for cm in models:
        for _ in range(20):
            p = cm.sample_point(rng)
            assert duality_residuals(cm.model, p).max() < 1e-9
            d = normalized_d(cm.model, p)
            assert abs(float(d @ cm.model.g(p.x) @ d) + ODD.c**2) < 1e-9


def test_potential_pairing(models, rng):
    mk, rn = models
    for _ in range(5):
        assert potential_residual(rn.model, rn.sample_point(rng)) < 1e-6
        assert contact_residual(mk.model, mk.sample_point(rng)) < 1e-6


def test_lift_identity(models, rng):
    for cm in models:
        p = cm.sample_point(rng)
        for s in cm.killing:
            diff = special_hamiltonian_lift(cm.model, s, p) - holonomic_lift(cm.model, s.X, p)
            assert np.abs(diff).max() < 1e-9


def test_charge_drift_fast_particle(models):
    mk, _ = models
    p0 = phase_point(mk.model, [0, 0, 0, 0], [0.9, 0.0, 0.0])   # subluminal for c = 2.5
    traj = integrate(mk.model, p0, (0.0, 3.0), IntegratorOptions(step=1e-3))
    assert charge_drift(mk.model, mk.algebra, traj).max() < 1e-10
