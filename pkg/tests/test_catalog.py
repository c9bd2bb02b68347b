import math

import numpy as np
import pytest

from jetphase import (Constants, IntegratorOptions, alpha0, integrate,
                      is_killing, lie_em, phase_point)
from jetphase.catalog import by_name, minkowski, reissner_nordstrom, schwarzschild
from jetphase.errors import ChartDomain


def test_minkowski_basics(mk):
    x = np.array([0.3, -1.0, 2.0, 0.5])
    assert np.abs(mk.model.g(x) - np.diag([-1.0, 1, 1, 1])).max() == 0.0
    assert mk.model.em is None
    assert len(mk.killing) == 10
    assert [s.name for s in mk.killing[:4]] == ["e0", "e1", "e2", "e3"]


def test_minkowski_alpha0_formula(mk, rng):
    for _ in range(20):
        p = mk.sample_point(rng)
        expect = 1.0 / math.sqrt(abs(-1.0 + float(p.v @ p.v)))
        assert abs(alpha0(mk.model, p) - expect) < 1e-14


def test_minkowski_killing_residuals(mk, rng):
    probes = [mk.sample_event(rng) for _ in range(30)]
    for s in mk.killing:
        ok, res = is_killing(mk.model, s.X, probes, tol=1e-12)
        assert ok, (s.name, res)


def test_rn_metric_components(rn):
    r, th = 3.0, 1.1
    g = rn.model.g([0.0, r, th, 0.7])
    D = 1.0 - 1.0 / r + 0.09 / r**2
    assert abs(g[0, 0] + D) < 1e-15
    assert abs(g[1, 1] - 1.0 / D) < 1e-15
    assert abs(g[2, 2] - r**2) < 1e-15
    assert abs(g[3, 3] - r**2 * math.sin(th) ** 2) < 1e-15


def test_rn_potential_and_field(rn):
    k = rn.model.constants
    x = np.array([0.0, 2.0, 1.3, 0.2])
    # ahat = -(q0/hbar)/r d^0 and fhat_01 = -q0/(hbar r^2)
    assert abs(rn.model.ahat(x)[0] + 0.7 / (k.hbar * 2.0)) < 1e-15
    assert abs(rn.model.fhat(x)[0, 1] + 0.7 / (k.hbar * 4.0)) < 1e-15


def test_rn_killing_residuals(rn, rng):
    probes = [rn.sample_event(rng) for _ in range(30)]
    for s in rn.killing:
        ok, res = is_killing(rn.model, s.X, probes, tol=1e-12)
        assert ok, (s.name, res)
        em_res = max(np.abs(lie_em(rn.model, s.X, x)).max() for x in probes)
        assert em_res < 1e-12


def test_rn_chart_domain(rn):
    r_plus = 0.5 * (1.0 + math.sqrt(1.0 - 4 * 0.09))
    with pytest.raises(ChartDomain):
        rn.model.g([0.0, r_plus - 0.05, 1.0, 0.0])
    with pytest.raises(ChartDomain):
        rn.model.g([0.0, 3.0, -0.1, 0.0])
    rn.model.g([0.0, r_plus + 0.05, 1.0, 0.0])


def test_rn_parameter_validation():
    with pytest.raises(ValueError):
        reissner_nordstrom(Constants(), k_s=-1.0)
    with pytest.raises(ValueError):
        reissner_nordstrom(Constants(q=0.0), k_s=1.0, k_q=0.1, q0=0.5)


def test_schwarzschild_is_uncharged(schw):
    assert schw.model.em is None
    assert schw.name == "schwarzschild"
    assert len(schw.killing) == 4


def test_flat_limit_matches_cartesian():
    """Zero-mass zero-charge chart: trajectories are straight lines in Cartesian terms."""
    flat = reissner_nordstrom(Constants(), k_s=0.0, k_q=0.0, q0=0.0)
    r0, th0, ph0 = 5.0, 1.2, 0.4
    v = np.array([0.02, 0.015, -0.01])
    p0 = phase_point(flat.model, [0.0, r0, th0, ph0], v)
    T = 8.0
    traj = integrate(flat.model, p0, (0.0, T),
                     IntegratorOptions(method="rkf45-adaptive", atol=1e-12, rtol=1e-12))
    assert traj.termination == "range_end"

    def cart(r, th, ph):
        return np.array([r * math.sin(th) * math.cos(ph),
                         r * math.sin(th) * math.sin(ph),
                         r * math.cos(th)])

    start = cart(r0, th0, ph0)
    # Cartesian velocity from the chart rates at t = 0
    eps = 1e-6
    v_cart = (cart(r0 + eps * v[0], th0 + eps * v[1], ph0 + eps * v[2]) - start) / eps
    for k in range(0, len(traj), max(1, len(traj) // 12)):
        pos = cart(traj.x[k, 0], traj.x[k, 1], traj.x[k, 2])
        assert np.abs(pos - (start + v_cart * traj.x0[k])).max() < 1e-7


def test_by_name_dispatch():
    assert by_name("minkowski").name == "minkowski"
    assert by_name("schwarzschild", k_s=2.0).name == "schwarzschild"
    assert by_name("reissner_nordstrom", Constants(q=1.0), k_s=1.0, k_q=0.2, q0=1.0).name \
        == "reissner_nordstrom"
    with pytest.raises(ValueError):
        by_name("kerr")


def test_sampler_respects_chart(mk, rn, rng):
    for cm in (mk, rn):
        for _ in range(50):
            p = cm.sample_point(rng)
            assert cm.model.in_chart(p.x)
