import numpy as np
import pytest

from jetphase import (holonomic_lift, is_killing, lie_connection, lie_em,
                      lie_metric, phase_point, special_bracket, special_eval,
                      special_gradient, special_hamiltonian_lift)
from jetphase.errors import MissingDerivatives
from jetphase.symmetry import (ScalarField, SpecialPhaseFunction, VectorField,
                               bracket_value_jacobi, commutator,
                               conservation_residual, lie_phase_connection_display,
                               lie_phase_connection_grav, lie_tau_hat_flow,
                               self_holonomy_residual, seven_gradient_fd)

ORIGIN = [0.0, 0.0, 0.0, 0.0]

TRANSLATION_X = VectorField.affine([0.0, 1.0, 0.0, 0.0], name="e1")
ROTATION_Z = VectorField.affine(np.zeros(4), [[0, 0, 0, 0], [0, 0, -1, 0],
                                              [0, 1, 0, 0], [0, 0, 0, 0]], name="r3")
BOOST_X = VectorField.affine(np.zeros(4), [[0, 1, 0, 0], [1, 0, 0, 0],
                                           [0, 0, 0, 0], [0, 0, 0, 0]], name="b1")
STRETCH_X = VectorField.affine(np.zeros(4), [[0, 0, 0, 0], [0, 1, 0, 0],
                                             [0, 0, 0, 0], [0, 0, 0, 0]], name="x1d1")
DILATION = VectorField.affine(np.zeros(4), np.eye(4), name="dilation")


def spf(X, fb=None, name=""):
    return SpecialPhaseFunction(X, fb or ScalarField.zero(), name=name or X.name)


# -- Lie derivatives ----------------------------------------------------------


def test_lie_metric_isometries(mk):
    x = np.array([0.4, -0.2, 0.9, 1.3])
    assert np.abs(lie_metric(mk.model, TRANSLATION_X, x)).max() == 0.0
    assert np.abs(lie_metric(mk.model, ROTATION_Z, x)).max() == 0.0
    assert np.abs(lie_metric(mk.model, BOOST_X, x)).max() == 0.0


def test_lie_metric_stretch(mk):
    lg = lie_metric(mk.model, STRETCH_X, np.array([0.4, -0.2, 0.9, 1.3]))
    expect = np.zeros((4, 4))
    expect[1, 1] = 2.0
    assert np.abs(lg - expect).max() == 0.0


def test_lie_em(mk, rn):
    x = np.array([0.1, 4.0, 1.2, 0.7])
    assert np.abs(lie_em(mk.model, STRETCH_X, np.zeros(4))).max() == 0.0   # F = 0
    time_tr = VectorField.affine([1.0, 0, 0, 0])
    assert np.abs(lie_em(rn.model, time_tr, x)).max() < 1e-15              # static field
    radial = VectorField.affine(np.zeros(4), np.diag([0.0, 1.0, 0.0, 0.0]))
    assert np.abs(lie_em(rn.model, radial, x)).max() > 1e-3


def test_lie_connection(mk, rn, rng):
    x = np.array([0.2, -0.3, 0.5, 0.9])
    assert np.abs(lie_connection(mk.model, TRANSLATION_X, x)).max() == 0.0
    # naturality: Killing fields preserve the metric connection
    for _ in range(5):
        xr = rn.sample_event(rng)
        for s in rn.killing:
            assert np.abs(lie_connection(rn.model, s.X, xr)).max() < 1e-9
    assert np.abs(lie_connection(rn.model, DILATION, rn.sample_event(rng))).max() > 1e-3


def test_lie_connection_needs_derivatives(mk):
    bare = VectorField(lambda x: np.array([0.0, x[0], 0.0, 0.0]))
    with pytest.raises(MissingDerivatives):
        lie_connection(mk.model, bare, np.zeros(4))


def test_is_killing(mk, rn, rng):
    probes = [mk.sample_event(rng) for _ in range(10)]
    ok, res = is_killing(mk.model, BOOST_X, probes)
    assert ok and res < 1e-12
    ok, res = is_killing(mk.model, DILATION, probes)
    assert not ok and abs(res - 2.0) < 1e-12
    rn_probes = [rn.sample_event(rng) for _ in range(10)]
    ok, res = is_killing(rn.model, rn.killing[3].X, rn_probes)   # axial rotation
    assert ok and res < 1e-12
    with pytest.raises(ValueError):
        is_killing(mk.model, BOOST_X, [])


# -- holonomic lift -----------------------------------------------------------


def test_holonomic_lift_translation(mk):
    p = phase_point(mk.model, ORIGIN, [0.2, 0.1, 0.0])
    assert np.abs(holonomic_lift(mk.model, TRANSLATION_X, p)
                  - np.array([0, 1, 0, 0, 0, 0, 0.0])).max() == 0.0


def test_holonomic_lift_boost_part(mk):
    X = VectorField.affine(np.zeros(4), [[0, 0, 0, 0], [1, 0, 0, 0],
                                         [0, 0, 0, 0], [0, 0, 0, 0]])   # x^0 d_1
    p = phase_point(mk.model, ORIGIN, [0, 0, 0])
    lift = holonomic_lift(mk.model, X, p)
    assert abs(lift[4] - 1.0) < 1e-15
    assert np.abs(lift[[0, 1, 2, 3, 5, 6]]).max() == 0.0


def flow_prolongation_oracle(model, X, p, eps=1e-5):
    """Jet lift by finite differences of the prolonged flow of X."""
    def flow(q, s):
        # one Euler-rich step of the spacetime flow, exact enough at O(eps^3)
        x1 = q.x + s * X(q.x) + 0.5 * s**2 * (X.jac(q.x).T @ X(q.x))
        A = np.eye(4) + s * X.jac(q.x).T + 0.5 * s**2 * (X.jac(x1).T @ X.jac(q.x).T)
        du = np.concatenate([[1.0], q.v])
        den = float(A[0] @ du)
        return np.concatenate([x1, (A[1:] @ du) / den])

    return (flow(p, eps) - flow(p, -eps)) / (2 * eps)


def test_holonomic_lift_rotation_vs_flow(mk):
    p = phase_point(mk.model, ORIGIN, [0.5, 0.0, 0.0])
    lift = holonomic_lift(mk.model, ROTATION_Z, p)
    oracle = flow_prolongation_oracle(mk.model, ROTATION_Z, p)
    assert np.abs(lift - oracle).max() < 1e-9
    # velocity components rotate: d/ds of (v rotated) at v = (0.5, 0, 0)
    assert abs(lift[5] - 0.5) < 1e-12


def test_holonomic_lift_bracket_compatibility(mk, rn, rng):
    # [X_(1), Y_(1)] = ([X, Y])_(1) with the commutator taken by finite differences
    for cm in (mk, rn):
        p = cm.sample_point(rng)
        X, Y = cm.killing[1].X, cm.killing[2].X
        h = 1e-6
        z0 = p.seven()
        jx = np.zeros((7, 7))
        jy = np.zeros((7, 7))
        for A in range(7):
            zp, zm = z0.copy(), z0.copy()
            zp[A] += h
            zm[A] -= h
            pp, pm = phase_point(cm.model, zp[:4], zp[4:]), phase_point(cm.model, zm[:4], zm[4:])
            jx[A] = (holonomic_lift(cm.model, X, pp) - holonomic_lift(cm.model, X, pm)) / (2 * h)
            jy[A] = (holonomic_lift(cm.model, Y, pp) - holonomic_lift(cm.model, Y, pm)) / (2 * h)
        comm_fd = holonomic_lift(cm.model, X, p) @ jy - holonomic_lift(cm.model, Y, p) @ jx
        comm_lift = holonomic_lift(cm.model, commutator(X, Y), p)
        assert np.abs(comm_fd - comm_lift).max() < 1e-6


# -- special phase functions --------------------------------------------------


def test_special_eval_values(mk):
    k = mk.model.constants
    p = phase_point(mk.model, ORIGIN, [0, 0, 0])
    time_tr = VectorField.affine([1.0, 0, 0, 0])
    assert abs(special_eval(mk.model, spf(time_tr), p) - k.m * k.c / k.hbar) < 1e-15
    assert special_eval(mk.model, spf(VectorField.affine(np.zeros(4)),
                                      ScalarField.constant(7.0)), p) == 7.0
    assert special_eval(mk.model, spf(TRANSLATION_X), p) == 0.0


def test_special_eval_display_form(mk, rn, rng):
    # value built from the velocity-contracted rescaled metric matches tau_hat(X) + f_breve
    for cm in (mk, rn):
        k = cm.model.constants
        for _ in range(10):
            p = cm.sample_point(rng)
            for s in cm.killing:
                du = np.concatenate([[1.0], p.v])
                gh = float(du @ cm.model.g(p.x) @ du)
                a0 = (-gh) ** -0.5
                gtick = (k.m / k.hbar) * (du @ cm.model.g(p.x))
                display = -k.c * a0 * float(gtick @ s.X(p.x)) + s.f_breve(p.x)
                assert abs(special_eval(cm.model, s, p) - display) < 1e-12


def test_special_gradient_fd(mk, rn, rng):
    for cm in (mk, rn):
        for _ in range(5):
            p = cm.sample_point(rng, vmax_frac=0.7)
            for s in cm.killing:
                fd = seven_gradient_fd(lambda q: special_eval(cm.model, s, q), p)
                assert np.abs(fd - special_gradient(cm.model, s, p)).max() < 1e-6


def test_lift_vertical_for_scalar(mk, rng):
    fb = ScalarField.affine(0.5, [0.0, 2.0, -1.0, 0.3])
    s = spf(VectorField.affine(np.zeros(4)), fb)
    p = mk.sample_point(rng)
    lift = special_hamiltonian_lift(mk.model, s, p)
    assert np.abs(lift[:4]).max() == 0.0
    assert np.abs(lift[4:]).max() > 0.0


def test_lift_translation(mk):
    p = phase_point(mk.model, ORIGIN, [0.3, -0.2, 0.1])
    lift = special_hamiltonian_lift(mk.model, spf(TRANSLATION_X), p)
    assert np.abs(lift - np.array([0, 1, 0, 0, 0, 0, 0.0])).max() < 1e-14


def test_lift_equals_jet_lift_for_conserved(mk, rn, rng):
    for cm in (mk, rn):
        for _ in range(10):
            p = cm.sample_point(rng)
            for s in cm.killing:
                assert np.abs(special_hamiltonian_lift(cm.model, s, p)
                              - holonomic_lift(cm.model, s.X, p)).max() < 1e-9


def test_lift_negative_control(mk, rng):
    p = mk.sample_point(rng)
    s = spf(STRETCH_X)
    assert np.abs(special_hamiltonian_lift(mk.model, s, p)
                  - holonomic_lift(mk.model, s.X, p)).max() > 1e-3


# -- special bracket ----------------------------------------------------------


def test_bracket_translations(mk):
    out = special_bracket(mk.model, spf(TRANSLATION_X), spf(VectorField.affine([0, 0, 1, 0])))
    x = np.array([0.3, 1.0, -2.0, 0.5])
    assert np.abs(out.X(x)).max() == 0.0
    assert out.f_breve(x) == 0.0


def test_bracket_translation_rotation(mk):
    out = special_bracket(mk.model, spf(TRANSLATION_X), spf(ROTATION_Z))
    x = np.array([0.3, 1.0, -2.0, 0.5])
    assert np.abs(out.X(x) - np.array([0, 0, 1, 0])).max() == 0.0   # [d_1, rot_z] = d_2


def test_bracket_rn_time_rotation(rn):
    time_tr = rn.killing[0]
    rot_phi = rn.killing[3]
    out = special_bracket(rn.model, time_tr, rot_phi)
    x = np.array([0.0, 5.0, 1.2, 0.7])
    assert np.abs(out.X(x)).max() == 0.0
    # scalar part X.h - X'.f + fhat(X, X'); the field has no angular leg
    assert abs(out.f_breve(x)) < 1e-15


def test_bracket_value_matches_jacobi_route(mk, rn, rng):
    for cm in (mk, rn):
        for _ in range(4):
            p = cm.sample_point(rng)
            ks = cm.killing
            for i in range(len(ks)):
                for j in range(i + 1, len(ks)):
                    structural = special_eval(cm.model, special_bracket(cm.model, ks[i], ks[j]), p)
                    jac = bracket_value_jacobi(cm.model, ks[i], ks[j], p)
                    assert abs(structural - jac) < 1e-8


def test_bracket_closure_of_conserved(mk, rn, rng):
    for cm in (mk, rn):
        p = cm.sample_point(rng)
        ks = cm.killing
        for i in range(len(ks)):
            for j in range(i + 1, len(ks)):
                out = special_bracket(cm.model, ks[i], ks[j])
                gd, crit = conservation_residual(cm.model, out, p)
                assert abs(gd) < 1e-8 and abs(crit) < 1e-8


def test_em_bracket_law(rn, rng):
    # d(scalar part) = [X, X'] . fhat when both inputs satisfy d f_breve = X . fhat
    ks = rn.killing
    for _ in range(5):
        x = rn.sample_event(rng)
        for i in range(len(ks)):
            for j in range(i + 1, len(ks)):
                out = special_bracket(rn.model, ks[i], ks[j])
                lhs = out.f_breve.grad(x)
                rhs = out.X(x) @ rn.model.fhat(x)
                assert np.abs(lhs - rhs).max() < 1e-8


def test_jacobi_identity(mk, rng):
    # cyclic sum over a mixed triple of the flat algebra
    trip = (spf(TRANSLATION_X), spf(ROTATION_Z), spf(BOOST_X))
    p = mk.sample_point(rng)

    def nested(a, b, c):
        return special_eval(mk.model, special_bracket(mk.model, a, special_bracket(mk.model, b, c)), p)

    total = nested(*trip) + nested(trip[1], trip[2], trip[0]) + nested(trip[2], trip[0], trip[1])
    assert abs(total) < 1e-7


def test_bracket_antisymmetry(mk, rng):
    p = mk.sample_point(rng)
    a, b = spf(ROTATION_Z), spf(BOOST_X)
    ab = special_eval(mk.model, special_bracket(mk.model, a, b), p)
    ba = special_eval(mk.model, special_bracket(mk.model, b, a), p)
    assert abs(ab + ba) < 1e-14


# -- conservation and self-holonomy -------------------------------------------


def test_conserved_killing_flat(mk, rng):
    for X in (TRANSLATION_X, ROTATION_Z, BOOST_X):
        p = mk.sample_point(rng)
        gd, crit = conservation_residual(mk.model, spf(X), p)
        assert abs(gd) < 1e-14 and abs(gd - crit) < 1e-10


def test_conserved_constant_scalar(mk, rng):
    s = spf(VectorField.affine(np.zeros(4)), ScalarField.constant(3.5))
    p = mk.sample_point(rng)
    gd, _ = conservation_residual(mk.model, s, p)
    assert gd == 0.0


def test_nonconserved_stretch_value(mk):
    # flow derivative equals -(1/2)(L_X G)(d, d) = -(m/hbar)(c alpha0 v1)^2 here
    k = mk.model.constants
    p = phase_point(mk.model, ORIGIN, [0.5, 0.0, 0.0])
    gd, crit = conservation_residual(mk.model, spf(STRETCH_X), p)
    a0sq = 1.0 / 0.75
    expect = -(k.m / k.hbar) * k.c**2 * a0sq * 0.25
    assert abs(gd - expect) < 1e-12
    assert abs(gd - crit) < 1e-12


def test_self_holonomy(mk, rn, rng):
    for _ in range(5):
        p = mk.sample_point(rng)
        for s in mk.killing:
            assert self_holonomy_residual(mk.model, s, p) < 1e-10
    for _ in range(5):
        p = rn.sample_point(rng)
        for s in rn.killing:
            assert self_holonomy_residual(rn.model, s, p) < 1e-8
    p = mk.sample_point(rng)
    assert self_holonomy_residual(mk.model, spf(STRETCH_X), p) > 1e-3


def test_rn_energy_pair_is_conserved(rn, rng):
    # the time translation needs the matched Coulomb scalar; a flipped sign fails
    time_tr = rn.killing[0]
    assert time_tr.name == "time"
    p = rn.sample_point(rng)
    gd, _ = conservation_residual(rn.model, time_tr, p)
    assert abs(gd) < 1e-14
    # radially moving probe so the scalar term is exercised
    p = phase_point(rn.model, [0.0, 5.0, 1.3, 0.2], [0.3, 0.0, 0.0])
    flipped = SpecialPhaseFunction(
        time_tr.X,
        ScalarField(lambda x: -time_tr.f_breve(x), lambda x: -time_tr.f_breve.grad(x)))
    gd_bad, _ = conservation_residual(rn.model, flipped, p)
    assert abs(gd_bad) > 1e-4
    assert abs(conservation_residual(rn.model, time_tr, p)[0]) < 1e-14


# -- flow-transport and connection batteries ----------------------------------


def test_time_form_symmetry_flow_battery(mk, rn, rng):
    for cm in (mk, rn):
        p = cm.sample_point(rng, vmax_frac=0.6)
        for s in cm.killing:
            assert np.abs(lie_tau_hat_flow(cm.model, s.X, p)).max() < 1e-5
        assert np.abs(lie_tau_hat_flow(cm.model, DILATION, p)).max() > 1e-2


def test_connection_symmetry_battery(mk, rn, rng):
    for cm in (mk, rn):
        for _ in range(3):
            p = cm.sample_point(rng)
            for s in cm.killing:
                direct = lie_phase_connection_grav(cm.model, s.X, p)
                display = lie_phase_connection_display(cm.model, s.X, p)
                assert np.abs(direct - display).max() < 1e-9
                assert np.abs(direct).max() < 1e-9


def test_vector_field_jacobians_consistent(mk, rn, rng):
    # analytic first derivatives of catalog fields agree with finite differences
    from jetphase.fields import _fd_jacobian

    for cm in (mk, rn):
        for _ in range(5):
            x = cm.sample_event(rng)
            for s in cm.killing:
                fd = _fd_jacobian(s.X, x)
                assert np.abs(fd - s.X.jac(x)).max() < 1e-6
                fd2 = _fd_jacobian(s.X.jac, x)
                assert np.abs(fd2 - s.X.hess(x)).max() < 1e-5


def test_lift_matches_two_vector_route(mk, rn, rng):
    # lift = Lambda-contraction of df plus tau_hat(X) times the Reeb field
    from jetphase import reeb, tau_hat, two_vector

    for cm in (mk, rn):
        for _ in range(5):
            p = cm.sample_point(rng)
            lam = two_vector(cm.model, p)
            _, gh = reeb(cm.model, p)
            th = tau_hat(cm.model, p)
            for s in cm.killing:
                df = special_gradient(cm.model, s, p)
                alt = df @ lam + float(th[:4] @ s.X(p.x)) * gh
                lift = special_hamiltonian_lift(cm.model, s, p)
                assert np.abs(lift - alt).max() < 1e-9
