"""Structure audit: every identity of the phase geometry as a runnable residual.

The report is a plain dict (JSON-ready) with one section per identity family
and a PASS/FAIL verdict per configured tolerance.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List

import numpy as np

from .catalog import CatalogModel
from .config import RunConfig, resolve_symmetries
from .dynamics import duality_residuals, omega, potential_theta
from .errors import MissingPotential
from .momentum import equivariance_residual, momentum_generator_residual
from .phase import PhasePoint, tau_hat
from .symmetry import (SpecialPhaseFunction, bracket_value_jacobi,
                       conservation_residual, is_killing, lie_em,
                       self_holonomy_residual, special_bracket,
                       special_eval, special_hamiltonian_lift)


def exterior_derivative_fd(form_fn, p: PhasePoint, h: float = 5e-5, refine: bool = True) -> np.ndarray:
    """Finite-difference exterior derivative of a 7x7 2-form, shape (7,7,7).

    Central differences with one step of Richardson extrapolation by default;
    the fourth-order estimate keeps the residual floor well below 1e-6 even
    where the form has large higher velocity derivatives (near the cone).
    """

    def central(step):
        z0 = p.seven()
        dOm = np.zeros((7, 7, 7))
        for A in range(7):
            zp = z0.copy()
            zm = z0.copy()
            zp[A] += step
            zm[A] -= step
            dOm[A] = (form_fn(PhasePoint.from_seven(zp))
                      - form_fn(PhasePoint.from_seven(zm))) / (2 * step)
        return dOm

    d = (4.0 * central(h / 2) - central(h)) / 3.0 if refine else central(h)
    return d + d.transpose(1, 2, 0) + d.transpose(2, 0, 1)


def closure_residual(model, p: PhasePoint, h: float = 5e-5) -> float:
    """Max cyclic-sum component of the finite-difference d(Omega)."""
    return float(np.max(np.abs(exterior_derivative_fd(lambda q: omega(model, q), p, h))))


def covector_curl_fd(cov_fn, p: PhasePoint, h: float = 5e-5, refine: bool = True) -> np.ndarray:
    """Finite-difference exterior derivative of a 7-covector field.

    Richardson-refined central differences by default, matching
    :func:`exterior_derivative_fd`.
    """

    def central(step):
        z0 = p.seven()
        d = np.zeros((7, 7))
        for A in range(7):
            zp = z0.copy()
            zm = z0.copy()
            zp[A] += step
            zm[A] -= step
            d[A, :] = (cov_fn(PhasePoint.from_seven(zp))
                       - cov_fn(PhasePoint.from_seven(zm))) / (2 * step)
        return d - d.T

    return (4.0 * central(h / 2) - central(h)) / 3.0 if refine else central(h)


def contact_residual(model, p: PhasePoint) -> float:
    """``max |Omega - d(-tau_hat)|`` by finite differences (field-free pairing)."""
    dth = covector_curl_fd(lambda q: -tau_hat(model, q), p)
    return float(np.max(np.abs(omega(model, p) - dth)))


def potential_residual(model, p: PhasePoint) -> float:
    """``max |Omega - d Theta|`` with the full potential 1-form."""
    dth = covector_curl_fd(lambda q: potential_theta(model, q), p)
    return float(np.max(np.abs(omega(model, p) - dth)))


def nondegeneracy_coefficient(model, p: PhasePoint) -> float:
    """Pfaffian of the bordered pair matrix; nonzero iff the volume coefficient is.

    Uses ``sqrt |det [[0, w], [-w, Omega]]|`` with ``w = -tau_hat``.
    """
    w = -tau_hat(model, p)
    B = np.zeros((8, 8))
    B[0, 1:] = w
    B[1:, 0] = -w
    B[1:, 1:] = omega(model, p)
    return float(np.sqrt(abs(np.linalg.det(B))))


def bracket_agreement_residual(model, f: SpecialPhaseFunction, h: SpecialPhaseFunction,
                               p: PhasePoint) -> float:
    """Structural bracket value vs the 2-vector/flow route at one point."""
    structural = special_eval(model, special_bracket(model, f, h), p)
    return abs(structural - bracket_value_jacobi(model, f, h, p))


def lift_commutator_fd(model, f: SpecialPhaseFunction, h_: SpecialPhaseFunction,
                       p: PhasePoint, step: float = 1e-5) -> np.ndarray:
    """Finite-difference commutator of the two Hamiltonian-type lifts."""

    def Yf(q):
        return special_hamiltonian_lift(model, f, q)

    def Yh(q):
        return special_hamiltonian_lift(model, h_, q)

    z0 = p.seven()
    jf = np.zeros((7, 7))
    jh = np.zeros((7, 7))
    for A in range(7):
        zp = z0.copy()
        zm = z0.copy()
        zp[A] += step
        zm[A] -= step
        jf[A] = (Yf(PhasePoint.from_seven(zp)) - Yf(PhasePoint.from_seven(zm))) / (2 * step)
        jh[A] = (Yh(PhasePoint.from_seven(zp)) - Yh(PhasePoint.from_seven(zm))) / (2 * step)
    q0 = PhasePoint.from_seven(z0)
    return Yf(q0) @ jh - Yh(q0) @ jf


def homomorphism_residual(model, f: SpecialPhaseFunction, h: SpecialPhaseFunction,
                          p: PhasePoint) -> float:
    """``max |lift(bracket(f,h)) - [lift f, lift h]|`` with the commutator by FD."""
    lifted = special_hamiltonian_lift(model, special_bracket(model, f, h), p)
    comm = lift_commutator_fd(model, f, h, p)
    return float(np.max(np.abs(lifted - comm)))


def run_audit(cfg: RunConfig, cm: CatalogModel) -> dict:
    """Full structure audit of a catalog model under a run configuration."""
    rng = np.random.default_rng(cfg.seed)
    model = cm.model
    n = cfg.probes
    points = cm.sample_points(rng, n)
    events = [p.x for p in points]
    symmetries = resolve_symmetries(cfg, cm)

    report: Dict[str, object] = {"model": cm.name, "probes": n, "seed": cfg.seed}
    failures: List[str] = []

    def section(name, value, tol_name, extra=None):
        tol = cfg.tolerance(tol_name)
        ok = bool(value < tol)
        entry = {"residual": value, "tolerance": tol, "pass": ok}
        if extra:
            entry.update(extra)
        report[name] = entry
        if not ok:
            failures.append(name)
        return entry

    dual = [duality_residuals(model, p) for p in points]
    section("duality", max(d.max() for d in dual), "duality",
            {"r1": max(d.r1 for d in dual), "r2": max(d.r2 for d in dual),
             "r3": max(d.r3 for d in dual), "r4": max(d.r4 for d in dual),
             "per_probe": [[d.r1, d.r2, d.r3, d.r4] for d in dual]})

    sub = points[: min(6, len(points))]
    section("closure", max(closure_residual(model, p) for p in sub), "closure")

    pf = min(nondegeneracy_coefficient(model, p) for p in points)
    tol = cfg.tolerance("nondegeneracy")
    report["nondegeneracy"] = {"min_coefficient": pf, "tolerance": tol, "pass": bool(pf > tol)}
    if pf <= tol:
        failures.append("nondegeneracy")

    if not model.has_em:
        section("contact", max(contact_residual(model, p) for p in sub), "contact")

    killing_rows = []
    kill_tol = cfg.tolerance("killing")
    for spf in symmetries:
        ok, res = is_killing(model, spf.X, events, tol=kill_tol)
        em_res = max(float(np.max(np.abs(lie_em(model, spf.X, x)))) for x in events)
        row_ok = ok and em_res < cfg.tolerance("lie_em")
        killing_rows.append({"name": spf.name, "metric_residual": res,
                             "em_residual": em_res, "pass": bool(row_ok)})
        if not row_ok:
            failures.append(f"killing:{spf.name}")
    report["killing"] = {"tolerance": kill_tol, "rows": killing_rows}

    halo_rows = []
    for spf in symmetries:
        vals = [self_holonomy_residual(model, spf, p) for p in points[: min(12, n)]]
        cons = [abs(conservation_residual(model, spf, p)[0]) for p in points[: min(12, n)]]
        ok = max(vals) < cfg.tolerance("self_holonomy") and max(cons) < cfg.tolerance("conservation")
        halo_rows.append({"name": spf.name, "self_holonomy": max(vals),
                          "flow_derivative": max(cons), "pass": bool(ok)})
        if not ok:
            failures.append(f"self_holonomy:{spf.name}")
    report["self_holonomy"] = {"tolerance": cfg.tolerance("self_holonomy"), "rows": halo_rows}

    conserved = [spf for spf, row in zip(symmetries, halo_rows) if row["pass"]]
    pair_rows = []
    for f, h in list(combinations(conserved, 2))[:8]:
        p = points[0]
        agree = bracket_agreement_residual(model, f, h, p)
        hom = homomorphism_residual(model, f, h, p)
        ok = agree < cfg.tolerance("bracket") and hom < cfg.tolerance("bracket_homomorphism")
        pair_rows.append({"pair": [f.name, h.name], "agreement": agree,
                          "homomorphism": hom, "pass": bool(ok)})
        if not ok:
            failures.append(f"bracket:{f.name},{h.name}")
    report["brackets"] = {"rows": pair_rows}

    mom: Dict[str, object] = {}
    try:
        gen = max(momentum_generator_residual(model, cm.algebra, p) for p in points[: min(12, n)])
        tol = cfg.tolerance("momentum_generator")
        mom["generator_residual"] = gen
        mom["tolerance"] = tol
        mom["pass"] = bool(gen < tol)
        if not mom["pass"]:
            failures.append("momentum")
        eq_rows = []
        for g in cm.algebra.group_elements:
            res = max(equivariance_residual(model, cm.algebra, g, p, events) for p in points[:6])
            ok = res < cfg.tolerance("equivariance")
            eq_rows.append({"element": g.name, "residual": res, "pass": bool(ok)})
            if not ok:
                failures.append(f"equivariance:{g.name}")
        mom["equivariance"] = eq_rows
    except MissingPotential as exc:
        mom["error"] = f"MissingPotential: {exc}"
    report["momentum"] = mom

    report["pass"] = not failures
    report["failures"] = failures
    return report
