"""Run configuration: a single JSON document validated by pydantic models.

Inline symmetry fields are degree-one polynomial coefficient tables per
component, which covers every flat-chart isometry; curved-chart generators
are referenced by their catalog names.
"""

from __future__ import annotations

import json
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .catalog import CatalogModel, by_name
from .errors import ConfigError
from .fields import Constants
from .symmetry import ScalarField, SpecialPhaseFunction, VectorField

DEFAULT_TOLERANCES: Dict[str, float] = {
    "duality": 1e-9,
    "closure": 1e-6,
    "nondegeneracy": 1e-6,
    "contact": 1e-6,
    "killing": 1e-8,
    "lie_em": 1e-8,
    "self_holonomy": 1e-8,
    "conservation": 1e-8,
    "bracket": 1e-8,
    "bracket_homomorphism": 1e-6,
    "momentum_generator": 1e-8,
    "equivariance": 1e-8,
    "drift": 1e-6,
}


class ConstantsConfig(BaseModel):
    m: float = 1.0
    q: float = 0.0
    c: float = 1.0
    hbar: float = 1.0

    @model_validator(mode="after")
    def _positive(self):
        if self.m <= 0 or self.c <= 0 or self.hbar <= 0:
            raise ValueError("m, c, hbar must be strictly positive")
        return self


class SpacetimeConfig(BaseModel):
    name: Literal["minkowski", "reissner_nordstrom", "schwarzschild"] = "minkowski"
    k_s: float = 1.0
    k_q: float = 0.0
    q0: float = 0.0
    include_potential: bool = True


class InitialPoint(BaseModel):
    x: List[float] = Field(min_length=4, max_length=4)
    v: List[float] = Field(min_length=3, max_length=3)


class IntegratorConfig(BaseModel):
    method: Literal["rk4-fixed", "rkf45-adaptive"] = "rk4-fixed"
    step: float = 1e-3
    atol: float = 1e-10
    rtol: float = 1e-10
    max_steps: int = 2_000_000
    event_margin: float = 1e-9

    @model_validator(mode="after")
    def _positive(self):
        if self.step <= 0 or self.atol <= 0 or self.rtol <= 0 or self.max_steps <= 0:
            raise ValueError("integrator steps and tolerances must be positive")
        if self.event_margin <= 0:
            raise ValueError("event margin must be positive")
        return self


class PolyVector(BaseModel):
    """``X^lam(x) = const[lam] + linear[lam][mu] x^mu``."""

    const: List[float] = Field(default_factory=lambda: [0.0] * 4, min_length=4, max_length=4)
    linear: Optional[List[List[float]]] = None

    @field_validator("linear")
    @classmethod
    def _square(cls, v):
        if v is not None and (len(v) != 4 or any(len(row) != 4 for row in v)):
            raise ValueError("linear part must be a 4x4 table")
        return v


class PolyScalar(BaseModel):
    const: float = 0.0
    linear: List[float] = Field(default_factory=lambda: [0.0] * 4, min_length=4, max_length=4)


class SymmetryEntry(BaseModel):
    name: Optional[str] = None
    X: Optional[PolyVector] = None
    f_breve: Optional[PolyScalar] = None

    @model_validator(mode="after")
    def _name_or_table(self):
        if (self.name is None) == (self.X is None):
            raise ValueError("give either a catalog name or an inline coefficient table")
        return self


class RunConfig(BaseModel):
    spacetime: SpacetimeConfig = SpacetimeConfig()
    constants: ConstantsConfig = ConstantsConfig()
    initial_points: List[InitialPoint] = Field(default_factory=list)
    x0_range: Tuple[float, float] = (0.0, 10.0)
    integrator: IntegratorConfig = IntegratorConfig()
    symmetries: List[SymmetryEntry] = Field(default_factory=list)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    seed: int = 0
    probes: int = 50

    @model_validator(mode="after")
    def _checks(self):
        if not self.x0_range[1] > self.x0_range[0]:
            raise ValueError("x0_range must be increasing")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        if self.probes <= 0:
            raise ValueError("probes must be positive")
        return self

    def tolerance(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


def load_config(path: str) -> RunConfig:
    """Parse and validate a JSON config file; raises ConfigError with diagnostics."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = ".".join(str(part) for part in err["loc"]) or "<root>"
            lines.append(f"{loc}: {err['msg']}")
        raise ConfigError("config validation failed: " + "; ".join(lines)) from exc


def resolve_model(cfg: RunConfig) -> CatalogModel:
    constants = Constants(**cfg.constants.model_dump())
    name = cfg.spacetime.name
    try:
        if name == "minkowski":
            return by_name(name, constants)
        if name == "schwarzschild":
            return by_name(name, constants, k_s=cfg.spacetime.k_s)
        return by_name(name, constants, k_s=cfg.spacetime.k_s,
                       k_q=cfg.spacetime.k_q, q0=cfg.spacetime.q0,
                       include_potential=cfg.spacetime.include_potential)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_symmetries(cfg: RunConfig, cm: CatalogModel) -> List[SpecialPhaseFunction]:
    """Named catalog generators plus inline polynomial fields; default is the full basis."""
    if not cfg.symmetries:
        return list(cm.killing)
    byname = {spf.name: spf for spf in cm.killing}
    out: List[SpecialPhaseFunction] = []
    for k, entry in enumerate(cfg.symmetries):
        if entry.name is not None:
            if entry.name not in byname:
                raise ConfigError(f"symmetry {entry.name!r} not in catalog model {cm.name!r} "
                                  f"(known: {sorted(byname)})")
            out.append(byname[entry.name])
            continue
        X = VectorField.affine(np.asarray(entry.X.const),
                               None if entry.X.linear is None else np.asarray(entry.X.linear),
                               name=f"inline_{k}")
        fb = ScalarField.zero() if entry.f_breve is None else \
            ScalarField.affine(entry.f_breve.const, np.asarray(entry.f_breve.linear))
        out.append(SpecialPhaseFunction(X, fb, name=f"inline_{k}"))
    return out
