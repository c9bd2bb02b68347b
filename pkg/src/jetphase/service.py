"""HTTP service exposing trajectory runs and structure audits.

The core package stays import-light; this module wires it behind two POST
endpoints with pydantic request/response models.  The CLI talks to this app
either in-process (ASGI transport) or over the network.
"""

from __future__ import annotations

from typing import Dict, List

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .audit import run_audit
from .config import parse_config, resolve_model
from .errors import ConfigError, JetPhaseError
from .runner import run_integrate, summarize

app = FastAPI(title="jetphase", version=__version__)


class TrajectoryPayload(BaseModel):
    name: str
    termination: str
    detail: str = ""
    samples: int
    drift: Dict[str, float]
    csv: str


class IntegrateResponse(BaseModel):
    status: str
    summary: dict
    trajectories: List[TrajectoryPayload]


class AuditResponse(BaseModel):
    status: str
    report: dict


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


def _build(config: dict):
    try:
        cfg = parse_config(config)
        cm = resolve_model(cfg)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail={"kind": "config", "message": str(exc)})
    return cfg, cm


@app.post("/integrate", response_model=IntegrateResponse)
def integrate_endpoint(config: dict) -> IntegrateResponse:
    cfg, cm = _build(config)
    try:
        results = run_integrate(cfg, cm)
    except JetPhaseError as exc:
        raise HTTPException(status_code=500, detail={"kind": "numeric", "message": str(exc)})
    payloads = [
        TrajectoryPayload(
            name=res.name,
            termination=res.trajectory.termination,
            detail=res.trajectory.detail,
            samples=len(res.trajectory),
            drift=res.drift,
            csv=res.to_csv(),
        )
        for res in results
    ]
    return IntegrateResponse(status="ok", summary=summarize(results, cfg), trajectories=payloads)


@app.post("/audit", response_model=AuditResponse)
def audit_endpoint(config: dict) -> AuditResponse:
    cfg, cm = _build(config)
    try:
        report = run_audit(cfg, cm)
    except JetPhaseError as exc:
        raise HTTPException(status_code=500, detail={"kind": "numeric", "message": str(exc)})
    return AuditResponse(status="ok" if report.get("pass") else "fail", report=report)
