"""FastAPI service wrapping the experiment pipelines and acceptance suite."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import ConfigError, PlateauError
from ..experiments.acceptance import run_acceptance
from ..experiments.config import ExperimentConfig, KINDS
from ..experiments.pipelines import run
from .schemas import (
    AcceptanceRequest,
    AcceptanceResponse,
    CheckLineModel,
    CriterionModel,
    ExperimentRequest,
    ExperimentResponse,
    HealthResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="plateau-lab", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/experiments/run", response_model=ExperimentResponse)
    def run_experiment(request: ExperimentRequest) -> ExperimentResponse:
        if request.kind not in KINDS:
            raise HTTPException(status_code=422, detail=f"unknown kind {request.kind!r}")
        config = ExperimentConfig(
            kind=request.kind,
            seed=request.seed,
            group=request.group,
            params=request.params,
            threads=request.threads,
            quadrature_order=request.quadrature_order,
        )
        try:
            table = run(config)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except PlateauError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return ExperimentResponse(
            provenance=table.provenance,
            summary=table.summary,
            aggregates=table.aggregates(),
            columns=table.columns,
            csv=table.to_csv(),
        )

    @app.post("/acceptance", response_model=AcceptanceResponse)
    def acceptance(request: AcceptanceRequest) -> AcceptanceResponse:
        try:
            report = run_acceptance(request.config_dir, request.criteria)
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        results = [
            CriterionModel(
                number=r.number,
                name=r.name,
                passed=r.passed,
                runtime=r.runtime,
                notes=r.notes,
                lines=[
                    CheckLineModel(name=l.name, measured=l.measured, expected=l.expected, passed=l.passed)
                    for l in r.lines
                ],
            )
            for r in report.results
        ]
        return AcceptanceResponse(passed=report.passed, results=results, text=report.format())

    return app
