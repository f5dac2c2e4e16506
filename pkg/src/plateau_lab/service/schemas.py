"""Pydantic request/response models for the experiment service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field

from ..experiments.config import KINDS


class ExperimentRequest(BaseModel):
    kind: str = Field(description=f"one of {KINDS}")
    seed: int
    group: dict[str, Any] = Field(default_factory=dict)
    params: dict[str, Any] = Field(default_factory=dict)
    threads: int = 1
    quadrature_order: int = 8


class ExperimentResponse(BaseModel):
    provenance: dict[str, Any]
    summary: dict[str, Any]
    aggregates: dict[str, Any]
    columns: dict[str, list]
    csv: str


class CheckLineModel(BaseModel):
    name: str
    measured: Any
    expected: str
    passed: Optional[bool]


class CriterionModel(BaseModel):
    number: int
    name: str
    passed: bool
    runtime: float
    notes: str = ""
    lines: list[CheckLineModel]


class AcceptanceRequest(BaseModel):
    criteria: Optional[list[int]] = None
    config_dir: Optional[str] = None


class AcceptanceResponse(BaseModel):
    passed: bool
    results: list[CriterionModel]
    text: str


class HealthResponse(BaseModel):
    status: str
    version: str
