"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class SequencePayload(BaseModel):
    values: list[list[float]] = Field(description="rows are feature dims, columns are timesteps")
    name: Optional[str] = None


class LabeledSequencePayload(SequencePayload):
    label: int


class DistanceRequest(BaseModel):
    a: Optional[SequencePayload] = None
    b: Optional[SequencePayload] = None
    cost_matrix: Optional[list[list[float]]] = None
    variance_matrix: Optional[list[list[float]]] = None
    gamma: float = Field(gt=0, default=1.0)
    beta: float = Field(ge=0, default=0.0)
    include_coupling: bool = False


class DistanceResponse(BaseModel):
    dist: float
    omega: float
    softmin_value: float
    score: float
    coupling: Optional[list[list[float]]] = None


class BarycenterRequest(BaseModel):
    sequences: list[SequencePayload]
    gamma: float = Field(gt=0, default=1.0)
    beta: float = Field(ge=0, default=0.0)
    variance_mode: str = "fixed_unit"
    target_length: Optional[int] = None
    max_iters: int = Field(ge=1, default=100)


class BarycenterResponse(BaseModel):
    mean: list[list[float]]
    trace: list[float]
    variances: Optional[list[float]] = None
    line_search_warning: bool
    iterations: int


class KnnRequest(BaseModel):
    train: list[LabeledSequencePayload]
    queries: list[SequencePayload]
    k: int = Field(ge=1, default=1)
    gamma: float = Field(gt=0, default=1.0)
    beta: float = Field(ge=0, default=0.0)


class KnnResponse(BaseModel):
    labels: list[int]


class LcsaRequest(BaseModel):
    sequence: SequencePayload
    atoms: list[SequencePayload]
    k_nearest: int = Field(ge=1, default=1)
    gamma_prime: float = Field(gt=0, default=0.7)
    gamma: float = Field(gt=0, default=1.0)


class LcsaResponse(BaseModel):
    coefficients: list[float]


class HealthResponse(BaseModel):
    name: str
    version: str
