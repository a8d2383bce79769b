"""HTTP service wrapping the alignment core for long-running, multi-client use."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..alignment import pairwise_cost, udtw_evaluate
from ..barycenter import FrechetConfig, frechet_mean
from ..tasks.classify import knn_classify
from ..tasks.coding import Dictionary, lcsa_code
from ..types import CostMatrix, GibbsParams, LabeledSet, Sequence, VarianceField
from .schemas import (
    BarycenterRequest,
    BarycenterResponse,
    DistanceRequest,
    DistanceResponse,
    HealthResponse,
    KnnRequest,
    KnnResponse,
    LcsaRequest,
    LcsaResponse,
    SequencePayload,
)


def _sequence(payload: SequencePayload) -> Sequence:
    return Sequence(np.asarray(payload.values), name=payload.name)


def create_app() -> FastAPI:
    app = FastAPI(title="udtw", version=__version__)

    @app.exception_handler(ValueError)
    async def value_error_handler(_request, exc: ValueError):
        raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(name="udtw", version=__version__)

    @app.post("/align/distance", response_model=DistanceResponse)
    def distance(req: DistanceRequest) -> DistanceResponse:
        p = GibbsParams(gamma=req.gamma, beta=req.beta)
        if req.cost_matrix is not None:
            C = CostMatrix(np.asarray(req.cost_matrix))
            if req.variance_matrix is not None:
                S = VarianceField(np.asarray(req.variance_matrix))
            else:
                S = VarianceField.unit(C.shape)
        else:
            if req.a is None or req.b is None:
                raise ValueError("provide both sequences or a cost matrix")
            C = pairwise_cost(_sequence(req.a), _sequence(req.b))
            if req.variance_matrix is not None:
                S = VarianceField(np.asarray(req.variance_matrix))
            else:
                S = VarianceField.unit(C.shape)
        out = udtw_evaluate(C, S, p)
        return DistanceResponse(
            dist=out.dist,
            omega=out.omega,
            softmin_value=out.softmin_value,
            score=out.score(req.beta),
            coupling=out.coupling.tolist() if req.include_coupling else None,
        )

    @app.post("/barycenter", response_model=BarycenterResponse)
    def barycenter(req: BarycenterRequest) -> BarycenterResponse:
        cfg = FrechetConfig(
            gibbs=GibbsParams(gamma=req.gamma, beta=req.beta),
            target_length=req.target_length,
            max_iters=req.max_iters,
            variance_mode=req.variance_mode,
        )
        result = frechet_mean([_sequence(s) for s in req.sequences], cfg)
        return BarycenterResponse(
            mean=result.mean.values.tolist(),
            trace=result.trace.tolist(),
            variances=None if result.variances is None else result.variances.tolist(),
            line_search_warning=result.line_search_warning,
            iterations=result.iterations,
        )

    @app.post("/classify/knn", response_model=KnnResponse)
    def classify_knn(req: KnnRequest) -> KnnResponse:
        train = LabeledSet([(_sequence(item), item.label) for item in req.train])
        p = GibbsParams(gamma=req.gamma, beta=req.beta)
        labels = [
            knn_classify(train, _sequence(q), req.k, p, beta=req.beta)
            for q in req.queries
        ]
        return KnnResponse(labels=labels)

    @app.post("/coding/lcsa", response_model=LcsaResponse)
    def coding_lcsa(req: LcsaRequest) -> LcsaResponse:
        dictionary = Dictionary(
            atoms=[_sequence(a) for a in req.atoms],
            k_nearest=req.k_nearest,
            gamma_prime=req.gamma_prime,
        )
        p = GibbsParams(gamma=req.gamma)
        alpha = lcsa_code(_sequence(req.sequence), dictionary, p)
        return LcsaResponse(coefficients=alpha.tolist())

    return app


app = create_app()
