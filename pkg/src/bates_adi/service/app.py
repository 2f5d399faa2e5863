"""FastAPI service exposing the pricing engine.

The heavy lifting (operator assembly, LU factorization, reference
solutions) lives in the core package; the service wraps it behind typed
endpoints so one long-running process can serve many pricing and
benchmark requests. Reference solutions are cached on disk between
requests.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import harness
from ..cases import CASES, load_case
from ..spectrum import jump_spectrum
from ..stability import verify_theorem
from .schemas import (
    CaseInfo,
    CasesResponse,
    EigenvaluesRequest,
    EigenvaluesResponse,
    ModelParams,
    PriceRequest,
    PriceResponse,
    StabilityRequest,
    StabilityResponse,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
)


def _case_info(name: str) -> CaseInfo:
    case = load_case(name)
    return CaseInfo(
        name=name,
        params=ModelParams.from_params(case.params),
        lambda_t=case.lambda_t,
        stiff_jump=case.stiff_jump,
        feller_violated=case.feller_violated,
    )


def create_app(cache_dir: Path | str | None = None) -> FastAPI:
    """Build the service; ``cache_dir`` overrides the reference cache."""
    app = FastAPI(title="bates-adi", version="0.1.0")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.get("/cases", response_model=CasesResponse)
    def cases() -> CasesResponse:
        return CasesResponse(cases=[_case_info(name) for name in CASES])

    @app.get("/cases/{name}", response_model=CaseInfo)
    def case_detail(name: str) -> CaseInfo:
        if name not in CASES:
            raise HTTPException(status_code=404, detail=f"unknown case {name!r}")
        return _case_info(name)

    @app.post("/price", response_model=PriceResponse)
    def price(request: PriceRequest) -> PriceResponse:
        case = request.to_case_config(request.grid)
        try:
            values = harness.price(
                case, request.scheme.as_tuple(), request.n, request.query_points
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return PriceResponse(
            case=case.name,
            scheme=request.scheme,
            n=request.n,
            query_points=request.query_points,
            values=[float(v) for v in values],
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(request: SweepRequest) -> SweepResponse:
        case = request.to_case_config(request.grid)
        try:
            rows, csv_text = harness.sweep(
                case,
                [s.as_tuple() for s in request.schemes],
                n_values=request.n_values,
                n_ref=request.n_ref,
                threads=request.threads,
                cache_dir=cache_dir,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return SweepResponse(
            rows=[
                SweepRowModel(
                    case=r.case,
                    adaptation=r.adaptation,
                    family=r.family,
                    theta=r.theta,
                    n=r.n,
                    error=r.error,
                )
                for r in rows
            ],
            csv=csv_text,
        )

    @app.post("/eigenvalues", response_model=EigenvaluesResponse)
    def eigenvalues(request: EigenvaluesRequest) -> EigenvaluesResponse:
        case = request.to_case_config(request.grid)
        grid = harness.build_case_grid(case)
        export = jump_spectrum(grid, case.params, case=case.name)
        return EigenvaluesResponse(
            case=case.name,
            m1=export.m1,
            m2=export.m2,
            eigenvalues=[(float(v.real), float(v.imag)) for v in export.values],
            max_abs=export.max_abs,
            max_imag=export.max_imag,
            csv=export.to_csv(),
        )

    @app.post("/stability", response_model=StabilityResponse)
    def stability(request: StabilityRequest) -> StabilityResponse:
        report = verify_theorem(
            request.theorem, request.theta, samples=request.samples, seed=request.seed
        )
        witness = None
        if report.witness is not None:
            witness = {k: repr(v) for k, v in report.witness.items()}
        details = {k: repr(v) for k, v in report.details.items()}
        return StabilityResponse(
            theorem=report.theorem,
            theta=report.theta,
            samples=report.samples,
            seed=report.seed,
            passed=report.passed,
            max_abs=report.max_abs,
            bound=report.bound,
            witness=witness,
            details=details,
            text=report.to_text(),
            shard_csv=report.shard_csv(),
        )

    return app
