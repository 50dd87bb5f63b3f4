"""HTTP surface: one endpoint per experiment driver.

Domain errors (all ValueError subclasses) map to 422 with a structured
body; anything else is a genuine server fault and stays a 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .experiments import run_angular, run_continuous, run_maxent_fit, run_verify
from .schemas import (
    AngularRequest,
    ContinuousRequest,
    MaxentFitRequest,
    VerifyRequest,
)
from .serialize import to_jsonable


def create_app() -> FastAPI:
    app = FastAPI(title="reurlab", version=__version__)

    @app.exception_handler(ValueError)
    async def _domain_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/verify")
    def verify(req: VerifyRequest) -> JSONResponse:
        return JSONResponse(content=to_jsonable(run_verify(req)))

    @app.post("/continuous")
    def continuous(req: ContinuousRequest) -> JSONResponse:
        return JSONResponse(content=to_jsonable(run_continuous(req)))

    @app.post("/angular")
    def angular(req: AngularRequest) -> JSONResponse:
        return JSONResponse(content=to_jsonable(run_angular(req)))

    @app.post("/maxent/fit")
    def maxent_fit(req: MaxentFitRequest) -> JSONResponse:
        return JSONResponse(content=to_jsonable(run_maxent_fit(req)))

    return app


app = create_app()
