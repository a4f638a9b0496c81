"""Stateless HTTP facade over the engines.

POST /v1/{ess,fit,posterior,consistency,density-grid} accept the same flat
JSON parameter documents as the CLI and return the corresponding result
plus ``warnings`` and ``engine_version``; GET /v1/health reports liveness.
Request validation failures map to 400, computation failures to 422 with a
machine-readable ``code``. No handler mutates server state.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from typing import Any, Callable, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__, runs
from .errors import EsskitError, ValidationError

REPLICATION_CAP = 10_000
DEFAULT_TIMEOUT_S = 60.0


class TimeoutExceededError(EsskitError):
    code = "TIMEOUT"


def _error_body(code: str, message: str) -> dict:
    return {"code": code, "message": message, "engine_version": __version__}


def _success_body(result: dict) -> dict:
    body = dict(result)
    body.setdefault("warnings", [])
    body["engine_version"] = __version__
    return body


def create_app(ui_dir: Optional[str] = None, timeout_s: float = DEFAULT_TIMEOUT_S) -> FastAPI:
    app = FastAPI(title="esskit", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],  # local-tool posture: the bundled UI may be served anywhere
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _on_bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content=_error_body("VALIDATION", str(exc.errors())))

    def run(fn: Callable[[dict], dict], params: Any) -> JSONResponse:
        if not isinstance(params, dict):
            return JSONResponse(status_code=400,
                                content=_error_body("VALIDATION",
                                                    "request body must be a JSON object"))
        try:
            return JSONResponse(content=_success_body(fn(params)))
        except ValidationError as exc:
            return JSONResponse(status_code=400, content=_error_body(exc.code, str(exc)))
        except EsskitError as exc:
            return JSONResponse(status_code=422, content=_error_body(exc.code, str(exc)))

    @app.post("/v1/ess")
    async def ess(params: dict) -> JSONResponse:
        return run(runs.run_ess, params)

    @app.post("/v1/fit")
    async def fit(params: dict) -> JSONResponse:
        return run(runs.run_fit, params)

    @app.post("/v1/posterior")
    async def posterior(params: dict) -> JSONResponse:
        return run(runs.run_posterior, params)

    @app.post("/v1/consistency")
    async def consistency(params: dict) -> JSONResponse:
        if isinstance(params, dict):
            reps = params.get("reps")
            if isinstance(reps, int) and reps > REPLICATION_CAP:
                return JSONResponse(
                    status_code=422,
                    content=_error_body(
                        "REPLICATION_CAP",
                        f"reps {reps} exceeds the synchronous cap of {REPLICATION_CAP}"))

        def bounded(p: dict) -> dict:
            # A long run must not pin the event loop past the timeout; the
            # worker is abandoned (not joined) when the deadline passes.
            pool = ThreadPoolExecutor(max_workers=1)
            try:
                future = pool.submit(runs.run_consistency, p)
                return future.result(timeout=timeout_s)
            except FutureTimeout:
                raise TimeoutExceededError(
                    f"consistency run exceeded the {timeout_s:.0f}s timeout") from None
            finally:
                pool.shutdown(wait=False, cancel_futures=True)

        return run(bounded, params)

    @app.post("/v1/density-grid")
    async def density(params: dict) -> JSONResponse:
        return run(runs.run_density_grid, params)

    @app.get("/v1/health")
    async def health() -> dict:
        return {"status": "ok", "engine_version": __version__}

    static_dir = ui_dir or os.environ.get("ESSKIT_UI_DIR")
    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def serve(bind: str = "127.0.0.1", port: int = 8787, ui_dir: Optional[str] = None) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(ui_dir=ui_dir), host=bind, port=port, log_level="info")
