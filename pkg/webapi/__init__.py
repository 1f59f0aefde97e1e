"""FastAPI application exposing the covering solver."""
from __future__ import annotations

import logging
import os

from fastapi import FastAPI

from services.instance_store import InstanceStore

from .dependencies import bind_state
from .middleware import SolverLoggingMiddleware
from .orchestrator import SolveOrchestrator
from .routes import api_router

logger = logging.getLogger(__name__)

TOKEN_ENV = "FMCLP_API_TOKEN"


def create_app(
    store: InstanceStore | None = None,
    *,
    title: str = "Fuzzy MCLP Web API",
    auth_token: str | None = None,
    workers: int = 1,
    oracle_cap: int = 20,
) -> FastAPI:
    """Create and configure a FastAPI application bound to an :class:`InstanceStore`."""
    app = FastAPI(title=title)

    orchestrator = SolveOrchestrator(store or InstanceStore(), workers=workers, oracle_cap=oracle_cap)
    bind_state(app, orchestrator, auth_token or os.getenv(TOKEN_ENV))

    app.include_router(api_router)
    app.add_middleware(SolverLoggingMiddleware)

    logger.debug("Web API application created with %d worker(s)", workers)

    return app


__all__ = ["create_app", "SolveOrchestrator"]
