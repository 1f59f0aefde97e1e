"""Middleware utilities for the web API."""
from __future__ import annotations

import logging

from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware

from errors import FuzzyCoverError

logger = logging.getLogger(__name__)


class SolverLoggingMiddleware(BaseHTTPMiddleware):
    """Log solver statistics and domain errors propagated through the request state."""

    async def dispatch(self, request: Request, call_next):  # type: ignore[override]
        try:
            response = await call_next(request)
        except FuzzyCoverError as exc:
            logger.exception(
                "Solver error during %s %s: %s", request.method, request.url.path, exc
            )
            raise
        except Exception as exc:  # pragma: no cover
            logger.exception(
                "Unhandled error during %s %s: %s", request.method, request.url.path, exc
            )
            raise

        stats = getattr(request.state, "solver_stats", None)
        if stats is not None:
            logger.info(
                "Solver %s for %s %s -> %s",
                stats.get("mode"),
                request.method,
                request.url.path,
                ", ".join("{}={}".format(key, value) for key, value in stats.items() if key != "mode"),
            )

        error = getattr(request.state, "solver_error", None)
        if error is not None:
            logger.warning(
                "Rejected %s %s -> %s: %s", request.method, request.url.path, type(error).__name__, error
            )

        return response


__all__ = ["SolverLoggingMiddleware"]
