"""Request dependencies resolving per-application solver state."""
from __future__ import annotations

import secrets
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request, status
from fastapi.security import HTTPAuthorizationCredentials, HTTPBearer

from .orchestrator import SolveOrchestrator

__all__ = [
    "TokenAuthenticator",
    "bind_state",
    "get_orchestrator",
    "require_token",
]

_BEARER = HTTPBearer(auto_error=False)


class TokenAuthenticator:
    """Constant-time comparison against one shared bearer token."""

    def __init__(self, token: str):
        if not token:
            raise ValueError("Authentication token must be a non-empty string")
        self._token = token

    def verify(self, candidate: str) -> bool:
        return secrets.compare_digest(self._token.encode(), candidate.encode())


def bind_state(app: FastAPI, orchestrator: SolveOrchestrator, token: Optional[str]) -> None:
    """Attach the orchestrator and the optional authenticator to *app*."""
    app.state.orchestrator = orchestrator
    app.state.authenticator = TokenAuthenticator(token) if token else None


def get_orchestrator(request: Request) -> SolveOrchestrator:
    orchestrator = getattr(request.app.state, "orchestrator", None)
    if orchestrator is None:
        raise RuntimeError("Solve orchestrator has not been bound to the application")
    return orchestrator


def require_token(
    request: Request,
    credentials: Optional[HTTPAuthorizationCredentials] = Depends(_BEARER),
) -> None:
    authenticator: Optional[TokenAuthenticator] = getattr(request.app.state, "authenticator", None)
    if authenticator is None:
        return

    if credentials is None or not credentials.credentials:
        detail = "Missing bearer token"
    elif not authenticator.verify(credentials.credentials):
        detail = "Invalid bearer token"
    else:
        return
    raise HTTPException(
        status_code=status.HTTP_401_UNAUTHORIZED,
        detail=detail,
        headers={"WWW-Authenticate": "Bearer"},
    )
