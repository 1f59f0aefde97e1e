"""ASGI entrypoint for running the covering solver API."""
from __future__ import annotations

from services.bench import default_workers
from services.instance_store import InstanceStore

from . import create_app

store = InstanceStore()
app = create_app(store, workers=default_workers())

__all__ = ["app"]
