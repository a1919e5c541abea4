"""HTTP service exposing the key-rate library (FastAPI)."""
from .app import app, create_app

__all__ = ["app", "create_app"]
