"""Front door: CLI for headless runs and the HTTP/WebSocket service."""

from .app import create_app
from .cli import main

__all__ = ["create_app", "main"]
