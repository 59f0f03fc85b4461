"""HTTP service: model-protocol endpoints plus engine run/batch/eval."""

from .app import create_app

__all__ = ["create_app"]
