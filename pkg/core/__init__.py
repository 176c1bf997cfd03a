from core.lab import Lab, RunConfig, parse_and_dispatch

__all__ = ("Lab", "RunConfig", "parse_and_dispatch")
