from __future__ import annotations


class InvariantViolation(Exception):
    """A checked structural claim failed; ``diagnostics`` says where."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
