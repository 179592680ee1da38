"""Python bindings for the heightlab C++ core."""

import json

from ._heightlab import Family, MathError, ValidationError, commands, dynamical_degree
from ._heightlab import run as _run

__all__ = ["Family", "MathError", "ValidationError", "commands", "dynamical_degree", "run", "RunError"]


class RunError(RuntimeError):
    def __init__(self, exit_code, message):
        super().__init__(f"exit {exit_code}: {message}")
        self.exit_code = exit_code


def run(command, family, *, csv=False, **options):
    """Run a CLI command on a family file and return the parsed report (or CSV text)."""
    code, text, message = _run(command, str(family), csv=csv, **options)
    if code not in (0, 4):
        raise RunError(code, message)
    return text if csv else json.loads(text)
