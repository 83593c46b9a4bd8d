"""
Exception hierarchy shared by the utils modules and the pipelines.
The CLI maps these onto exit codes (see start_pipeline.py).
"""


class SpinDynamicsError(Exception):
    """Base class for every error raised by this project."""


class ConfigError(SpinDynamicsError, ValueError):
    """
    Invalid scenario or input file.

    Carries every violation found, not just the first one.
    """

    def __init__(self, violations: list[tuple[str, str]] | str):
        if isinstance(violations, str):
            violations = [("", violations)]
        self.violations = list(violations)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.violations]
        super().__init__("; ".join(lines))


class PreconditionError(SpinDynamicsError, ValueError):
    """Input violates a precondition (off-shell velocity, |beta| >= 1, ...)."""


class RegimeError(SpinDynamicsError, ValueError):
    """Formulation or field outside the regime where the equations hold."""


class NumericFailure(SpinDynamicsError, RuntimeError):
    """Integration produced non-finite values or the solver gave up."""

    def __init__(self, message: str, dump: dict | None = None):
        self.dump = dump or {}
        super().__init__(message)
