"""Package-level error types."""


class ConfigError(ValueError):
    """Experiment configuration is malformed or inconsistent (CLI exit code 2)."""


class TrainingDiverged(RuntimeError):
    """A training loss went non-finite; the run must abort (CLI exit code 3)."""
