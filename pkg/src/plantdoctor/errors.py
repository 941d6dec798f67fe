"""Error taxonomy shared across the pipeline.

Each class maps to a distinct CLI exit status so callers can script
against failures: usage 1, input 2, backend 3.
"""


class PlantDoctorError(Exception):
    """Base class for all pipeline errors."""

    exit_status = 1


class UsageError(PlantDoctorError):
    """Invalid configuration, flags, or argument combinations."""

    exit_status = 1


class InputError(PlantDoctorError):
    """Unreadable, malformed, or truncated input media."""

    exit_status = 2


class BackendError(PlantDoctorError):
    """A detector or segmenter backend failed to load or run."""

    exit_status = 3
