"""Exception hierarchy shared by every stage of the pipeline."""


class QDMError(Exception):
    """Base class; ``stage`` is filled in by the pipeline when it re-raises."""

    stage: str | None = None


class ParameterError(QDMError, ValueError):
    pass


class IngestionError(QDMError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class NumericalError(QDMError):
    pass


class AccuracyError(QDMError):
    """A simulated stage missed its error budget. ``data`` carries the measurements."""

    def __init__(self, message, data=None):
        super().__init__(message)
        self.data = data or {}


class PhaseResolutionError(QDMError):
    def __init__(self, message, suggested_n_b=None):
        if suggested_n_b is not None:
            message = f"{message}; try n_b >= {suggested_n_b}"
        super().__init__(message)
        self.suggested_n_b = suggested_n_b


class ExtractionError(QDMError):
    pass


class CapacityError(QDMError):
    pass
