"""Exception types shared across the toolkit."""


class CifpError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CifpError):
    """Bad configuration, unusable input file, or invalid CLI usage."""


class AcquisitionError(CifpError):
    """A remote data fetch failed for good (after retries, if any)."""


class RateLimitError(AcquisitionError):
    """Provider signalled a rate limit; carries the suggested wait."""

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class ArchiveError(CifpError):
    """Malformed archive line; reports line number and offending field."""

    def __init__(self, message: str, line_no: int, field: str | None = None):
        detail = f"line {line_no}"
        if field:
            detail += f", field {field!r}"
        super().__init__(f"{message} ({detail})")
        self.line_no = line_no
        self.field = field


class TableError(CifpError):
    """Malformed row in a delimited coefficient table."""

    def __init__(self, message: str, path: str, row_no: int):
        super().__init__(f"{path}:{row_no}: {message}")
        self.path = path
        self.row_no = row_no


class CoverageGapError(CifpError):
    """No usable carbon-intensity bucket for the requested instant."""

    def __init__(self, zone: str, instant=None, detail: str = ""):
        message = f"no intensity data for zone {zone!r}"
        if instant is not None:
            message += f" covering {instant.isoformat()}"
        if detail:
            message += f": {detail}"
        super().__init__(message)
        self.zone = zone
        self.instant = instant


class MissingCoefficientError(CifpError):
    """A region lacks a coefficient required by the requested computation."""

    def __init__(self, region_id: str, coefficient: str):
        super().__init__(f"region {region_id!r} has no {coefficient} coefficient")
        self.region_id = region_id
        self.coefficient = coefficient


class DegenerateMixError(CifpError):
    """Manufacturing mix cannot be normalized or divides by zero."""


class EmptyDataError(CifpError):
    """An aggregate (mean, share, metric) is undefined on empty input."""
