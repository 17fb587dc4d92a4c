"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit 2,
data problems exit 3.
"""


class AuditError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(AuditError):
    """A caller-supplied parameter is out of range or inconsistent."""


class ConfigError(AuditError):
    """Invalid run configuration (bad flags, missing inputs)."""


class FormatError(AuditError):
    """A file does not conform to its declared on-disk format."""


class DataError(AuditError):
    """File parses but its payload is invalid (NaN floats, bad ranges)."""


class ConsistencyError(AuditError):
    """Two inputs that must agree (ids, counts, labels) do not."""


class DegenerateSampleError(DataError):
    """A sample collapses to an unusable value (e.g. zero pooled vector)."""


class UndefinedMetricError(AuditError):
    """A metric has no defined value for the given inputs."""
