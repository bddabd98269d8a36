"""Exception hierarchy. Every error carries a short machine-readable ``code``
so the CLI and the report can emit structured messages."""


class TzeffError(Exception):
    code = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def as_dict(self):
        return {"error": self.code, "message": str(self), **{k: str(v) for k, v in self.context.items()}}


class LabelError(TzeffError, ValueError):
    code = "invalid_label"


class ParseError(TzeffError, ValueError):
    code = "parse_error"


class GapError(TzeffError):
    code = "gap"


class AlignmentError(TzeffError, ValueError):
    code = "misaligned"


class NotReplicableError(TzeffError):
    code = "not_replicable"


class EmptySeriesError(TzeffError):
    code = "empty_series"


class InsufficientDataError(TzeffError, ValueError):
    code = "insufficient_data"


class DegenerateRegressionError(TzeffError):
    code = "degenerate_regression"


class ConfigError(TzeffError, ValueError):
    code = "invalid_config"
