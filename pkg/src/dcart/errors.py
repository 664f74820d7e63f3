"""Exception hierarchy shared by every stage of the pipeline."""


class DcartError(Exception):
    """Base class; the CLI maps subclasses to machine-readable error codes."""

    code = "dcart"


class GeometryDomainError(DcartError, ValueError):
    code = "domain"


class GammaRangeError(DcartError, ValueError):
    code = "gamma-range"


class SupportError(DcartError, ValueError):
    code = "support"


class SingularWeightError(DcartError, ArithmeticError):
    code = "singular-weight"


class SymmetryError(DcartError, ValueError):
    code = "symmetry"


class SizeError(DcartError, ValueError):
    code = "size"


class DimensionError(DcartError, ValueError):
    code = "dimension"


class FormatError(DcartError):
    code = "format"


class BadMagicError(FormatError):
    code = "bad-magic"


class TruncatedPayloadError(FormatError):
    code = "truncated"


class HeaderMismatchError(FormatError):
    code = "header-mismatch"


class ConfigError(DcartError, ValueError):
    code = "config"

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
