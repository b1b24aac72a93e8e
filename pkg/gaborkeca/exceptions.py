"""
Exception classes for the Gabor/KECA pipeline.

Every error carries a stable code, a default message and the exit status the
CLI uses when the error escapes a command.
"""
import logging

from utils import now_iso

logger = logging.getLogger(__name__)

EXIT_BAD_INPUT = 2
EXIT_NUMERICAL = 3


class GaborKecaError(Exception):
    """Base exception for pipeline errors."""
    default_code = "INTERNAL_ERROR"
    default_detail = "An unexpected error occurred."
    exit_code = 1

    def __init__(self, detail=None, **context):
        self.detail = detail or self.default_detail
        self.context = context
        super().__init__(self.detail)

    @property
    def code(self) -> str:
        return self.default_code


# --- image decoding -------------------------------------------------------

class ImageNotFoundError(GaborKecaError, FileNotFoundError):
    """Raised when an image path does not exist."""
    default_code = "IMAGE_NOT_FOUND"
    default_detail = "Image file does not exist."
    exit_code = EXIT_BAD_INPUT


class MalformedHeaderError(GaborKecaError, ValueError):
    """Raised when a PGM header is missing, non-numeric or has the wrong magic."""
    default_code = "MALFORMED_HEADER"
    default_detail = "PGM header is malformed."
    exit_code = EXIT_BAD_INPUT


class TruncatedDataError(GaborKecaError, ValueError):
    """Raised when PGM pixel data ends before width x height samples."""
    default_code = "TRUNCATED_DATA"
    default_detail = "PGM pixel data is shorter than the header declares."
    exit_code = EXIT_BAD_INPUT


class UnsupportedMaxvalError(GaborKecaError, ValueError):
    """Raised when a PGM declares a maxval above 255."""
    default_code = "UNSUPPORTED_MAXVAL"
    default_detail = "PGM maxval above 255 is not supported."
    exit_code = EXIT_BAD_INPUT


# --- manifests ------------------------------------------------------------

class ManifestError(GaborKecaError, ValueError):
    """Raised when a manifest file is missing or has a bad header."""
    default_code = "MANIFEST_ERROR"
    default_detail = "Manifest file is invalid."
    exit_code = EXIT_BAD_INPUT


class UnknownRoleError(ManifestError):
    """Raised when a manifest row names a role other than the three protocol roles."""
    default_code = "UNKNOWN_ROLE"
    default_detail = "Manifest row has an unknown role."


class DuplicateEntryError(ManifestError):
    """Raised when a manifest lists the same path twice under one role."""
    default_code = "DUPLICATE_ENTRY"
    default_detail = "Manifest repeats a (path, role) pair."


class UnreadableImageError(ManifestError):
    """Raised when a manifest row points at an image that fails to load."""
    default_code = "UNREADABLE_IMAGE"
    default_detail = "Manifest references an image that cannot be loaded."


# --- parameters and shapes ------------------------------------------------

class ParameterError(GaborKecaError, ValueError):
    """Raised when a configuration value or argument is out of range."""
    default_code = "INVALID_PARAMETER"
    default_detail = "Parameter outside its valid range."
    exit_code = EXIT_BAD_INPUT


class DimensionMismatchError(GaborKecaError, ValueError):
    """Raised when arrays passed together have incompatible shapes."""
    default_code = "DIMENSION_MISMATCH"
    default_detail = "Inputs have incompatible dimensions."
    exit_code = EXIT_BAD_INPUT


class ImageTooSmallError(DimensionMismatchError):
    """Raised when an image is smaller than the Gabor kernel window."""
    default_code = "IMAGE_TOO_SMALL"
    default_detail = "Image is smaller than the kernel window."


# --- numerics -------------------------------------------------------------

class NonFiniteError(GaborKecaError, ValueError):
    """Raised when an input array holds NaN or infinite values."""
    default_code = "NON_FINITE"
    default_detail = "Input contains NaN or infinite values."
    exit_code = EXIT_NUMERICAL


class ConvergenceError(GaborKecaError, ArithmeticError):
    """Raised when the Jacobi eigensolver exceeds its sweep limit."""
    default_code = "NO_CONVERGENCE"
    default_detail = "Eigensolver did not converge within the sweep limit."
    exit_code = EXIT_NUMERICAL


class UndefinedEntropyError(GaborKecaError, ArithmeticError):
    """Raised when the information potential is not positive."""
    default_code = "UNDEFINED_ENTROPY"
    default_detail = "Information potential is not positive; Renyi entropy is undefined."
    exit_code = EXIT_NUMERICAL


class DegenerateVectorError(GaborKecaError, ValueError):
    """Raised when the cosine measure meets a zero vector."""
    default_code = "DEGENERATE_VECTOR"
    default_detail = "Cosine measure is undefined for a zero vector."
    exit_code = EXIT_NUMERICAL


# --- persistence and protocol ---------------------------------------------

class ModelFormatError(GaborKecaError, ValueError):
    """Raised when a model file is corrupt, truncated or of an unknown version."""
    default_code = "MODEL_FORMAT"
    default_detail = "Model file is corrupt or has an unsupported version."
    exit_code = EXIT_BAD_INPUT


class ProtocolError(GaborKecaError, ValueError):
    """Raised when a dataset or threshold cannot drive the evaluation protocol."""
    default_code = "PROTOCOL_ERROR"
    default_detail = "Evaluation protocol cannot be run on this input."
    exit_code = EXIT_BAD_INPUT


def format_error(exc: BaseException) -> str:
    """
    Render an exception as a single structured line for standard error.

    Format: code=<CODE> message="<text>" timestamp=<iso> [key=value ...]
    """
    if isinstance(exc, GaborKecaError):
        code = exc.code
        message = exc.detail
        context = exc.context
    else:
        code = getattr(exc, "default_code", "UNEXPECTED_ERROR")
        message = str(exc) or exc.__class__.__name__
        context = {}

    parts = [f"code={code}", f'message="{message}"', f"timestamp={now_iso()}"]
    parts.extend(f"{key}={value}" for key, value in sorted(context.items()))
    return " ".join(parts)
