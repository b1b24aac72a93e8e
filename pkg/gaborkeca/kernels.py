"""
Kernel functions and kernel matrices for the entropy component stage.

    cosine      K(x, y) = (pi/4) cos(pi (x.y) / 2)
    gaussian    K(x, y) = exp(-|x - y|^2 / (2 sigma_k^2))
    polynomial  K(x, y) = (x.y + c)^d

With ``normalize_inputs`` both vectors are scaled to unit length first (zero
vectors stay zero), which keeps the cosine kernel's argument in [-1, 1].
The cosine kernel is not positive semi-definite; callers must tolerate
negative eigenvalues. Matrices are never centred.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from sklearn.preprocessing import normalize

from config import KERNEL_SIGMA, NORMALIZE_INPUTS, POLY_DEGREE, POLY_OFFSET
from .exceptions import DimensionMismatchError, NonFiniteError, ParameterError
from .features import FeatureVector

logger = logging.getLogger(__name__)

KERNEL_KINDS = ("cosine", "gaussian", "polynomial")
VectorLike = Union[FeatureVector, np.ndarray, Sequence[float]]


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "cosine"
    sigma: Optional[float] = None
    degree: Optional[int] = None
    offset: Optional[float] = None
    normalize_inputs: bool = NORMALIZE_INPUTS

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(f"kernel kind must be one of {KERNEL_KINDS}, got {self.kind!r}")
        if self.kind == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise ParameterError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
        elif self.sigma is not None:
            raise ParameterError(f"sigma only applies to the gaussian kernel")
        if self.kind == "polynomial":
            if self.degree is None or int(self.degree) != self.degree or self.degree < 1:
                raise ParameterError(f"polynomial kernel needs integer degree >= 1, got {self.degree}")
            if self.offset is None or self.offset < 0:
                raise ParameterError(f"polynomial kernel needs offset >= 0, got {self.offset}")
        elif self.degree is not None or self.offset is not None:
            raise ParameterError("degree/offset only apply to the polynomial kernel")

    @classmethod
    def build(
        cls,
        kind: str,
        sigma: float = KERNEL_SIGMA,
        degree: int = POLY_DEGREE,
        offset: float = POLY_OFFSET,
        normalize_inputs: bool = NORMALIZE_INPUTS,
    ) -> "KernelSpec":
        """Spec for ``kind`` taking only the parameters that kind uses."""
        if kind == "gaussian":
            return cls(kind, sigma=sigma, normalize_inputs=normalize_inputs)
        if kind == "polynomial":
            return cls(kind, degree=int(degree), offset=offset, normalize_inputs=normalize_inputs)
        return cls(kind, normalize_inputs=normalize_inputs)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "degree": self.degree,
            "offset": self.offset,
            "normalize_inputs": self.normalize_inputs,
        }


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(f"kernel matrix must be square, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _as_array(x: VectorLike) -> np.ndarray:
    values = x.values if isinstance(x, FeatureVector) else x
    arr = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("feature vector contains non-finite values")
    return arr


def _prepare(x: VectorLike, spec: KernelSpec) -> np.ndarray:
    arr = _as_array(x)
    if spec.normalize_inputs:
        arr = normalize(arr.reshape(1, -1))[0]
    return arr


def _evaluate(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> float:
    if spec.kind == "cosine":
        return (math.pi / 4.0) * math.cos(math.pi * float(np.dot(a, b)) / 2.0)
    if spec.kind == "gaussian":
        d = a - b
        return math.exp(-float(np.dot(d, d)) / (2.0 * spec.sigma * spec.sigma))
    return (float(np.dot(a, b)) + spec.offset) ** int(spec.degree)


def _check_lengths(vectors: Sequence[np.ndarray]) -> None:
    lengths = {v.size for v in vectors}
    if len(lengths) > 1:
        raise DimensionMismatchError(f"feature vectors differ in length: {sorted(lengths)}")


def eval_kernel(x: VectorLike, y: VectorLike, spec: KernelSpec) -> float:
    a, b = _prepare(x, spec), _prepare(y, spec)
    _check_lengths([a, b])
    return _evaluate(a, b, spec)


def kernel_matrix(X: Sequence[VectorLike], spec: KernelSpec) -> KernelMatrix:
    if len(X) == 0:
        raise ParameterError("kernel matrix of an empty sample")
    prepared = [_prepare(x, spec) for x in X]
    _check_lengths(prepared)
    n = len(prepared)
    values = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            values[i, j] = values[j, i] = _evaluate(prepared[i], prepared[j], spec)
    logger.debug(f"Kernel matrix ({spec.kind}): {n}x{n}")
    return KernelMatrix(values)


def kernel_vector(x: VectorLike, X_train: Sequence[VectorLike], spec: KernelSpec) -> np.ndarray:
    a = _prepare(x, spec)
    prepared = [_prepare(t, spec) for t in X_train]
    _check_lengths([a, *prepared])
    return np.array([_evaluate(a, t, spec) for t in prepared], dtype=np.float64)
