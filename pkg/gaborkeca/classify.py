"""
Nearest-class-mean classification in the KECA embedding.

Measures (smaller is closer):
    l1           sum |X_i - Y_i|
    l2           (X - Y)'(X - Y)            (squared, no root)
    mahalanobis  (X - Y)' S^-1 (X - Y)      (pooled within-class covariance, ridge regularised)
    cosine       -X'Y / (|X| |Y|)
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from .exceptions import DegenerateVectorError, DimensionMismatchError, ParameterError

logger = logging.getLogger(__name__)

RIDGE_FRACTION = 1e-6


class Measure(str, Enum):
    L1 = "l1"
    L2 = "l2"
    MAHALANOBIS = "mahalanobis"
    COSINE = "cosine"

    @classmethod
    def parse(cls, token) -> "Measure":
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ParameterError(f"unknown measure '{token}' (choose from {choices})") from None


@dataclass(frozen=True, eq=False)
class ClassModel:
    labels: Tuple[str, ...]
    means: np.ndarray  # (l, k)
    covariance: np.ndarray  # (k, k), before regularisation
    precision: np.ndarray  # inverse of the regularised covariance
    ridge: float = 0.0

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @classmethod
    def from_covariance(cls, labels, means, covariance, ridge: float = 0.0) -> "ClassModel":
        means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        cov = np.asarray(covariance, dtype=np.float64)
        k = means.shape[1]
        if cov.shape != (k, k):
            raise DimensionMismatchError(f"covariance shape {cov.shape} does not match dimension {k}")
        cov = (cov + cov.T) / 2.0
        regularised = cov + ridge * np.eye(k)
        if np.linalg.eigvalsh(regularised).min() <= 0:
            raise ParameterError("regularised covariance is not positive definite")
        return cls(
            labels=tuple(str(label) for label in labels),
            means=means,
            covariance=cov,
            precision=np.linalg.inv(regularised),
            ridge=ridge,
        )


def pooled_covariance(embeddings: np.ndarray, labels: Sequence[str], classes: Sequence[str]) -> np.ndarray:
    """Within-class scatter / (N - l); total covariance / N when every class has one sample."""
    n, k = embeddings.shape
    lab = np.asarray(labels)
    if n > len(classes):
        scatter = np.zeros((k, k))
        for c in classes:
            centred = embeddings[lab == c] - embeddings[lab == c].mean(axis=0)
            scatter += centred.T @ centred
        return scatter / (n - len(classes))
    centred = embeddings - embeddings.mean(axis=0)
    return centred.T @ centred / n


def fit_classes(embeddings, labels: Sequence[str]) -> ClassModel:
    emb = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    labels = [str(label) for label in labels]
    n, k = emb.shape
    if k == 0:
        raise ParameterError("embedding dimension is zero")
    if len(labels) != n:
        raise DimensionMismatchError(f"{n} embeddings but {len(labels)} labels")
    classes = sorted(set(labels))
    if not classes:
        raise ParameterError("no classes to fit")
    lab = np.asarray(labels)
    means = np.vstack([emb[lab == c].mean(axis=0) for c in classes])

    cov = pooled_covariance(emb, labels, classes)
    trace = float(np.trace(cov))
    if trace > 0:
        ridge = RIDGE_FRACTION * trace / k
    else:
        logger.warning("Covariance has zero trace; using unit ridge for the Mahalanobis measure")
        ridge = 1.0
    model = ClassModel.from_covariance(classes, means, cov, ridge=ridge)
    logger.info(f"Fitted {len(classes)} class means in {k} dimensions (ridge={ridge:.3e})")
    return model


def distance(x, y, m: Measure, model: ClassModel = None) -> float:
    a = np.asarray(x, dtype=np.float64).ravel()
    b = np.asarray(y, dtype=np.float64).ravel()
    if a.size != b.size or (model is not None and a.size != model.dim):
        raise DimensionMismatchError(f"vector dimensions {a.size}/{b.size} do not match the model")
    m = Measure.parse(m)
    diff = a - b
    if m is Measure.L1:
        return float(np.sum(np.abs(diff)))
    if m is Measure.L2:
        return float(diff @ diff)
    if m is Measure.MAHALANOBIS:
        if model is None:
            raise ParameterError("mahalanobis measure needs a fitted class model")
        return float(diff @ model.precision @ diff)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DegenerateVectorError("cosine measure of a zero vector")
    return float(-(a @ b) / (na * nb))


def classify(x, model: ClassModel, m: Measure) -> Tuple[str, float]:
    """Label of the nearest class mean; ties go to the lowest class index."""
    m = Measure.parse(m)
    dists = [distance(x, mean, m, model) for mean in model.means]
    best = int(np.argmin(dists))
    return model.labels[best], dists[best]
