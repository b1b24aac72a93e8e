"""
Kernel Entropy Component Analysis.

The Renyi quadratic entropy of the training sample is estimated with the
Parzen window estimator V = (1/N^2) 1' K 1, H = -log V. Writing K = E D E'
splits V into per-axis contributions

    gamma_i = (1/N^2) * lambda_i * (e_i' 1)^2

and the projection keeps the k axes with the largest gamma (not necessarily
the k largest eigenvalues). Only axes with lambda_i > 0 and e_i' 1 != 0 can
contribute. Training points embed as sqrt(lambda_i) e_i; new points as
(1/sqrt(lambda_i)) e_i' k_x.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from config import EIG_MAX_SWEEPS, EIG_SOLVER, EIG_TOLERANCE, ENERGY, SELECTION
from .exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    NonFiniteError,
    ParameterError,
    UndefinedEntropyError,
)
from .kernels import KernelMatrix, KernelSpec, VectorLike, kernel_matrix, kernel_vector

logger = logging.getLogger(__name__)

EIG_SOLVERS = ("jacobi", "numpy")
SELECTIONS = ("entropy", "eigenvalue")
EIG_RELATIVE_FLOOR = 1e-10
SUM_RELATIVE_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns aligned with eigenvalues

    @property
    def n(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True, eq=False)
class EntropyRanking:
    contributions: np.ndarray  # gamma_i, indexed like the decomposition
    axis_sums: np.ndarray  # e_i' 1
    order: np.ndarray  # axis indices by gamma descending

    @property
    def total(self) -> float:
        return float(np.sum(self.contributions))


@dataclass(frozen=True)
class RenyiEstimate:
    information_potential: float
    entropy: Optional[float]

    @property
    def defined(self) -> bool:
        return self.entropy is not None

    def require_entropy(self) -> float:
        if self.entropy is None:
            raise UndefinedEntropyError(
                f"information potential {self.information_potential!r} <= 0",
                information_potential=self.information_potential,
            )
        return self.entropy


@dataclass(frozen=True, eq=False)
class KecaModel:
    spec: KernelSpec
    train_features: np.ndarray  # (N, D)
    axes: np.ndarray  # selected indices into the descending spectrum, in rank order
    eigenvalues: np.ndarray  # (k,)
    eigenvectors: np.ndarray  # (N, k)
    ranking: EntropyRanking
    requested_k: Optional[int]
    selection: str = SELECTION

    @property
    def effective_k(self) -> int:
        return int(self.axes.size)

    @property
    def n_train(self) -> int:
        return self.train_features.shape[0]

    @property
    def feature_length(self) -> int:
        return self.train_features.shape[1]


# --- eigendecomposition ---------------------------------------------------

def _as_matrix(K: Union[KernelMatrix, np.ndarray]) -> np.ndarray:
    a = np.array(K.values if isinstance(K, KernelMatrix) else K, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        raise ParameterError("matrix is not symmetric")
    return a


def _jacobi(a: np.ndarray, tol: float, max_sweeps: int):
    """Cyclic Jacobi rotations until the off-diagonal Frobenius mass is <= tol * |A|."""
    A = a.copy()
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            return np.diag(A).copy(), V, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0

                vec_p, vec_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q

    raise ConvergenceError(f"no convergence after {max_sweeps} sweeps (off-diagonal {off:.3e})", sweeps=max_sweeps)


def eig_sym(
    K: Union[KernelMatrix, np.ndarray],
    solver: str = EIG_SOLVER,
    max_sweeps: int = EIG_MAX_SWEEPS,
    tol: float = EIG_TOLERANCE,
) -> EigenDecomposition:
    """
    Full symmetric eigendecomposition, eigenvalues descending.

    Each eigenvector's first nonzero component is made positive.
    """
    a = _as_matrix(K)
    if solver == "jacobi":
        w, V, sweeps = _jacobi(a, tol, max_sweeps)
    elif solver == "numpy":
        w, V = np.linalg.eigh(a)
        sweeps = 0
    else:
        raise ParameterError(f"eig solver must be one of {EIG_SOLVERS}, got {solver!r}")

    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    for i in range(V.shape[1]):
        nonzero = np.flatnonzero(np.abs(V[:, i]) > 1e-12)
        if nonzero.size and V[nonzero[0], i] < 0:
            V[:, i] = -V[:, i]
    logger.debug(f"eig_sym({solver}): n={a.shape[0]}, sweeps={sweeps}")
    return EigenDecomposition(eigenvalues=w, eigenvectors=V)


# --- entropy --------------------------------------------------------------

def renyi_estimate(K: Union[KernelMatrix, np.ndarray]) -> RenyiEstimate:
    a = _as_matrix(K)
    n = a.shape[0]
    if n == 0:
        raise ParameterError("entropy of an empty sample")
    potential = float(np.sum(a)) / (n * n)
    if potential <= 0:
        logger.warning(f"Information potential {potential:.3e} <= 0: Renyi entropy undefined")
        return RenyiEstimate(potential, None)
    return RenyiEstimate(potential, -math.log(potential))


def entropy_rank(dec: EigenDecomposition, n: int) -> EntropyRanking:
    lam = dec.eigenvalues
    sums = dec.eigenvectors.sum(axis=0)
    gamma = lam * sums * sums / (n * n)
    index = np.arange(lam.size)
    # primary: gamma desc, then lambda desc, then original index
    order = np.lexsort((index, -lam, -gamma))
    return EntropyRanking(contributions=gamma, axis_sums=sums, order=order)


def _passing_axes(dec: EigenDecomposition, ranking: EntropyRanking, n: int, selection: str) -> List[int]:
    lam = dec.eigenvalues
    lam_max = float(lam.max()) if lam.size else 0.0
    if lam_max <= 0:
        return []
    eps_eig = EIG_RELATIVE_FLOOR * lam_max
    if selection == "eigenvalue":
        return [i for i in range(lam.size) if lam[i] > eps_eig]
    eps_sum = SUM_RELATIVE_FLOOR * math.sqrt(n)
    return [int(i) for i in ranking.order if lam[i] > eps_eig and abs(ranking.axis_sums[i]) > eps_sum]


def _energy_k(weights: np.ndarray, total: float, energy: float) -> int:
    if total <= 0 or weights.size == 0:
        return int(weights.size)
    reached = np.flatnonzero(np.cumsum(weights) >= energy * total)
    return int(reached[0]) + 1 if reached.size else int(weights.size)


def fit(
    X: Sequence[VectorLike],
    spec: KernelSpec,
    k: Optional[int] = None,
    energy: float = ENERGY,
    selection: str = SELECTION,
    eig_solver: str = EIG_SOLVER,
) -> KecaModel:
    """
    Fit the entropy component projection on training features ``X``.

    With ``k=None`` the smallest k whose cumulative contribution covers
    ``energy`` of the positive contributions is kept. If fewer than k axes
    pass the filters, all of them are kept and the effective k is recorded.
    """
    if len(X) == 0:
        raise ParameterError("empty training set")
    n = len(X)
    if n < 2:
        raise ParameterError(f"need at least 2 training samples, got {n}")
    if k is not None and not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    if selection not in SELECTIONS:
        raise ParameterError(f"selection must be one of {SELECTIONS}, got {selection!r}")
    if not 0 < energy <= 1:
        raise ParameterError(f"energy fraction must be in (0, 1], got {energy}")

    K = kernel_matrix(X, spec)
    dec = eig_sym(K, solver=eig_solver)
    ranking = entropy_rank(dec, n)
    passing = _passing_axes(dec, ranking, n, selection)
    if not passing:
        raise ParameterError("no kernel axis passes the positive-eigenvalue/entropy filter")

    if k is None:
        if selection == "eigenvalue":
            weights = dec.eigenvalues[passing]
            total = float(np.sum(dec.eigenvalues[dec.eigenvalues > 0]))
        else:
            weights = ranking.contributions[passing]
            total = float(np.sum(ranking.contributions[ranking.contributions > 0]))
        target = _energy_k(weights, total, energy)
    else:
        target = k
    axes = np.array(passing[:target], dtype=int)
    if k is not None and axes.size < k:
        logger.warning(f"Requested k={k} but only {axes.size} axes pass the filter; using k={axes.size}")

    features = np.vstack([np.asarray(getattr(x, "values", x), dtype=np.float64).ravel() for x in X])
    model = KecaModel(
        spec=spec,
        train_features=features,
        axes=axes,
        eigenvalues=dec.eigenvalues[axes].copy(),
        eigenvectors=dec.eigenvectors[:, axes].copy(),
        ranking=ranking,
        requested_k=k,
        selection=selection,
    )
    estimate = renyi_estimate(K)
    logger.info(
        f"Fitted KECA ({selection}, {spec.kind} kernel): N={n}, k={model.effective_k}, "
        f"V={estimate.information_potential:.6g}, retained={float(np.sum(ranking.contributions[axes])):.6g}"
    )
    return model


# --- projection -----------------------------------------------------------

def project_train(model: KecaModel) -> np.ndarray:
    """(N, k) embedding of the training sample: column i is sqrt(lambda_i) e_i."""
    return model.eigenvectors * np.sqrt(model.eigenvalues)[None, :]


def project_kernel_vector(model: KecaModel, kx: np.ndarray) -> np.ndarray:
    if np.any(model.eigenvalues <= 0):
        raise ParameterError("model holds a non-positive eigenvalue axis")
    return (model.eigenvectors.T @ kx) / np.sqrt(model.eigenvalues)


def project(model: KecaModel, x: VectorLike) -> np.ndarray:
    """k-dim embedding of a new feature vector."""
    kx = kernel_vector(x, model.train_features, model.spec)
    if kx.size != model.n_train:
        raise DimensionMismatchError("kernel vector length differs from the training size")
    return project_kernel_vector(model, kx)
