"""
Kernel Test Script
Tests the cosine, gaussian and polynomial kernels and kernel matrix construction.
"""
import math

import numpy as np
import pytest

from gaborkeca.exceptions import DimensionMismatchError, ParameterError
from gaborkeca.features import FeatureVector
from gaborkeca.kernels import KernelSpec, eval_kernel, kernel_matrix, kernel_vector

COSINE = KernelSpec.build("cosine")
GAUSSIAN = KernelSpec.build("gaussian", sigma=1.0)
POLY = KernelSpec.build("polynomial", degree=2, offset=1.0)


def test_cosine_kernel_values():
    assert eval_kernel([1.0, 0.0], [0.0, 1.0], COSINE) == pytest.approx(math.pi / 4)
    assert eval_kernel([3.0, 4.0], [3.0, 4.0], COSINE) == pytest.approx(0.0, abs=1e-12)


def test_gaussian_self_similarity():
    x = np.random.default_rng(0).normal(size=10)
    assert eval_kernel(x, x, GAUSSIAN) == 1.0


def test_polynomial_without_normalisation():
    spec = KernelSpec.build("polynomial", degree=3, offset=2.0, normalize_inputs=False)
    assert eval_kernel([1.0, 2.0], [3.0, 1.0], spec) == (5.0 + 2.0) ** 3


def test_zero_vector_normalises_to_zero():
    assert eval_kernel([0.0, 0.0], [1.0, 5.0], COSINE) == pytest.approx(math.pi / 4)


def test_spec_parameters_present_iff_required():
    with pytest.raises(ParameterError):
        KernelSpec("gaussian")
    with pytest.raises(ParameterError):
        KernelSpec("cosine", sigma=1.0)
    with pytest.raises(ParameterError):
        KernelSpec("polynomial", degree=0, offset=1.0)
    with pytest.raises(ParameterError):
        KernelSpec("sigmoid")
    assert KernelSpec.build("gaussian").sigma == 1.0
    assert (POLY.degree, POLY.offset, POLY.sigma) == (2, 1.0, None)


def test_single_point_matrix():
    K = kernel_matrix([[1.0, 2.0]], GAUSSIAN)
    assert K.values.tolist() == [[1.0]]


def test_identical_points_give_all_ones():
    K = kernel_matrix([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]], GAUSSIAN)
    assert K.values.tolist() == [[1.0, 1.0], [1.0, 1.0]]


@pytest.mark.parametrize("spec", [COSINE, GAUSSIAN, POLY])
def test_matrix_matches_pairwise_evaluation_exactly(spec):
    X = list(np.random.default_rng(1).uniform(0, 5, (5, 12)))
    K = kernel_matrix(X, spec)
    expected = np.array([[eval_kernel(a, b, spec) for b in X] for a in X])
    assert np.array_equal(K.values, expected)
    assert np.array_equal(K.values, K.values.T)
    for j, x in enumerate(X):
        assert np.array_equal(kernel_vector(x, X, spec), K.values[j])


def test_feature_vectors_are_accepted():
    rng = np.random.default_rng(2)
    X = [FeatureVector(rng.uniform(0, 1, 6), num_outputs=1, blocks_per_output=6) for _ in range(3)]
    K = kernel_matrix(X, COSINE)
    assert K.n == 3
    assert kernel_vector(X[0], [], COSINE).size == 0


def test_length_mismatch_and_empty_input():
    with pytest.raises(DimensionMismatchError):
        eval_kernel([1.0, 2.0], [1.0, 2.0, 3.0], GAUSSIAN)
    with pytest.raises(DimensionMismatchError):
        kernel_matrix([[1.0], [1.0, 2.0]], GAUSSIAN)
    with pytest.raises(ParameterError):
        kernel_matrix([], GAUSSIAN)


def test_gaussian_matrix_is_positive_semidefinite():
    rng = np.random.default_rng(3)
    for _ in range(5):
        K = kernel_matrix(list(rng.normal(size=(20, 8))), GAUSSIAN)
        w = np.linalg.eigvalsh(K.values)
        assert w.min() >= -1e-8 * w.max()


def test_cosine_kernel_is_bounded():
    rng = np.random.default_rng(4)
    K = kernel_matrix(list(rng.normal(size=(15, 6))), COSINE)
    assert np.all(np.abs(K.values) <= math.pi / 4 + 1e-15)
