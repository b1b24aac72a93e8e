"""
Feature Extraction Test Script
Tests block-wise maxima floored at the global mean and the concatenated feature vector.
"""
import math

import numpy as np
import pytest

from gaborkeca.exceptions import DimensionMismatchError, ParameterError
from gaborkeca.features import extract_blocks, extract_chi, extract_image, global_mean
from gaborkeca.gabor import GaborParams, MagnitudeImage, make_bank
from gaborkeca.imageio import GrayImage


def mag(values) -> MagnitudeImage:
    return MagnitudeImage(values=np.asarray(values, dtype=float))


def test_global_mean():
    assert global_mean(mag(np.full((3, 5), 7.0))) == 7.0
    assert global_mean(mag([[0, 0], [0, 4]])) == 1.0

    rng = np.random.default_rng(0)
    values = rng.uniform(0, 1000, (112, 92))
    assert global_mean(mag(values)) == pytest.approx(math.fsum(values.ravel()) / values.size, rel=1e-12)


def test_constant_image_blocks():
    assert np.all(extract_blocks(mag(np.full((9, 9), 3.5)), 3) == 3.5)


def test_mean_floors_an_all_zero_block():
    values = np.zeros((4, 4))
    values[:2, 2:] = 10.0
    values[2:, :] = 10.0
    # mean = 120 / 16 = 7.5; top-left block is all zero
    features = extract_blocks(mag(values), 2)
    assert features.tolist() == [7.5, 10.0, 10.0, 10.0]


def test_default_geometry_block_count():
    assert extract_blocks(mag(np.ones((112, 92))), 7).size == 16 * 13


def test_trailing_partial_blocks_are_dropped():
    values = np.zeros((5, 5))
    values[4, :] = 100.0
    values[:, 4] = 100.0
    # the last row and column fall outside the 2x2 grid of 2x2 blocks
    features = extract_blocks(mag(values), 2)
    assert features.size == 4
    assert np.all(features == global_mean(mag(values)))


def test_block_size_validation():
    with pytest.raises(ParameterError):
        extract_blocks(mag(np.ones((6, 6))), 0)
    with pytest.raises(ParameterError):
        extract_blocks(mag(np.ones((6, 8))), 6)


def test_chi_concatenates_in_bank_order():
    rng = np.random.default_rng(4)
    images = [mag(rng.uniform(0, 10, (14, 21))) for _ in range(3)]
    chi = extract_chi(images, 7)
    assert len(chi) == 3 * 2 * 3
    assert (chi.num_outputs, chi.blocks_per_output) == (3, 6)
    np.testing.assert_array_equal(chi.values, np.concatenate([extract_blocks(m, 7) for m in images]))

    single = extract_chi(images[:1], 7)
    np.testing.assert_array_equal(single.values, extract_blocks(images[0], 7))


def test_chi_rejects_mismatched_shapes():
    with pytest.raises(DimensionMismatchError):
        extract_chi([mag(np.ones((8, 8))), mag(np.ones((8, 9)))], 2)


def test_permuting_pixels_inside_a_block_keeps_chi():
    rng = np.random.default_rng(8)
    values = rng.uniform(0, 10, (14, 14))
    shuffled = values.copy()
    block = shuffled[7:14, 0:7].ravel()
    shuffled[7:14, 0:7] = rng.permutation(block).reshape(7, 7)
    assert np.array_equal(extract_chi([mag(values)], 7).values, extract_chi([mag(shuffled)], 7).values)


def test_every_component_is_at_least_the_mean():
    rng = np.random.default_rng(12)
    images = [mag(rng.exponential(3.0, (21, 28))) for _ in range(4)]
    chi = extract_chi(images, 7).values.reshape(4, -1)
    for row, img in zip(chi, images):
        assert np.all(row >= global_mean(img))


def test_raising_a_pixel_never_lowers_chi():
    rng = np.random.default_rng(13)
    values = rng.uniform(0, 10, (14, 14))
    before = extract_chi([mag(values)], 7).values
    raised = values.copy()
    raised[3, 9] += 25.0
    after = extract_chi([mag(raised)], 7).values
    assert np.all(after >= before)


def test_extract_image_default_geometry():
    img = GrayImage.from_array(np.random.default_rng(21).uniform(0, 255, (112, 92)))
    chi = extract_image(img, make_bank(GaborParams()), block_size=7, label="s1")
    assert len(chi) == 8320
    assert chi.label == "s1"
    again = extract_image(img, make_bank(GaborParams()), block_size=7)
    assert np.array_equal(chi.values, again.values)
