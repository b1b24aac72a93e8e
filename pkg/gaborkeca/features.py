"""
Block-wise discriminative feature extraction from Gabor magnitude images.

Each magnitude image is tiled into non-overlapping L x L blocks anchored at
the top-left (partial blocks at the right/bottom edge are dropped). A block
contributes max(block maximum, global mean of that image). The per-image
sequences are concatenated in bank order.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import BLOCK_SIZE
from .exceptions import DimensionMismatchError, ParameterError
from .gabor import GaborKernel, MagnitudeImage, gabor_outputs
from .imageio import GrayImage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureParams:
    block_size: int = BLOCK_SIZE

    def validate_for(self, height: int, width: int) -> None:
        if not 1 <= self.block_size < min(height, width):
            raise ParameterError(
                f"block size {self.block_size} must be in [1, {min(height, width)}) for a {width}x{height} image"
            )


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    num_outputs: int
    blocks_per_output: int
    label: Optional[str] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


def global_mean(img: MagnitudeImage) -> float:
    values = np.asarray(img.values, dtype=np.float64)
    if values.size == 0:
        raise ParameterError("global mean of an empty image")
    return float(np.mean(values))


def block_grid(height: int, width: int, block_size: int) -> Tuple[int, int]:
    return height // block_size, width // block_size


def extract_blocks(img: MagnitudeImage, block_size: int) -> np.ndarray:
    """One feature per block in row-major block order: max(block max, image mean)."""
    height, width = img.shape
    FeatureParams(block_size).validate_for(height, width)
    rows, cols = block_grid(height, width, block_size)
    values = np.asarray(img.values, dtype=np.float64)
    tiles = values[: rows * block_size, : cols * block_size].reshape(rows, block_size, cols, block_size)
    block_max = tiles.max(axis=(1, 3))
    return np.maximum(block_max, global_mean(img)).ravel()


def extract_chi(magnitudes: Sequence[MagnitudeImage], block_size: int, label: Optional[str] = None) -> FeatureVector:
    if not magnitudes:
        raise ParameterError("need at least one magnitude image")
    shape = magnitudes[0].shape
    for m in magnitudes[1:]:
        if m.shape != shape:
            raise DimensionMismatchError(f"magnitude images differ in shape: {shape} vs {m.shape}")
    parts = [extract_blocks(m, block_size) for m in magnitudes]
    return FeatureVector(
        values=np.concatenate(parts),
        num_outputs=len(parts),
        blocks_per_output=parts[0].size,
        label=label,
    )


def extract_image(
    img: GrayImage,
    bank: List[GaborKernel],
    block_size: int = BLOCK_SIZE,
    label: Optional[str] = None,
    wrap: bool = False,
) -> FeatureVector:
    """Gabor magnitudes of ``img`` followed by block extraction."""
    return extract_chi(gabor_outputs(img, bank, wrap=wrap), block_size, label=label)
