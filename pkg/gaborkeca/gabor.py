"""
Gabor filter bank and DFT-based convolution.

Kernel (scale nu, orientation mu), with k = k_max / f**nu * (cos phi, sin phi),
phi = pi * mu / num_orientations and z an integer offset from the window centre:

    psi(z) = |k|^2 / sigma^2 * exp(-|k|^2 |z|^2 / (2 sigma^2)) * (exp(i k.z) - dc)

``dc`` is exp(-sigma^2 / 2) in analytic mode. In lattice mode it is the
envelope-weighted mean of exp(i k.z) over the window, which removes the DC
component exactly on the finite grid.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from config import DC_MODE, K_MAX, NUM_ORIENTATIONS, NUM_SCALES, SIGMA, SPACING, WINDOW
from .exceptions import ImageTooSmallError, ParameterError
from .imageio import GrayImage

logger = logging.getLogger(__name__)

DC_MODES = ("lattice", "analytic")


@dataclass(frozen=True)
class GaborParams:
    num_scales: int = NUM_SCALES
    num_orientations: int = NUM_ORIENTATIONS
    k_max: float = K_MAX
    f: float = SPACING
    sigma: float = SIGMA
    window: int = WINDOW
    dc_mode: str = DC_MODE

    def __post_init__(self):
        if self.num_scales < 1 or self.num_orientations < 1:
            raise ParameterError("num_scales and num_orientations must be >= 1")
        if not self.k_max > 0:
            raise ParameterError(f"k_max must be positive, got {self.k_max}")
        if not self.f > 1:
            raise ParameterError(f"scale spacing f must exceed 1, got {self.f}")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.window < 3 or self.window % 2 == 0:
            raise ParameterError(f"window must be odd and >= 3, got {self.window}")
        if self.dc_mode not in DC_MODES:
            raise ParameterError(f"dc_mode must be one of {DC_MODES}, got {self.dc_mode!r}")

    @property
    def bank_size(self) -> int:
        return self.num_scales * self.num_orientations


@dataclass(frozen=True, eq=False)
class GaborKernel:
    scale: int
    orientation: int
    wave_vector: Tuple[float, float]
    grid: np.ndarray  # [row = y + c, col = x + c]

    @property
    def window(self) -> int:
        return self.grid.shape[0]


@dataclass(frozen=True, eq=False)
class ResponseField:
    values: np.ndarray  # complex, (height, width)
    scale: int
    orientation: int


@dataclass(frozen=True, eq=False)
class MagnitudeImage:
    values: np.ndarray  # real, nonnegative, (height, width)
    scale: int = 0
    orientation: int = 0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


def wave_vector(mu: int, nu: int, p: GaborParams) -> Tuple[float, float]:
    k_nu = p.k_max / p.f ** nu
    phi = math.pi * mu / p.num_orientations
    return k_nu * math.cos(phi), k_nu * math.sin(phi)


def make_kernel(mu: int, nu: int, p: GaborParams) -> GaborKernel:
    if not 0 <= mu < p.num_orientations:
        raise ParameterError(f"orientation index {mu} outside [0, {p.num_orientations})")
    if not 0 <= nu < p.num_scales:
        raise ParameterError(f"scale index {nu} outside [0, {p.num_scales})")

    kx, ky = wave_vector(mu, nu, p)
    k2 = kx * kx + ky * ky
    s2 = p.sigma * p.sigma
    half = p.window // 2
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    y, x = np.meshgrid(offsets, offsets, indexing="ij")

    envelope = (k2 / s2) * np.exp(-k2 * (x * x + y * y) / (2.0 * s2))
    carrier = np.exp(1j * (kx * x + ky * y))
    if p.dc_mode == "analytic":
        dc = math.exp(-s2 / 2.0)
    else:
        dc = np.sum(envelope * carrier) / np.sum(envelope)
    grid = envelope * (carrier - dc)
    grid.setflags(write=False)
    return GaborKernel(scale=nu, orientation=mu, wave_vector=(kx, ky), grid=grid)


def make_bank(p: GaborParams) -> List[GaborKernel]:
    """All kernels, scale-major, orientation-minor."""
    bank = [make_kernel(mu, nu, p) for nu in range(p.num_scales) for mu in range(p.num_orientations)]
    logger.debug(f"Built Gabor bank: {len(bank)} kernels, window {p.window}, dc_mode={p.dc_mode}")
    return bank


def _kernel_on_torus(kern: GaborKernel, shape: Tuple[int, int]) -> np.ndarray:
    """Zero-pad the kernel to ``shape`` with its centre at the origin; taps wrap modulo the shape."""
    h, w = shape
    half = kern.window // 2
    offsets = np.arange(-half, half + 1)
    padded = np.zeros(shape, dtype=np.complex128)
    np.add.at(padded, np.ix_(offsets % h, offsets % w), kern.grid)
    return padded


def convolve_fft(img: GrayImage, kern: GaborKernel, wrap: bool = False) -> ResponseField:
    """
    Circular convolution through the DFT: F^-1{ F{I} . F{psi} }.

    Output pixel z holds the response of the kernel centred at z. Without
    ``wrap`` the image must be at least as large as the kernel window.
    """
    if not wrap and (img.height < kern.window or img.width < kern.window):
        raise ImageTooSmallError(
            f"{img.width}x{img.height} image is smaller than the {kern.window}x{kern.window} kernel",
            window=kern.window,
        )
    padded = _kernel_on_torus(kern, img.shape)
    out = np.fft.ifft2(np.fft.fft2(img.data) * np.fft.fft2(padded))
    return ResponseField(values=out, scale=kern.scale, orientation=kern.orientation)


def magnitude(field: ResponseField) -> MagnitudeImage:
    return MagnitudeImage(values=np.abs(field.values), scale=field.scale, orientation=field.orientation)


def gabor_outputs(img: GrayImage, bank: List[GaborKernel], wrap: bool = False) -> List[MagnitudeImage]:
    """Magnitude responses of ``img`` to every kernel, in bank order."""
    return [magnitude(convolve_fft(img, kern, wrap=wrap)) for kern in bank]
