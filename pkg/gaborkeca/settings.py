"""
Pipeline configuration.

Values are resolved with the precedence CLI flag > --config file >
environment (GKECA_*) > config.py default. The config file is a flat
``key=value`` text file whose keys are the field names below.
"""
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values

import config
from .classify import Measure
from .exceptions import ParameterError
from .features import FeatureParams
from .gabor import GaborParams
from .kernels import KernelSpec
from .keca import EIG_SOLVERS, SELECTIONS

logger = logging.getLogger(__name__)

MEASURE_ALL = "all"
_NONE_TOKENS = ("", "none", "null")
_TRUE_TOKENS = ("1", "true", "yes", "on")
_FALSE_TOKENS = ("0", "false", "no", "off")


@dataclass(frozen=True)
class PipelineConfig:
    image_width: int = config.IMAGE_WIDTH
    image_height: int = config.IMAGE_HEIGHT
    num_scales: int = config.NUM_SCALES
    num_orientations: int = config.NUM_ORIENTATIONS
    k_max: float = config.K_MAX
    spacing: float = config.SPACING
    sigma: float = config.SIGMA
    window: int = config.WINDOW
    dc_mode: str = config.DC_MODE
    wrap: bool = config.WRAP
    block_size: int = config.BLOCK_SIZE
    kernel: str = config.KERNEL
    kernel_sigma: float = config.KERNEL_SIGMA
    poly_degree: int = config.POLY_DEGREE
    poly_offset: float = config.POLY_OFFSET
    normalize_inputs: bool = config.NORMALIZE_INPUTS
    k: Optional[int] = None
    energy: float = config.ENERGY
    selection: str = config.SELECTION
    eig_solver: str = config.EIG_SOLVER
    measure: str = config.MEASURE
    tau: Optional[float] = None
    tau_min: Optional[float] = None
    tau_max: Optional[float] = None
    tau_steps: int = config.TAU_STEPS
    seed: int = config.SEED
    threads: int = config.THREADS

    def __post_init__(self):
        if self.image_width < 1 or self.image_height < 1:
            raise ParameterError(f"image size must be positive, got {self.image_width}x{self.image_height}")
        self.gabor_params()
        self.feature_params().validate_for(self.image_height, self.image_width)
        self.kernel_spec()
        if self.k is not None and self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if not 0 < self.energy <= 1:
            raise ParameterError(f"energy must be in (0, 1], got {self.energy}")
        if self.selection not in SELECTIONS:
            raise ParameterError(f"selection must be one of {SELECTIONS}, got {self.selection!r}")
        if self.eig_solver not in EIG_SOLVERS:
            raise ParameterError(f"eig_solver must be one of {EIG_SOLVERS}, got {self.eig_solver!r}")
        self.measures()
        for name in ("tau", "tau_min", "tau_max"):
            value = getattr(self, name)
            if value is not None and math.isnan(value):
                raise ParameterError(f"{name} must not be NaN")
        if self.tau_min is not None and self.tau_max is not None and self.tau_max < self.tau_min:
            raise ParameterError(f"tau_max {self.tau_max} is below tau_min {self.tau_min}")
        if self.tau_steps < 1:
            raise ParameterError(f"tau_steps must be >= 1, got {self.tau_steps}")
        if self.threads < 1:
            raise ParameterError(f"threads must be >= 1, got {self.threads}")

    # --- derived sub-configs ----------------------------------------------

    def gabor_params(self) -> GaborParams:
        return GaborParams(
            num_scales=self.num_scales,
            num_orientations=self.num_orientations,
            k_max=self.k_max,
            f=self.spacing,
            sigma=self.sigma,
            window=self.window,
            dc_mode=self.dc_mode,
        )

    def feature_params(self) -> FeatureParams:
        return FeatureParams(block_size=self.block_size)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec.build(
            self.kernel,
            sigma=self.kernel_sigma,
            degree=self.poly_degree,
            offset=self.poly_offset,
            normalize_inputs=self.normalize_inputs,
        )

    def measures(self):
        """Measures this config evaluates: one, or all four for ``measure=all``."""
        if str(self.measure).lower() == MEASURE_ALL:
            return list(Measure)
        return [Measure.parse(self.measure)]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    # --- construction -----------------------------------------------------

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any], base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        """Overlay ``values`` (strings or typed) on ``base``; unknown keys are rejected."""
        known = {f.name: f for f in fields(cls)}
        merged = (base or cls()).to_dict()
        for key, raw in values.items():
            name = key.strip().lower().replace("-", "_")
            if name not in known:
                raise ParameterError(f"unknown config key '{key}'", key=key)
            merged[name] = _coerce(name, raw, known[name].default)
        return cls(**merged)

    @classmethod
    def from_sources(
        cls,
        config_file: Optional[Union[str, Path]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "PipelineConfig":
        settings = cls()
        if config_file is not None:
            path = Path(config_file)
            if not path.is_file():
                raise ParameterError(f"config file not found: {path}", path=str(path))
            values = dotenv_values(path)
            bare = [key for key, value in values.items() if value is None]
            if bare:
                raise ParameterError(f"config line without a value: {bare[0]} (expected key=value)", key=bare[0])
            settings = cls.from_mapping(values, base=settings)
            logger.debug(f"Loaded config file {path}")
        if overrides:
            settings = cls.from_mapping({k: v for k, v in overrides.items() if v is not None}, base=settings)
        return settings


def _coerce(name: str, raw: Any, default: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    token = raw.strip()
    try:
        if name in ("k",):
            return None if token.lower() in _NONE_TOKENS else int(token)
        if name in ("tau", "tau_min", "tau_max"):
            return None if token.lower() in _NONE_TOKENS else float(token)
        if isinstance(default, bool):
            lowered = token.lower()
            if lowered in _TRUE_TOKENS:
                return True
            if lowered in _FALSE_TOKENS:
                return False
            raise ValueError(token)
        if isinstance(default, int):
            return int(token)
        if isinstance(default, float):
            return float(token)
    except ValueError:
        raise ParameterError(f"invalid value for {name}: '{raw}'", key=name) from None
    return token
