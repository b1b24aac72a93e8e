# Default configuration for the Gabor + KECA recognition pipeline.
# Every value can be overridden from the environment (GKECA_<NAME>, also read
# from a local .env), from a --config file, or from a CLI flag.

import math
import os

from dotenv import load_dotenv

load_dotenv()


def _env(name: str, default):
    raw = os.getenv(f"GKECA_{name}")
    if raw is None or raw == "":
        return default
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


DEFAULT_OUTPUT_DIR = _env("OUTPUT_DIR", "output")

# Working image size (all images are rescaled to this before filtering)
IMAGE_WIDTH = _env("IMAGE_WIDTH", 92)
IMAGE_HEIGHT = _env("IMAGE_HEIGHT", 112)

# Gabor bank: 5 scales x 8 orientations = 40 kernels
NUM_SCALES = _env("NUM_SCALES", 5)
NUM_ORIENTATIONS = _env("NUM_ORIENTATIONS", 8)
K_MAX = _env("K_MAX", math.pi / 2)
SPACING = _env("SPACING", math.sqrt(2.0))
SIGMA = _env("SIGMA", 2 * math.pi)
WINDOW = _env("WINDOW", 33)
DC_MODE = _env("DC_MODE", "lattice")  # lattice | analytic
WRAP = _env("WRAP", False)  # fold kernel taps onto the image torus (images smaller than WINDOW)

# Discriminative feature extraction
BLOCK_SIZE = _env("BLOCK_SIZE", 7)

# Kernel function for the entropy component stage
KERNEL = _env("KERNEL", "cosine")  # cosine | gaussian | polynomial
KERNEL_SIGMA = _env("KERNEL_SIGMA", 1.0)
POLY_DEGREE = _env("POLY_DEGREE", 2)
POLY_OFFSET = _env("POLY_OFFSET", 1.0)
NORMALIZE_INPUTS = _env("NORMALIZE_INPUTS", True)

# Axis selection
ENERGY = _env("ENERGY", 0.95)  # used when no explicit k is given
SELECTION = _env("SELECTION", "entropy")  # entropy | eigenvalue
EIG_SOLVER = _env("EIG_SOLVER", "jacobi")  # jacobi | numpy
EIG_MAX_SWEEPS = _env("EIG_MAX_SWEEPS", 100)
EIG_TOLERANCE = 1e-12

# Classification / evaluation
MEASURE = _env("MEASURE", "mahalanobis")
TAU_STEPS = _env("TAU_STEPS", 10)
SEED = _env("SEED", 0)
THREADS = _env("THREADS", 1)

MODEL_MAGIC = b"GKECAMDL"
MODEL_FORMAT_VERSION = 1
