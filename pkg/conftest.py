"""Shared fixtures: synthetic stripe "identities" that the full pipeline separates."""
import numpy as np
import pytest

from gaborkeca.imageio import DatasetEntry, GrayImage, LabeledDataset, Role, save_pgm
from gaborkeca.settings import PipelineConfig

SIZE = 48
PERIOD = 8


def stripe_array(kind: str, rng=None, noise: float = 0.0) -> np.ndarray:
    """128 +/- 60 sinusoidal stripes: vertical, horizontal or diagonal."""
    y, x = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    phase = {"vertical": x, "horizontal": y, "diagonal": x + y}[kind]
    arr = 128.0 + 60.0 * np.sin(2.0 * np.pi * phase / PERIOD)
    if rng is not None and noise > 0:
        arr = arr + rng.normal(0.0, noise, arr.shape)
    return np.clip(np.rint(arr), 0, 255)


def stripe_image(kind: str, rng=None, noise: float = 0.0) -> GrayImage:
    return GrayImage.from_array(stripe_array(kind, rng, noise))


LAYOUT = [
    # (identity, stripe kind, role, count)
    ("A", "vertical", Role.TRAIN, 3),
    ("B", "horizontal", Role.TRAIN, 2),
    ("A", "vertical", Role.POSITIVE, 2),
    ("B", "horizontal", Role.POSITIVE, 2),
    ("C", "diagonal", Role.NEGATIVE, 2),
]


@pytest.fixture
def separable_config():
    return PipelineConfig(
        image_width=SIZE,
        image_height=SIZE,
        kernel="gaussian",
        kernel_sigma=0.25,
        k=2,
    )


@pytest.fixture
def separable_dataset():
    rng = np.random.default_rng(7)
    entries = []
    for label, kind, role, count in LAYOUT:
        entries.extend(DatasetEntry(stripe_image(kind, rng, noise=1.5), label, role) for _ in range(count))
    return LabeledDataset(tuple(entries))


@pytest.fixture
def separable_manifest(tmp_path):
    """The separable layout written as PGM files plus a manifest and a matching config file."""
    rng = np.random.default_rng(7)
    lines = ["path,label,role"]
    for label, kind, role, count in LAYOUT:
        for i in range(count):
            name = f"img/{label}_{role.value}_{i}.pgm"
            save_pgm(stripe_image(kind, rng, noise=1.5), tmp_path / name)
            lines.append(f"{name},{label},{role.value}")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    cfg = tmp_path / "pipeline.conf"
    cfg.write_text(
        "# separable synthetic identities\n"
        f"image_width={SIZE}\nimage_height={SIZE}\n"
        "kernel=gaussian\nkernel_sigma=0.25\nk=2\n",
        encoding="utf-8",
    )
    return manifest, cfg
