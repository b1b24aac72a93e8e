"""
Grayscale image loading, rescaling and labeled dataset ingestion.

Images are PGM rasters (binary P5 or ASCII P2, maxval <= 255). Datasets are
described by a CSV manifest with the header ``path,label,role``.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import IMAGE_HEIGHT, IMAGE_WIDTH
from .exceptions import (
    DuplicateEntryError,
    GaborKecaError,
    ImageNotFoundError,
    MalformedHeaderError,
    ManifestError,
    ParameterError,
    TruncatedDataError,
    UnknownRoleError,
    UnreadableImageError,
    UnsupportedMaxvalError,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
_WHITESPACE = b" \t\r\n\v\f"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable grayscale raster; ``data`` has shape (height, width)."""
    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise ParameterError(f"image dimensions must be positive, got {self.width}x{self.height}")
        arr = np.array(self.data, dtype=np.float64)
        if arr.size != self.width * self.height:
            raise ParameterError(
                f"{self.width}x{self.height} image needs {self.width * self.height} pixels, got {arr.size}"
            )
        arr = arr.reshape(self.height, self.width)
        if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255:
            raise ParameterError("intensities must be finite and within [0, 255]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, values) -> "GrayImage":
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ParameterError(f"expected a 2-D array, got shape {arr.shape}")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)

    @property
    def pixels(self) -> np.ndarray:
        """Row-major flat view of the intensities."""
        return self.data.ravel()

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width


class Role(str, Enum):
    TRAIN = "train"
    POSITIVE = "positive-test"
    NEGATIVE = "negative-test"

    @classmethod
    def parse(cls, token: str) -> "Role":
        try:
            return cls(token.strip())
        except ValueError:
            raise UnknownRoleError(f"unknown role '{token}'", role=token) from None


@dataclass(frozen=True)
class DatasetEntry:
    image: GrayImage
    label: str
    role: Role
    path: Optional[str] = None


@dataclass(frozen=True)
class LabeledDataset:
    entries: Tuple[DatasetEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def by_role(self, role: Role) -> Tuple[DatasetEntry, ...]:
        return tuple(e for e in self.entries if e.role == role)

    @property
    def class_labels(self) -> Tuple[str, ...]:
        return tuple(sorted({e.label for e in self.entries if e.role == Role.TRAIN}))


# --- PGM ------------------------------------------------------------------

def _header_tokens(raw: bytes, count: int) -> Tuple[list, int]:
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    tokens = []
    pos = 0
    n = len(raw)
    while len(tokens) < count:
        while pos < n and raw[pos] in _WHITESPACE:
            pos += 1
        if pos >= n:
            raise MalformedHeaderError(f"header ends after {len(tokens)} of {count} fields")
        if raw[pos] == ord("#"):
            while pos < n and raw[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and raw[pos] not in _WHITESPACE and raw[pos] != ord("#"):
            pos += 1
        tokens.append(raw[start:pos])
    return tokens, pos


def _parse_int(token: bytes, what: str) -> int:
    try:
        return int(token.decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise MalformedHeaderError(f"{what} is not an integer: {token!r}") from None


def decode_pgm(raw: bytes) -> GrayImage:
    """Decode P5/P2 bytes into a GrayImage, keeping intensities verbatim."""
    tokens, pos = _header_tokens(raw, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P2"):
        raise MalformedHeaderError(f"unsupported magic number {magic!r}")
    width = _parse_int(tokens[1], "width")
    height = _parse_int(tokens[2], "height")
    maxval = _parse_int(tokens[3], "maxval")
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"non-positive dimensions {width}x{height}")
    if maxval < 1:
        raise MalformedHeaderError(f"non-positive maxval {maxval}")
    if maxval > 255:
        raise UnsupportedMaxvalError(f"maxval {maxval} > 255", maxval=maxval)

    expected = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        if pos >= len(raw) or raw[pos] not in _WHITESPACE:
            raise TruncatedDataError("no raster after header", expected=expected, found=0)
        body = raw[pos + 1:]
        if len(body) < expected:
            raise TruncatedDataError(
                f"header declares {expected} pixels, found {len(body)}", expected=expected, found=len(body)
            )
        values = np.frombuffer(body, dtype=np.uint8, count=expected).astype(np.float64)
    else:
        words = raw[pos:].split()
        if len(words) < expected:
            raise TruncatedDataError(
                f"header declares {expected} pixels, found {len(words)}", expected=expected, found=len(words)
            )
        values = np.array([_parse_int(w, "pixel") for w in words[:expected]], dtype=np.float64)

    if values.size and values.max() > maxval:
        raise MalformedHeaderError(f"pixel value {int(values.max())} exceeds maxval {maxval}")
    return GrayImage(width=width, height=height, data=values)


def load_pgm(path: PathLike) -> GrayImage:
    p = Path(path)
    if not p.is_file():
        raise ImageNotFoundError(f"image not found: {p}", path=str(p))
    return decode_pgm(p.read_bytes())


def save_pgm(img: GrayImage, path: PathLike, binary: bool = True) -> str:
    """Write ``img`` as P5 (or P2) with maxval 255; intensities must be integral."""
    if not np.all(np.equal(np.mod(img.data, 1.0), 0.0)):
        raise ParameterError("PGM output needs integral intensities; round the image first")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    raster = img.data.astype(np.uint8)
    if binary:
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        p.write_bytes(header + raster.tobytes())
    else:
        rows = "\n".join(" ".join(str(v) for v in row) for row in raster)
        p.write_text(f"P2\n{img.width} {img.height}\n255\n{rows}\n", encoding="ascii")
    return str(p.resolve())


def to_uint8_rescaled(values) -> GrayImage:
    """Linearly map a real array onto [0, 255] integers (constant input maps to 0)."""
    arr = np.asarray(values, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if hi > lo:
        scaled = np.rint((arr - lo) * (255.0 / (hi - lo)))
    else:
        scaled = np.zeros_like(arr)
    return GrayImage.from_array(np.clip(scaled, 0, 255))


# --- resampling -----------------------------------------------------------

def _sample_positions(src: int, dst: int) -> np.ndarray:
    # endpoint aligned: t * (src - 1) / (dst - 1)
    if dst == 1:
        return np.zeros(1)
    return np.arange(dst, dtype=np.float64) * (src - 1) / (dst - 1)


def resize_bilinear(img: GrayImage, target_w: int, target_h: int) -> GrayImage:
    if target_w < 1 or target_h < 1:
        raise ParameterError(f"target dimensions must be positive, got {target_w}x{target_h}")
    if (target_w, target_h) == (img.width, img.height):
        return img

    src = img.data
    xs = _sample_positions(img.width, target_w)
    ys = _sample_positions(img.height, target_h)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1 = np.minimum(x0 + 1, img.width - 1)
    y1 = np.minimum(y0 + 1, img.height - 1)
    fx = (xs - x0)[None, :]
    fy = (ys - y0)[:, None]

    top = src[y0][:, x0] + fx * (src[y0][:, x1] - src[y0][:, x0])
    bottom = src[y1][:, x0] + fx * (src[y1][:, x1] - src[y1][:, x0])
    out = top + fy * (bottom - top)
    out = np.clip(out, src.min(), src.max())
    return GrayImage.from_array(out)


# --- manifests ------------------------------------------------------------

def load_manifest(
    path: PathLike,
    width: int = IMAGE_WIDTH,
    height: int = IMAGE_HEIGHT,
) -> LabeledDataset:
    """
    Read a ``path,label,role`` CSV manifest.

    Image paths are resolved relative to the manifest's directory. Every image
    is rescaled to ``width`` x ``height``.
    """
    manifest = Path(path)
    if not manifest.is_file():
        raise ManifestError(f"manifest not found: {manifest}", path=str(manifest))
    try:
        frame = pd.read_csv(manifest, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise ManifestError(f"manifest has no header: {manifest}", path=str(manifest)) from None

    columns = [c.strip() for c in frame.columns]
    if columns != ["path", "label", "role"]:
        raise ManifestError(f"manifest header must be 'path,label,role', got {','.join(columns)}")
    frame.columns = columns

    rows = []
    seen = set()
    for row in frame.itertuples(index=False):
        role = Role.parse(row.role)
        key = (row.path.strip(), role)
        if key in seen:
            raise DuplicateEntryError(f"duplicate row for {key[0]} ({role.value})", path=key[0])
        seen.add(key)
        rows.append((row.path.strip(), row.label.strip(), role))

    entries = []
    for rel, label, role in rows:
        image_path = Path(rel) if Path(rel).is_absolute() else manifest.parent / rel
        try:
            image = load_pgm(image_path)
        except GaborKecaError as e:
            raise UnreadableImageError(f"cannot load {image_path}: {e.detail}", path=str(image_path)) from e
        entries.append(DatasetEntry(resize_bilinear(image, width, height), label, role, str(image_path)))

    logger.info(f"Loaded {len(entries)} manifest entries from {manifest}")
    return LabeledDataset(tuple(entries))


def compose_classes(
    identities: Mapping[str, Sequence[GrayImage]],
    n_train: int,
    n_impostors: int,
    seed: int,
    impostor_pool: Optional[Mapping[str, Sequence[GrayImage]]] = None,
) -> LabeledDataset:
    """
    Build the positive/negative protocol dataset from images grouped by identity.

    For each identity the first ``n_train`` images train its class and the
    remainder are positive probes. ``n_impostors`` images of ``impostor_pool``
    are drawn per class with a seeded permutation and entered as negative
    probes under their own identity label. Pool identities must not be
    enrolled.
    """
    if n_train < 1:
        raise ParameterError(f"n_train must be >= 1, got {n_train}")
    if n_impostors < 0:
        raise ParameterError(f"n_impostors must be >= 0, got {n_impostors}")

    pool = dict(impostor_pool or {})
    enrolled = sorted(set(pool) & set(identities))
    if enrolled:
        raise ParameterError(
            f"impostor identities are also enrolled: {', '.join(enrolled)}", labels=enrolled
        )
    candidates = [(other, img) for other in sorted(pool) for img in pool[other]]
    if len(candidates) < n_impostors:
        raise ParameterError(
            f"only {len(candidates)} held-out impostor images, need {n_impostors} per class"
        )

    rng = np.random.default_rng(seed)
    entries = []
    for label in sorted(identities):
        images = list(identities[label])
        if len(images) <= n_train:
            raise ParameterError(f"identity {label} has {len(images)} images, needs more than {n_train}")
        entries.extend(DatasetEntry(img, label, Role.TRAIN) for img in images[:n_train])
        entries.extend(DatasetEntry(img, label, Role.POSITIVE) for img in images[n_train:])

        for index in rng.permutation(len(candidates))[:n_impostors]:
            other, img = candidates[index]
            entries.append(DatasetEntry(img, other, Role.NEGATIVE))

    logger.info(
        f"Composed {len(identities)} classes with {len(pool)} impostor identities "
        f"(seed={seed}): {len(entries)} entries"
    )
    return LabeledDataset(tuple(entries))

