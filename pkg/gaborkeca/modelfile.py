"""
Versioned binary model file.

    magic            8 bytes  b"GKECAMDL"
    version          uint32 LE
    header length    uint32 LE
    header           UTF-8 JSON, sorted keys
    arrays           little-endian float64, in the order listed by header["arrays"]
"""
import json
import logging
import struct
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from config import MODEL_FORMAT_VERSION, MODEL_MAGIC
from .classify import ClassModel
from .exceptions import GaborKecaError, ModelFormatError
from .keca import EntropyRanking, KecaModel
from .kernels import KernelSpec
from .pipeline import FittedPipeline
from .settings import PipelineConfig

logger = logging.getLogger(__name__)

_U32 = struct.Struct("<I")
_FLOAT = np.dtype("<f8")


def _arrays(fitted: FittedPipeline) -> List[Tuple[str, np.ndarray]]:
    m, c = fitted.model, fitted.classes
    return [
        ("train_features", m.train_features),
        ("eigenvalues", m.eigenvalues),
        ("eigenvectors", m.eigenvectors),
        ("axes", m.axes),
        ("contributions", m.ranking.contributions),
        ("axis_sums", m.ranking.axis_sums),
        ("order", m.ranking.order),
        ("class_means", c.means),
        ("covariance", c.covariance),
        ("precision", c.precision),
    ]


def dumps_model(fitted: FittedPipeline) -> bytes:
    arrays = _arrays(fitted)
    m = fitted.model
    header = {
        "config": fitted.config.to_dict(),
        "kernel": m.spec.to_dict(),
        "feature_length": m.feature_length,
        "n_train": m.n_train,
        "requested_k": m.requested_k,
        "effective_k": m.effective_k,
        "selection": m.selection,
        "class_labels": list(fitted.classes.labels),
        "ridge": fitted.classes.ridge,
        "arrays": [{"name": name, "shape": list(np.shape(a))} for name, a in arrays],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MODEL_MAGIC, _U32.pack(MODEL_FORMAT_VERSION), _U32.pack(len(blob)), blob]
    parts.extend(np.ascontiguousarray(a, dtype=_FLOAT).tobytes() for _, a in arrays)
    return b"".join(parts)


def save_model(path: Union[str, Path], fitted: FittedPipeline) -> str:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(dumps_model(fitted))
    logger.info(f"Model saved to {p} (k={fitted.model.effective_k}, N={fitted.model.n_train})")
    return str(p.resolve())


def _read_arrays(raw: bytes, pos: int, manifest: List[dict]) -> Dict[str, np.ndarray]:
    out = {}
    for item in manifest:
        shape = tuple(int(s) for s in item["shape"])
        count = int(np.prod(shape)) if shape else 1
        size = count * _FLOAT.itemsize
        if pos + size > len(raw):
            raise ModelFormatError(f"array '{item['name']}' is truncated", array=item["name"])
        out[item["name"]] = np.frombuffer(raw, dtype=_FLOAT, count=count, offset=pos).astype(np.float64).reshape(shape)
        pos += size
    if pos != len(raw):
        raise ModelFormatError(f"{len(raw) - pos} trailing bytes after the last array")
    return out


def loads_model(raw: bytes) -> FittedPipeline:
    prefix = len(MODEL_MAGIC) + 2 * _U32.size
    if len(raw) < prefix or raw[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    (version,) = _U32.unpack_from(raw, len(MODEL_MAGIC))
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}", version=version)
    (length,) = _U32.unpack_from(raw, len(MODEL_MAGIC) + _U32.size)
    if prefix + length > len(raw):
        raise ModelFormatError("model header is truncated")
    try:
        header = json.loads(raw[prefix: prefix + length].decode("utf-8"))
        arrays = _read_arrays(raw, prefix + length, header["arrays"])
        cfg = PipelineConfig.from_mapping(header["config"])
        spec = KernelSpec(**header["kernel"])
        ranking = EntropyRanking(
            contributions=arrays["contributions"],
            axis_sums=arrays["axis_sums"],
            order=arrays["order"].astype(int),
        )
        model = KecaModel(
            spec=spec,
            train_features=arrays["train_features"],
            axes=arrays["axes"].astype(int),
            eigenvalues=arrays["eigenvalues"],
            eigenvectors=arrays["eigenvectors"],
            ranking=ranking,
            requested_k=header["requested_k"],
            selection=header["selection"],
        )
        classes = ClassModel(
            labels=tuple(header["class_labels"]),
            means=arrays["class_means"],
            covariance=arrays["covariance"],
            precision=arrays["precision"],
            ridge=float(header["ridge"]),
        )
    except ModelFormatError:
        raise
    except (ValueError, KeyError, TypeError, GaborKecaError) as e:
        raise ModelFormatError(f"model header is invalid: {e}") from e
    if model.feature_length != header["feature_length"] or model.effective_k != header["effective_k"]:
        raise ModelFormatError("model header disagrees with the stored arrays")
    return FittedPipeline(config=cfg, model=model, classes=classes)


def load_model(path: Union[str, Path]) -> FittedPipeline:
    p = Path(path)
    if not p.is_file():
        raise ModelFormatError(f"model file not found: {p}", path=str(p))
    fitted = loads_model(p.read_bytes())
    logger.info(f"Model loaded from {p} (k={fitted.model.effective_k})")
    return fitted
