import json
import logging
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

import numpy as np

logger = logging.getLogger(__name__)


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


def _json_default(obj: Any):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    return str(obj)


def to_json(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, stable separators)."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, default=_json_default)


def save_json(obj: Any, path: Union[str, Path]) -> str:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(to_json(obj) + "\n", encoding="utf-8")
    return str(p.resolve())


def save_text(text: str, path: Union[str, Path]) -> str:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")
    return str(p.resolve())


def sibling_path(path: Union[str, Path], suffix: str) -> Path:
    """``report.csv`` -> ``report.<suffix>`` in the same directory."""
    p = Path(path)
    return p.with_name(f"{p.stem}.{suffix.lstrip('.')}")
