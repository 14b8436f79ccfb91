"""
Bit-stable JSON and CSV writers for reports.

Floats are written with 17 significant digits and keys are sorted, so equal
payloads always serialize to equal bytes.
"""

import csv
import dataclasses
import io
import json
import math
from typing import Any, Iterable, List, Sequence

import numpy as np
from cryptography.hazmat.primitives import hashes

from utils import config


def to_plain(obj: Any) -> Any:
    """
    Convert numpy values, dataclasses and tuples into plain JSON-ready Python.

    Args:
        obj: Any nested structure

    Returns:
        Structure made of dict, list, str, int, float, bool and None
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return to_plain(obj.to_dict())
        return to_plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def format_float(value: float) -> str:
    """17 significant digits; non-finite values become null."""
    if not math.isfinite(value):
        return "null"
    text = format(value, f".{config.FLOAT_DIGITS}g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1)) if indent else ""
    close = " " * (indent * level) if indent else ""
    sep = ",\n" if indent else ","
    nl = "\n" if indent else ""
    colon = ": " if indent else ":"

    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(key, ensure_ascii=False)}{colon}{_encode(obj[key], indent, level + 1)}"
            for key in sorted(obj)
        ]
        return "{" + nl + sep.join(items) + nl + close + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        # numeric vectors stay on one line
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, 0, 0) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[" + nl + sep.join(items) + nl + close + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text for any report-like structure."""
    return _encode(to_plain(obj), indent, 0)


def sha256_hex(text: str) -> str:
    """SHA-256 digest of a UTF-8 string, hex encoded."""
    digest = hashes.Hash(hashes.SHA256())
    digest.update(text.encode("utf-8"))
    return digest.finalize().hex()


def matrix_to_json(matrix: np.ndarray) -> List[Any]:
    """Nested lists for a matrix embedded in a worst-case record."""
    return to_plain(np.asarray(matrix, dtype=float))


def csv_rows(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Render rows as CSV text with the report float format.

    Args:
        header: Column names
        rows: Row tuples

    Returns:
        CSV text with a trailing newline
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()
