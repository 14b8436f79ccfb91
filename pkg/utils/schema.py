"""
JSON schema validation for run configs and KForm fixtures.
"""

import json
from functools import lru_cache
from typing import Any, Dict, Sequence, Union

import jsonschema


class SchemaViolation(ValueError):
    """A JSON document does not match its schema; `path` locates the field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.detail = message


def json_path(parts: Sequence[Union[str, int]]) -> str:
    """Render a jsonschema error path as $.field[index]."""
    path = "$"
    for part in parts:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def load_json_file(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


@lru_cache(maxsize=None)
def _load_schema(schema_path: str) -> Dict[str, Any]:
    return load_json_file(schema_path)


def validate_payload(obj: Any, schema_path: str) -> None:
    """
    Validate a parsed JSON document against a schema file.

    Args:
        obj: Parsed JSON
        schema_path: Path of the JSON schema

    Raises:
        SchemaViolation: with the path of the offending field
    """
    try:
        jsonschema.validate(instance=obj, schema=_load_schema(schema_path))
    except jsonschema.ValidationError as e:
        raise SchemaViolation(e.message, json_path(e.absolute_path)) from e
