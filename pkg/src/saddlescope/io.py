"""Reading and writing the JSON file formats, with line context in error messages."""

from __future__ import annotations

import json
import re
from pathlib import Path

from .differentials import InvalidDifferential, QuadraticDifferential
from .quivers import Quiver
from .stability import StableSpectrum
from .surfaces import SignedTriangulation, TriangulationError

__all__ = [
    "ParseError",
    "read_json",
    "load_triangulation",
    "load_differential",
    "load_quiver",
    "load_spectrum",
    "dumps",
]


class ParseError(ValueError):
    """A file could not be parsed or failed validation."""


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def read_json(path) -> tuple:
    """(parsed object, raw text) of a JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror}") from None
    try:
        return json.loads(text), text
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None


def _context(path, text, err, keys=("triangles", "corners", "arcs", "surface", "signs", "numerator", "poles")) -> str:
    msg = str(err)
    for k in keys:
        # messages usually name a single item, such as "triangle" for the key "triangles"
        if k.rstrip("s") in msg:
            line = _line_of(text, k)
            if line:
                return f"{path}:{line}: {msg}"
    return f"{path}: {msg}"


def load_triangulation(path) -> SignedTriangulation:
    data, text = read_json(path)
    if not isinstance(data, dict):
        raise ParseError(f"{path}:1: a triangulation file holds a JSON object")
    try:
        return SignedTriangulation.from_dict(data)
    except (TriangulationError, ValueError, TypeError) as e:
        raise ParseError(_context(path, text, e)) from None


def load_differential(path) -> QuadraticDifferential:
    data, text = read_json(path)
    if not isinstance(data, dict):
        raise ParseError(f"{path}:1: a differential file holds a JSON object")
    try:
        return QuadraticDifferential.from_dict(data)
    except (InvalidDifferential, ValueError, TypeError) as e:
        raise ParseError(_context(path, text, e)) from None


def load_quiver(path) -> Quiver:
    data, text = read_json(path)
    try:
        return Quiver.from_dict(data)
    except (KeyError, ValueError, TypeError) as e:
        raise ParseError(_context(path, text, e, ("vertices", "matrix"))) from None


def load_spectrum(path) -> StableSpectrum:
    data, text = read_json(path)
    try:
        return StableSpectrum.from_list(data)
    except (KeyError, ValueError, TypeError) as e:
        raise ParseError(f"{path}: {e}") from None


def dumps(obj) -> str:
    """JSON text of any object with a to_dict/to_list method (or plain data)."""
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    elif hasattr(obj, "to_list"):
        obj = obj.to_list()
    return json.dumps(obj, indent=2) + "\n"
