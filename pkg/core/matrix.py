"""
Matrix validation and the plain-text matrix format.

Format: one row per line, entries separated by commas and/or whitespace,
lines starting with '#' and blank lines ignored, every row the same length.
"""
from pathlib import Path
from typing import Iterable, Union
import io
import re
import logging

import numpy as np

from config.settings import settings
from models.errors import MatrixParseError, InvalidDimensions

logger = logging.getLogger(__name__)

_SEPARATOR = re.compile(r"[,\s]+")


def as_matrix(value, name: str = "matrix", allow_empty: bool = True) -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidDimensions(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDimensions(f"{name} contains NaN or Inf entries")
    if not allow_empty and arr.size == 0:
        raise InvalidDimensions(f"{name} has no entries, got shape {arr.shape}")
    return arr


def parse_matrix_text(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = [tok for tok in _SEPARATOR.split(stripped) if tok]
        if not tokens:
            raise MatrixParseError(f"line {lineno}: no entries")
        try:
            values = [float(tok) for tok in tokens]
        except ValueError as e:
            raise MatrixParseError(f"line {lineno}: {e}") from e
        if rows and len(values) != len(rows[0]):
            raise MatrixParseError(
                f"line {lineno}: expected {len(rows[0])} entries, found {len(values)}"
            )
        rows.append(values)

    if not rows:
        raise MatrixParseError("no matrix rows found")
    try:
        return as_matrix(rows, allow_empty=False)
    except InvalidDimensions as e:
        raise MatrixParseError(str(e)) from e


def read_matrix(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise MatrixParseError(f"cannot read {path}: {e}") from e
    matrix = parse_matrix_text(text)
    logger.debug(f"Read {matrix.shape[0]}x{matrix.shape[1]} matrix from {path}")
    return matrix


def format_matrix(matrix, header: Iterable[str] = ()) -> str:
    digits = settings.CSV_FLOAT_DIGITS
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    for row in as_matrix(matrix):
        buf.write(",".join(f"{x:.{digits}g}" for x in row))
        buf.write("\n")
    return buf.getvalue()


def write_matrix(path: Union[str, Path], matrix, header: Iterable[str] = ()) -> None:
    Path(path).write_text(format_matrix(matrix, header))
