"""Plain-text storage for complex matrices.

Each matrix is one record: a header line ``rows cols`` followed by
``rows*cols`` lines of ``re im`` pairs in row-major order.  A file may
hold several records back to back.  Lines starting with ``#`` and blank
lines are ignored.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_complex_matrices(path: str | Path, matrices) -> None:
    """Write a sequence of 2-D complex arrays to *path*."""
    lines = []
    for mat in matrices:
        arr = np.asarray(mat, dtype=complex)
        if arr.ndim != 2:
            raise ValueError("only 2-D matrices can be serialized")
        lines.append(f"{arr.shape[0]} {arr.shape[1]}")
        for value in arr.ravel():
            lines.append(f"{value.real:.17g} {value.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_complex_matrices(path: str | Path) -> list[np.ndarray]:
    """Read every matrix record stored in *path*."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens.extend(stripped.split())
    matrices = []
    pos = 0
    while pos < len(tokens):
        if pos + 2 > len(tokens):
            raise ValueError(f"{path}: truncated matrix header")
        try:
            rows, cols = int(tokens[pos]), int(tokens[pos + 1])
        except ValueError as exc:
            raise ValueError(f"{path}: malformed matrix header near token {pos}") from exc
        if rows < 1 or cols < 1:
            raise ValueError(f"{path}: nonpositive matrix dimensions {rows}x{cols}")
        pos += 2
        count = 2 * rows * cols
        if pos + count > len(tokens):
            raise ValueError(f"{path}: matrix body shorter than {rows}x{cols} header")
        try:
            flat = np.array(tokens[pos : pos + count], dtype=float)
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric matrix entry") from exc
        pos += count
        matrices.append((flat[0::2] + 1j * flat[1::2]).reshape(rows, cols))
    if not matrices:
        raise ValueError(f"{path}: no matrix records found")
    return matrices
