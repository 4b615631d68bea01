"""Matrix files (rcur-bin, CSV) and 8-bit PGM frame sequences."""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Union

import numpy as np

MAGIC = b"RCUR"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

PathLike = Union[str, Path]


class MatrixFormatError(ValueError):
    """Malformed matrix or image file."""


def save_matrix(A, path: PathLike, fmt: str | None = None) -> Path:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("only 2-D matrices can be saved")
    if not np.all(np.isfinite(A)):
        raise MatrixFormatError("refusing to write non-finite values")
    path = Path(path)
    fmt = fmt or _guess_format(path)
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, A.shape[0], A.shape[1]))
            fh.write(np.ascontiguousarray(A, dtype="<f8").tobytes())
    elif fmt == "csv":
        # repr-precision keeps CSV round trips exact for doubles
        with open(path, "w") as fh:
            for row in A:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    return path


def load_matrix(path: PathLike, fmt: str | None = None) -> np.ndarray:
    path = Path(path)
    fmt = fmt or _guess_format(path)
    if fmt == "bin":
        return _load_bin(path)
    if fmt == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown matrix format {fmt!r}")


def _guess_format(path: Path) -> str:
    return "csv" if path.suffix.lower() == ".csv" else "bin"


def _load_bin(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise MatrixFormatError(
            f"{path}: truncated header, missing {_HEADER.size - len(raw)} bytes")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise MatrixFormatError(f"{path}: unsupported version {version}")
    expected = rows * cols * 8
    body = len(raw) - _HEADER.size
    if body < expected:
        raise MatrixFormatError(f"{path}: truncated data, missing {expected - body} bytes")
    if body > expected:
        raise MatrixFormatError(f"{path}: {body - expected} trailing bytes after data")
    A = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=_HEADER.size)
    A = A.astype(np.float64).reshape(rows, cols)
    if not np.all(np.isfinite(A)):
        raise MatrixFormatError(f"{path}: non-finite values")
    return A


def _load_csv(path: Path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise MatrixFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise MatrixFormatError(f"{path}: empty file")
    width = len(rows[0])
    for i, row in enumerate(rows, 1):
        if len(row) != width:
            raise MatrixFormatError(f"{path}: row {i} has {len(row)} fields, expected {width}")
    A = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise MatrixFormatError(f"{path}: non-finite values")
    return A


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos:pos + 1].isspace():
            pos += 1
        elif data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def read_pgm(path: PathLike) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM into a ``height x width`` uint8 array."""
    path = Path(path)
    data = path.read_bytes()
    magic, pos = _read_token(data, 0)
    if magic != b"P5":
        raise MatrixFormatError(f"{path}: not a binary PGM (magic {magic!r})")
    fields = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise MatrixFormatError(f"{path}: bad header field {tok!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise MatrixFormatError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    pos += 1  # single whitespace byte before the raster
    need = width * height
    if len(data) - pos < need:
        raise MatrixFormatError(f"{path}: truncated raster, missing {need - (len(data) - pos)} bytes")
    return np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(height, width).copy()


def write_pgm(image, path: PathLike) -> Path:
    """Write an image as 8-bit P5 PGM, clamping to [0, 255] and rounding half to even."""
    img = np.rint(np.clip(np.asarray(image, dtype=np.float64), 0.0, 255.0)).astype(np.uint8)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())
    return path


def frames_to_matrix(directory: PathLike) -> tuple[np.ndarray, int, int]:
    """Stack the ``*.pgm`` frames of a directory (lexicographic order) as columns.

    Returns ``(matrix, height, width)``; column ``j`` is frame ``j`` in
    row-major pixel order.
    """
    files = sorted(Path(directory).glob("*.pgm"))
    if not files:
        raise MatrixFormatError(f"{directory}: no .pgm frames found")
    first = read_pgm(files[0])
    height, width = first.shape
    out = np.empty((height * width, len(files)))
    out[:, 0] = first.ravel()
    for j, f in enumerate(files[1:], 1):
        img = read_pgm(f)
        if img.shape != (height, width):
            raise MatrixFormatError(f"{f}: frame is {img.shape[0]}x{img.shape[1]}, "
                                    f"expected {height}x{width}")
        out[:, j] = img.ravel()
    return out, height, width


def matrix_to_frames(A, height: int, width: int, out_dir: PathLike, prefix: str = "frame") -> list[Path]:
    """Write each column of ``A`` as a PGM frame ``<prefix>_00000.pgm`` ..."""
    A = np.asarray(A, dtype=np.float64)
    if A.shape[0] != height * width:
        raise ValueError(f"matrix has {A.shape[0]} rows, frames need {height * width}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digits = max(5, len(str(A.shape[1])))
    return [write_pgm(A[:, j].reshape(height, width), out_dir / f"{prefix}_{j:0{digits}d}.pgm")
            for j in range(A.shape[1])]


def write_json(obj, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")
