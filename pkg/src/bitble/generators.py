"""Test matrices and file ingestion: Laplacians, random matrices, CSV, PGM/PPM."""
from __future__ import annotations

import os
import re

import numpy as np


class ParseError(ValueError):
    """Malformed input file; ``lineno`` is 1-based (``None`` if not line-bound)."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


def _check_qubits(*counts: int):
    for n in counts:
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"qubit counts must be positive integers, got {n!r}")


def laplacian_1d(n: int, periodic: bool = False) -> np.ndarray:
    """``2`` on the diagonal, ``-1`` off it, on ``2**n`` points; corners ``-1`` if periodic."""
    _check_qubits(n)
    size = 1 << n
    L = 2.0 * np.eye(size) - np.eye(size, k=1) - np.eye(size, k=-1)
    if periodic:
        # for size 2 the corners are the off-diagonal entries themselves
        L[0, -1] = L[-1, 0] = -1.0
    return L


def laplacian_2d(n_x: int, n_y: int, periodic: bool = False) -> np.ndarray:
    """Kronecker sum ``L_x (x) I + I (x) L_y``."""
    _check_qubits(n_x, n_y)
    lx, ly = laplacian_1d(n_x, periodic), laplacian_1d(n_y, periodic)
    return np.kron(lx, np.eye(len(ly))) + np.kron(np.eye(len(lx)), ly)


def random_matrix(n: int, complex: bool = False, seed=None) -> np.ndarray:
    """Standard-normal ``2**n x 2**n`` matrix from a seeded generator."""
    _check_qubits(n)
    rng = np.random.default_rng(seed)
    size = 1 << n
    A = rng.standard_normal((size, size))
    if complex:
        A = A + 1j * rng.standard_normal((size, size))
    return A


def pad_to_power_of_two(M: np.ndarray) -> np.ndarray:
    """Zero-pad to a square power-of-two size (at least 2), data in the top-left."""
    M = np.asarray(M)
    if M.ndim != 2 or 0 in M.shape:
        raise ValueError("matrix must be two-dimensional and non-empty")
    size = max(2, 1 << (max(M.shape) - 1).bit_length())
    if M.shape == (size, size):
        return M
    out = np.zeros((size, size), dtype=M.dtype)
    out[:M.shape[0], :M.shape[1]] = M
    return out


_TOKEN = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?"
                    r"([+-](\d+\.?\d*|\.\d+)([eE][+-]?\d+)?i)?")


def parse_entry(token: str, lineno: int | None = None) -> complex:
    """``a``, ``a+bi`` or ``a-bi`` with decimal or exponent notation."""
    tok = token.strip()
    if not _TOKEN.fullmatch(tok):
        raise ParseError(f"cannot parse matrix entry {token!r}", lineno)
    return complex(tok.replace("i", "j"))


def parse_csv(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        values = [parse_entry(tok, lineno) for tok in line.split(",")]
        if rows and len(values) != len(rows[0]):
            raise ParseError(f"expected {len(rows[0])} entries, found {len(values)}", lineno)
        rows.append(values)
    if not rows:
        raise ParseError("no matrix entries found")
    M = np.array(rows, dtype=np.complex128)
    if not np.any(M.imag):
        M = M.real.copy()
    return M


def load_csv(path: str | os.PathLike, *, pad: bool = True) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        M = parse_csv(fh.read())
    return pad_to_power_of_two(M) if pad else M


def _fmt_real(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(x)


def _fmt_entry(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return _fmt_real(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{_fmt_real(z.real)}{sign}{_fmt_real(abs(z.imag))}i"


def format_csv(M) -> str:
    M = np.atleast_2d(np.asarray(M))
    return "".join(",".join(_fmt_entry(x) for x in row) + "\n" for row in M)


def save_csv(path: str | os.PathLike, M) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_csv(M))


# --- netpbm ---------------------------------------------------------------

_CHANNELS = {"r": 0, "g": 1, "b": 2}


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int, int]:
    """First ``count`` whitespace-separated header tokens, skipping comments."""
    tokens: list[bytes] = []
    pos, line = 0, 1
    while len(tokens) < count:
        if pos >= len(data):
            raise ParseError("truncated header", line)
        ch = data[pos:pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end
        elif ch.isspace():
            line += ch == b"\n"
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ParseError("missing whitespace before raster data", line)
    return tokens, pos + 1, line


def read_netpbm(path: str | os.PathLike) -> np.ndarray:
    """8-bit binary PGM (``P5``) or PPM (``P6``) as ``(rows, cols[, 3])`` uint8."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, offset, line = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ParseError(f"unsupported image type {magic!r}; expected P5 or P6", 1)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError("non-integer image header field", line) from None
    if width < 1 or height < 1:
        raise ParseError("image has zero size", line)
    if maxval != 255:
        raise ParseError(f"only 8-bit images (maxval 255) are supported, got {maxval}", line)
    depth = 3 if magic == b"P6" else 1
    expected = width * height * depth
    raster = np.frombuffer(data, dtype=np.uint8, count=-1, offset=offset)
    if raster.size < expected:
        raise ParseError(f"raster holds {raster.size} bytes, expected {expected}", line + 1)
    raster = raster[:expected]
    return raster.reshape(height, width, 3) if depth == 3 else raster.reshape(height, width)


def load_image_channel(path: str | os.PathLike, channel: str | None = None, *,
                       pad: bool = True) -> np.ndarray:
    """One image channel scaled to ``[0, 1]``; image rows become matrix rows."""
    img = read_netpbm(path)
    if img.ndim == 3:
        if channel is None or channel.lower() not in _CHANNELS:
            raise ValueError("colour images need a channel: one of r, g, b")
        img = img[:, :, _CHANNELS[channel.lower()]]
    M = img.astype(np.float64) / 255.0
    return pad_to_power_of_two(M) if pad else M


def write_netpbm(path: str | os.PathLike, pixels) -> None:
    """Write uint8 pixels as P5 (2-D) or P6 (``(h, w, 3)``)."""
    px = np.asarray(pixels, dtype=np.uint8)
    magic = b"P6" if px.ndim == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (px.shape[1], px.shape[0])
    with open(path, "wb") as fh:
        fh.write(header + px.tobytes())


def load_matrix(path: str | os.PathLike, channel: str | None = None) -> np.ndarray:
    """Dispatch on extension: ``.csv``, ``.pgm`` or ``.ppm``."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".pgm", ".ppm"):
        return load_image_channel(path, channel)
    return load_csv(path)
