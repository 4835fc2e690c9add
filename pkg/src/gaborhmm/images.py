"""Image loading: PGM (P2/P5) and PNG, luma conversion, bilinear resize.

Every loader returns float64 grayscale with values in [0, 255]; inputs
with a larger sample depth are rescaled onto that range.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def luma(rgb: np.ndarray) -> np.ndarray:
    """Weighted grayscale from an (h, w, 3) array."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) RGB, got shape {rgb.shape}")
    return rgb @ _LUMA_WEIGHTS


class _PgmScanner:
    """Token reader over PGM header bytes, skipping comments."""

    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def token(self) -> bytes:
        d, n = self.data, len(self.data)
        i = self.pos
        while i < n:
            if d[i : i + 1].isspace():
                i += 1
            elif d[i : i + 1] == b"#":
                while i < n and d[i : i + 1] not in (b"\n", b"\r"):
                    i += 1
            else:
                break
        if i >= n:
            raise DataError(f"truncated PGM header in {self.path}")
        start = i
        while i < n and not d[i : i + 1].isspace():
            i += 1
        self.pos = i
        return d[start:i]

    def int_token(self, what: str) -> int:
        tok = self.token()
        try:
            return int(tok)
        except ValueError:
            raise DataError(f"bad PGM {what} {tok!r} in {self.path}") from None


def read_pgm(path: str | Path) -> np.ndarray:
    """Decode a P2 (ascii) or P5 (binary) PGM file to float64 in [0, 255]."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read image {p}: {exc}") from exc
    if raw[:2] not in (b"P2", b"P5"):
        raise DataError(f"{p} is not a PGM file")
    scanner = _PgmScanner(raw, p)
    magic = scanner.token()
    width = scanner.int_token("width")
    height = scanner.int_token("height")
    maxval = scanner.int_token("maxval")
    if width <= 0 or height <= 0:
        raise DataError(f"{p} has zero or negative dimensions {width}x{height}")
    if not 0 < maxval <= 65535:
        raise DataError(f"{p} has unsupported maxval {maxval}")

    count = width * height
    if magic == b"P2":
        tokens = raw[scanner.pos :].split()
        if len(tokens) < count:
            raise DataError(f"{p} is truncated: {len(tokens)} of {count} samples")
        if len(tokens) > count:
            raise DataError(f"{p} has trailing data after {count} samples")
        try:
            flat = np.array([int(t) for t in tokens], dtype=np.float64)
        except ValueError:
            raise DataError(f"{p} contains a non-integer sample") from None
    else:
        # exactly one whitespace byte separates the maxval from the samples
        if not raw[scanner.pos : scanner.pos + 1].isspace():
            raise DataError(f"{p} lacks the separator before binary samples")
        body = raw[scanner.pos + 1 :]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(body) < need:
            raise DataError(f"{p} is truncated: {len(body)} of {need} bytes")
        if len(body) > need:
            raise DataError(f"{p} has {len(body) - need} trailing bytes")
        flat = np.frombuffer(body, dtype=dtype).astype(np.float64)

    if flat.max(initial=0.0) > maxval:
        raise DataError(f"{p} has a sample above maxval {maxval}")
    img = flat.reshape(height, width)
    if maxval != 255:
        img = img * (255.0 / maxval)
    return img


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    """Write a grayscale preview as binary P5, min-max scaled to 0..255."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"image must be 2-d and non-empty, got shape {arr.shape}")
    lo, hi = float(arr.min()), float(arr.max())
    scaled = np.zeros_like(arr) if hi == lo else (arr - lo) * (255.0 / (hi - lo))
    data = np.rint(scaled).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())


def _read_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            arr = np.asarray(img, dtype=np.float64)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DataError(f"cannot decode PNG {path}: {exc}") from exc
    if mode == "L":
        return arr
    if mode in ("I", "I;16"):
        return arr * (255.0 / 65535.0)
    if mode == "RGB":
        return luma(arr)
    raise DataError(f"{path} has unsupported PNG mode {mode!r}, expected grayscale or RGB")


def bilinear_resize(image: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Resample with bilinear interpolation on half-pixel centers."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"image must be 2-d and non-empty, got shape {arr.shape}")
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be positive, got {out_w}x{out_h}")
    in_h, in_w = arr.shape
    if (in_w, in_h) == (out_w, out_h):
        return arr.copy()

    def axis_coords(out_n: int, in_n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(out_n) + 0.5) * (in_n / out_n) - 0.5
        src = np.clip(src, 0.0, in_n - 1.0)
        if in_n == 1:
            zero = np.zeros(out_n, dtype=np.int64)
            return zero, zero, np.zeros(out_n)
        lo = np.minimum(np.floor(src).astype(np.int64), in_n - 2)
        return lo, lo + 1, src - lo

    x0, x1, fx = axis_coords(out_w, in_w)
    y0, y1, fy = axis_coords(out_h, in_h)
    fx = fx[np.newaxis, :]
    fy = fy[:, np.newaxis]
    top = arr[np.ix_(y0, x0)] * (1 - fx) + arr[np.ix_(y0, x1)] * fx
    bot = arr[np.ix_(y1, x0)] * (1 - fx) + arr[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def load_image(path: str | Path, size: tuple[int, int] | None = None) -> np.ndarray:
    """Load a PGM or PNG file as float64 grayscale in [0, 255].

    size is (width, height); when given and different from the stored
    geometry the image is bilinearly resampled, otherwise passed through
    untouched. Format is detected from file content, not the extension.
    """
    p = Path(path)
    try:
        with p.open("rb") as fh:
            head = fh.read(8)
    except OSError as exc:
        raise DataError(f"cannot read image {p}: {exc}") from exc
    if head[:2] in (b"P2", b"P5"):
        img = read_pgm(p)
    elif head == _PNG_MAGIC:
        img = _read_png(p)
    else:
        raise DataError(f"{p} has unknown image format (expected PGM or PNG)")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise DataError(f"{p} has zero-sized image data")
    if size is not None:
        img = bilinear_resize(img, size[0], size[1])
    return img
