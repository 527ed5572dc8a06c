"""Grayscale image files: PGM (P2/P5) and 8-bit PNG.

PGM is parsed directly; PNG goes through Pillow. Colour PNGs are rejected
rather than converted.
"""

import os

import numpy as np

__all__ = ["ImageFormatError", "read_image", "write_image", "to_uint8", "rescale_for_display"]


class ImageFormatError(ValueError):
    """Raised for files that are not supported grayscale images."""


def _pgm_tokens(data):
    """Yield header tokens and the offset just past each one, skipping comments."""
    pos, n = 0, len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            start = pos
            while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
                pos += 1
            yield data[start:pos], pos


def _read_pgm(data):
    toks = _pgm_tokens(data)
    try:
        magic, _ = next(toks)
        width, _ = next(toks)
        height, _ = next(toks)
        maxval, end = next(toks)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise ImageFormatError("truncated or malformed PGM header") from exc
    if not 0 < maxval < 65536 or width < 1 or height < 1:
        raise ImageFormatError("invalid PGM dimensions or maxval")
    count = width * height
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        body = data[end + 1 : end + 1 + count * dtype.itemsize]
        if len(body) != count * dtype.itemsize:
            raise ImageFormatError("PGM pixel data is truncated")
        pix = np.frombuffer(body, dtype=dtype)
    else:
        try:
            pix = np.array([int(t) for t, _ in toks][:count], dtype=np.int64)
        except ValueError as exc:
            raise ImageFormatError("non-integer pixel in ASCII PGM") from exc
        if pix.size != count:
            raise ImageFormatError("ASCII PGM has too few pixels")
    if np.any(pix > maxval):
        raise ImageFormatError("pixel exceeds maxval")
    return pix.reshape(height, width).astype(np.float64)


def _read_png(path):
    from PIL import Image

    with Image.open(path) as im:
        if im.mode not in ("L", "I;16", "I"):
            raise ImageFormatError(f"only grayscale PNG is supported, got mode {im.mode}")
        return np.asarray(im, dtype=np.float64)


def read_image(path):
    """Load a grayscale image as a float64 ``(H, W)`` array.

    Raises ``OSError`` for unreadable files and :class:`ImageFormatError`
    for unsupported or malformed content.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] in (b"P2", b"P5"):
        img = _read_pgm(data)
    elif data[:8] == b"\x89PNG\r\n\x1a\n":
        img = _read_png(path)
    else:
        raise ImageFormatError(f"{path}: unrecognised magic number {data[:2]!r}")
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise ImageFormatError(f"{path}: image must be at least 2x2, got {img.shape}")
    return img


def to_uint8(field, peak=255.0):
    """Clip to ``[0, peak]``, map to ``[0, 255]`` and round half to even."""
    a = np.clip(np.asarray(field, dtype=np.float64), 0.0, peak) * (255.0 / peak)
    return np.rint(a).astype(np.uint8)


def rescale_for_display(field):
    """Affine map onto ``[0, 255]``. Returns ``(scaled, offset, scale)``.

    The original values are ``scaled / scale + offset``; a constant field
    maps to 0 with ``scale = 1``.
    """
    a = np.asarray(field, dtype=np.float64)
    lo, hi = float(a.min()), float(a.max())
    scale = 255.0 / (hi - lo) if hi > lo else 1.0
    return (a - lo) * scale, lo, scale


def write_image(path, field, peak=255.0, fmt=None):
    """Save as 8-bit grayscale. Format from ``fmt`` or the file extension.

    ``fmt`` is one of ``"pgm"`` (binary P5), ``"pgm-ascii"`` (P2) or ``"png"``.
    """
    pix = to_uint8(field, peak)
    if pix.ndim != 2:
        raise ValueError("can only write scalar fields")
    if fmt is None:
        ext = os.path.splitext(str(path))[1].lower()
        fmt = {".pgm": "pgm", ".png": "png"}.get(ext)
        if fmt is None:
            raise ImageFormatError(f"cannot infer image format from {path!r}")
    h, w = pix.shape
    if fmt == "png":
        from PIL import Image

        Image.fromarray(pix).save(path, format="PNG")
    elif fmt == "pgm":
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (w, h))
            fh.write(pix.tobytes())
    elif fmt == "pgm-ascii":
        rows = "\n".join(" ".join(str(v) for v in row) for row in pix)
        with open(path, "w") as fh:
            fh.write(f"P2\n{w} {h}\n255\n{rows}\n")
    else:
        raise ImageFormatError(f"unknown format {fmt!r}")
