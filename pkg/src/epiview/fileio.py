"""Binary file formats: PPM/PGM images, packed mask bitsets, Plücker blobs.

Every writer goes through an atomic temp-file/rename step so output
files are either fully written or absent.

Formats:

PPM (P6)
    8-bit RGB, maxval 255.  Float images in [0, 1] are scaled by 255 and
    rounded on write.

PGM (P5)
    8-bit grayscale, or 16-bit for depth maps.  16-bit samples are
    big-endian per the netpbm specification.  Depth maps are scaled so
    the largest finite depth maps to 65534; empty (infinite) pixels
    store 65535.

Mask bitset
    Header: magic ``EPIM``, then little-endian u32 n_views, h, w.  Body:
    for each ordered view pair (i, j), i != j, in lexicographic order,
    the (h*w) x (h*w) boolean mask packed row-major, most significant
    bit first, padded to a byte boundary per pair.

Plücker blob
    Header: little-endian u32 h, w, 6.  Body: row-major float64
    (little-endian) grid values.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .epipolar import EpipolarMaskSet

MASK_MAGIC = b"EPIM"
DEPTH_EMPTY = 65535
DEPTH_MAX = 65534


def atomic_write_bytes(path, data: bytes) -> None:
    """Write bytes to path via a same-directory temp file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _quantize(img: np.ndarray, maxval: int) -> np.ndarray:
    scaled = np.round(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * maxval)
    return scaled.astype(np.uint16 if maxval > 255 else np.uint8)


def write_ppm(path, image: np.ndarray) -> None:
    """Write an (h, w, 3) float image in [0, 1] as binary PPM (P6)."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"PPM image must be (h, w, 3), got {image.shape}")
    h, w = image.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + _quantize(image, 255).tobytes())


def read_ppm(path) -> np.ndarray:
    """Read a binary PPM into an (h, w, 3) float array in [0, 1]."""
    magic, (w, h), maxval, body = _read_netpbm(path)
    if magic != b"P6":
        raise ValueError(f"not a binary PPM: {magic!r}")
    data = np.frombuffer(body, dtype=np.uint8, count=h * w * 3)
    return data.reshape(h, w, 3).astype(np.float64) / maxval


def write_pgm(path, image: np.ndarray, maxval: int = 255) -> None:
    """Write an (h, w) array as binary PGM (P5).

    Float input in [0, 1] is quantized to maxval; integer input is
    written as-is.  16-bit samples are stored big-endian.
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"PGM image must be (h, w), got {image.shape}")
    h, w = image.shape
    if np.issubdtype(image.dtype, np.floating):
        data = _quantize(image, maxval)
    else:
        if image.max(initial=0) > maxval:
            raise ValueError("integer image exceeds maxval")
        data = image.astype(np.uint16 if maxval > 255 else np.uint8)
    if maxval > 255:
        data = data.astype(">u2")
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    atomic_write_bytes(path, header + data.tobytes())


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a binary PGM: (integer array, maxval)."""
    magic, (w, h), maxval, body = _read_netpbm(path)
    if magic != b"P5":
        raise ValueError(f"not a binary PGM: {magic!r}")
    dtype = ">u2" if maxval > 255 else np.uint8
    data = np.frombuffer(body, dtype=dtype, count=h * w)
    return data.reshape(h, w).astype(np.uint16 if maxval > 255 else np.uint8), maxval


def _read_netpbm(path):
    raw = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    magic = fields[0]
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    return magic, (w, h), maxval, raw[pos:]


def encode_depth(depth: np.ndarray) -> np.ndarray:
    """Scale a float depth grid to 16-bit; infinite (empty) pixels -> 65535."""
    depth = np.asarray(depth, dtype=np.float64)
    finite = np.isfinite(depth)
    out = np.full(depth.shape, DEPTH_EMPTY, dtype=np.uint16)
    if finite.any():
        d_max = depth[finite].max()
        scale = DEPTH_MAX / d_max if d_max > 0 else 0.0
        out[finite] = np.round(depth[finite] * scale).astype(np.uint16)
    return out


def write_depth_pgm(path, depth: np.ndarray) -> None:
    """Write a float depth grid as a 16-bit PGM."""
    write_pgm(path, encode_depth(depth), maxval=DEPTH_EMPTY)


def write_mask_bitset(path, masks: EpipolarMaskSet) -> None:
    """Write a mask set as the packed EPIM bitset format."""
    parts = [MASK_MAGIC, struct.pack("<III", masks.n_views, masks.height, masks.width)]
    for key in masks.ordered_pairs():
        parts.append(np.packbits(masks.pairs[key].reshape(-1)).tobytes())
    atomic_write_bytes(path, b"".join(parts))


def read_mask_bitset(path) -> EpipolarMaskSet:
    raw = Path(path).read_bytes()
    if raw[:4] != MASK_MAGIC:
        raise ValueError("bad magic; not a mask bitset file")
    n_views, h, w = struct.unpack("<III", raw[4:16])
    hw = h * w
    n_bits = hw * hw
    n_bytes = (n_bits + 7) // 8
    pairs = {}
    pos = 16
    for i in range(n_views):
        for j in range(n_views):
            if i == j:
                continue
            chunk = np.frombuffer(raw, dtype=np.uint8, count=n_bytes, offset=pos)
            bits = np.unpackbits(chunk, count=n_bits).astype(bool)
            pairs[(i, j)] = bits.reshape(hw, hw)
            pos += n_bytes
    return EpipolarMaskSet(n_views=n_views, height=h, width=w, pairs=pairs)


def write_plucker_blob(path, values: np.ndarray) -> None:
    """Write an (h, w, 6) Plücker grid as the flat binary blob format."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 3 or values.shape[2] != 6:
        raise ValueError(f"Plücker values must be (h, w, 6), got {values.shape}")
    h, w = values.shape[:2]
    header = struct.pack("<III", h, w, 6)
    atomic_write_bytes(path, header + values.astype("<f8").tobytes())


def read_plucker_blob(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    h, w, six = struct.unpack("<III", raw[:12])
    if six != 6:
        raise ValueError("blob header must end in 6")
    data = np.frombuffer(raw, dtype="<f8", count=h * w * 6, offset=12)
    return data.reshape(h, w, 6).astype(np.float64)
