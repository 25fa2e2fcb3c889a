"""Binary field (``CRTF``) and sinogram (``CRTS``) files.

Both formats are little-endian: a header, then the samples as f64 in C order
(``y`` fastest for fields, ``theta`` fastest for sinograms).  The header ends
with the CRC32 of the payload bytes.

Field header::

    magic  4s   b"CRTF"
    version u32
    d      u32
    extents d x (f64 lo, f64 hi)      x axes then y
    counts  d x u64
    crc32  u32

Sinogram header::

    magic  4s   b"CRTS"
    version u32
    d      u32
    p      f64
    u extents (d-1) x (f64, f64)
    u counts  (d-1) x u64
    theta extent f64, f64
    theta count  u64
    crc32  u32
"""

from __future__ import annotations

import math
import os
import struct
import zlib

import numpy as np

from .core import ConeSinogram, ConeSinogramGrid, SUPPORTED_DIMS, VolumeField, VolumeGrid
from .errors import ChecksumError, ConeRadonError, FormatError, TruncatedFileError

FIELD_MAGIC = b"CRTF"
SINOGRAM_MAGIC = b"CRTS"
VERSION = 1


def _payload(values: np.ndarray) -> bytes:
    return np.ascontiguousarray(values, dtype="<f8").tobytes()


def _crc(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


def field_header(field: VolumeField, crc: int) -> bytes:
    g = field.grid
    parts = [FIELD_MAGIC, struct.pack("<II", VERSION, g.d)]
    for lo, hi in g.extents:
        parts.append(struct.pack("<dd", lo, hi))
    for n in g.shape:
        parts.append(struct.pack("<Q", n))
    parts.append(struct.pack("<I", crc))
    return b"".join(parts)


def sinogram_header(sino: ConeSinogram, crc: int) -> bytes:
    g = sino.grid
    parts = [SINOGRAM_MAGIC, struct.pack("<IId", VERSION, g.d, sino.p)]
    for lo, hi in g.u_extent:
        parts.append(struct.pack("<dd", lo, hi))
    for n in g.n_u:
        parts.append(struct.pack("<Q", n))
    parts.append(struct.pack("<ddQ", g.theta_extent[0], g.theta_extent[1], g.n_theta))
    parts.append(struct.pack("<I", crc))
    return b"".join(parts)


def _write(path, header: bytes, payload: bytes):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    os.replace(tmp, path)


def write_field(path, field: VolumeField) -> None:
    payload = _payload(field.values)
    _write(path, field_header(field, _crc(payload)), payload)


def write_sinogram(path, sino: ConeSinogram) -> None:
    payload = _payload(sino.values)
    _write(path, sinogram_header(sino, _crc(payload)), payload)


class _Reader:
    """Cursor over a byte buffer that reports offsets in its errors."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise TruncatedFileError(f"header ends early, need {size} more bytes", self.pos)
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out


def _read_preamble(r: _Reader, magic: bytes):
    (got,) = r.take("<4s")
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}", 0)
    off = r.pos
    (version,) = r.take("<I")
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}, expected {VERSION}", off)
    off = r.pos
    (d,) = r.take("<I")
    if d not in SUPPORTED_DIMS:
        raise FormatError(f"unsupported dimension d={d}", off)
    return d


def _read_payload(r: _Reader, counts, crc: int) -> np.ndarray:
    n = math.prod(counts)
    need = 8 * n
    have = len(r.data) - r.pos
    if have < need:
        raise TruncatedFileError(f"payload holds {have} bytes, header promises {need}", len(r.data))
    if have > need:
        raise FormatError(f"{have - need} trailing bytes after the payload", r.pos + need)
    payload = r.data[r.pos:]
    if _crc(payload) != crc:
        raise ChecksumError("payload checksum mismatch", r.pos)
    return np.frombuffer(payload, dtype="<f8").astype(float).reshape(counts)


def read_field(path) -> VolumeField:
    with open(path, "rb") as fh:
        r = _Reader(fh.read())
    d = _read_preamble(r, FIELD_MAGIC)
    ext_off = r.pos
    extents = [r.take("<dd") for _ in range(d)]
    counts = [r.take("<Q")[0] for _ in range(d)]
    (crc,) = r.take("<I")
    try:
        grid = VolumeGrid(d, extents[:-1], extents[-1], counts[:-1], counts[-1])
    except ConeRadonError as exc:
        raise FormatError(f"invalid grid in header: {exc}", ext_off) from exc
    return VolumeField(grid, _read_payload(r, grid.shape, crc))


def read_sinogram(path) -> ConeSinogram:
    with open(path, "rb") as fh:
        r = _Reader(fh.read())
    d = _read_preamble(r, SINOGRAM_MAGIC)
    (p,) = r.take("<d")
    ext_off = r.pos
    extents = [r.take("<dd") for _ in range(d - 1)]
    counts = [r.take("<Q")[0] for _ in range(d - 1)]
    t0, t1, nt = r.take("<ddQ")
    (crc,) = r.take("<I")
    try:
        grid = ConeSinogramGrid(d, extents, counts, (t0, t1), nt)
    except ConeRadonError as exc:
        raise FormatError(f"invalid grid in header: {exc}", ext_off) from exc
    if not math.isfinite(p):
        raise FormatError("p is not finite", 12)
    return ConeSinogram(grid, p, _read_payload(r, grid.shape, crc))
