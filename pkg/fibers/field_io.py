"""
SIZF1 field files.

Layout (little-endian):
    b"SIZF1"
    uint8 name length, group name (ASCII)
    int32 r, d, S, j_min[r], j_max[r], q
    mask bitmap, np.packbits over (sigma, j) in fiber order
    complex128 data, sigma lexicographic -> j lexicographic -> row-major matrix
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .errors import FieldFileError
from .transform import FieldLayout, OperatorField, to_fiber_order, to_lambda_order

MAGIC = b"SIZF1"


@dataclass(frozen=True)
class FieldHeader:
    group: str
    r: int
    d: int
    S: int
    j_min: Tuple[int, ...]
    j_max: Tuple[int, ...]
    q: int
    mask: np.ndarray
    data_offset: int

    @property
    def n_slots(self) -> int:
        return int(self.mask.size)


class _Cursor:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        available = len(self.buf) - self.pos
        if n > available:
            raise FieldFileError(
                f"Truncated field file: {what} needs {n} bytes, {available} left",
                offset=self.pos,
            )
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def ints(self, count: int, what: str) -> Tuple[int, ...]:
        raw = self.take(4 * count, what)
        return tuple(int(v) for v in np.frombuffer(raw, dtype="<i4", count=count))


def _header_bytes(layout: FieldLayout) -> bytes:
    name = layout.group.name.encode("ascii")
    ints = [layout.r, layout.group.d, layout.S, *layout.fibers.j_min, *layout.fibers.j_max, layout.space.q]
    return (
        MAGIC
        + np.uint8(len(name)).tobytes()
        + name
        + np.asarray(ints, dtype="<i4").tobytes()
        + np.packbits(layout.fiber_mask.ravel()).tobytes()
    )


def write_field(path: Union[str, Path], field: OperatorField) -> int:
    """
    Write a Fourier-side field to a SIZF1 file.

    Returns:
        Number of bytes written
    """
    if field.measure != "plancherel":
        raise ValueError("Only Plancherel-measure (Fourier-side) fields can be exported")
    layout = field.layout
    body = np.ascontiguousarray(to_fiber_order(layout, field.data), dtype="<c16").tobytes()
    payload = _header_bytes(layout) + body
    Path(path).write_bytes(payload)
    return len(payload)


def parse_header(buf: bytes) -> FieldHeader:
    cursor = _Cursor(buf)
    magic = cursor.take(len(MAGIC), "magic")
    if magic != MAGIC:
        raise FieldFileError(f"Bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    (name_len,) = np.frombuffer(cursor.take(1, "name length"), dtype=np.uint8)
    name_offset = cursor.pos
    try:
        group = cursor.take(int(name_len), "group name").decode("ascii")
    except UnicodeDecodeError:
        raise FieldFileError("Group name is not ASCII", offset=name_offset)

    r, d, S = cursor.ints(3, "dimensions")
    if r < 1 or d < 0 or S < 2:
        raise FieldFileError(f"Invalid dimensions r={r}, d={d}, S={S}", offset=cursor.pos - 12)
    j_min = cursor.ints(r, "j_min")
    j_max = cursor.ints(r, "j_max")
    (q,) = cursor.ints(1, "q")
    if q < 1 or any(lo > hi for lo, hi in zip(j_min, j_max)):
        raise FieldFileError(f"Invalid fiber box or grid: j_min={j_min}, j_max={j_max}, q={q}", offset=cursor.pos - 4)

    n_slots = S ** r * math.prod(hi - lo + 1 for lo, hi in zip(j_min, j_max))
    bitmap_bytes = (n_slots + 7) // 8
    if bitmap_bytes > len(buf) - cursor.pos:
        raise FieldFileError(
            f"Header declares {n_slots} fiber slots, mask bitmap needs {bitmap_bytes} bytes "
            f"but only {len(buf) - cursor.pos} remain",
            offset=cursor.pos,
        )
    packed = np.frombuffer(cursor.take(bitmap_bytes, "mask bitmap"), dtype=np.uint8)
    mask = np.unpackbits(packed, count=n_slots).astype(bool)
    return FieldHeader(group, r, d, S, j_min, j_max, q, mask, cursor.pos)


def read_header(path: Union[str, Path]) -> FieldHeader:
    return parse_header(Path(path).read_bytes())


def read_field(path: Union[str, Path], layout: FieldLayout) -> OperatorField:
    """
    Read a SIZF1 file and validate its header against the run layout.

    Raises:
        FieldFileError: bad magic, truncation, trailing bytes or a header
            that does not match the layout
    """
    buf = Path(path).read_bytes()
    header = parse_header(buf)

    expected = (layout.group.name, layout.r, layout.group.d, layout.S,
                layout.fibers.j_min, layout.fibers.j_max, layout.space.q)
    found = (header.group, header.r, header.d, header.S, header.j_min, header.j_max, header.q)
    if found != expected:
        raise FieldFileError(
            f"Dimension mismatch: file has (group, r, d, S, j_min, j_max, q)={found}, "
            f"config expects {expected}",
            offset=len(MAGIC),
        )
    if not np.array_equal(header.mask, layout.fiber_mask.ravel()):
        raise FieldFileError(
            "Mask bitmap differs from the layout's Pfaffian mask (different pf_eps?)",
            offset=header.data_offset - (header.n_slots + 7) // 8,
        )

    cursor = _Cursor(buf)
    cursor.pos = header.data_offset
    count = layout.n_lambda * layout.D * layout.D
    raw = cursor.take(16 * count, "field data")
    if cursor.pos != len(buf):
        raise FieldFileError(f"{len(buf) - cursor.pos} trailing bytes after field data", offset=cursor.pos)

    fibers = np.frombuffer(raw, dtype="<c16", count=count).astype(complex)
    fibers = fibers.reshape(layout.n_sigma, layout.n_j, layout.D, layout.D)
    if not np.all(np.isfinite(fibers)):
        raise FieldFileError("Field data contains NaN or Inf", offset=header.data_offset)
    return OperatorField(layout, to_lambda_order(layout, fibers), measure="plancherel")
