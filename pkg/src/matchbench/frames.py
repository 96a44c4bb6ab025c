"""8-bit raster frames, binary netpbm (P5/P6) codec and frame sequences.

The on-disk unit is a binary PGM/PPM file with maxval 255; sequences are
directories of ``frame_%06d.pgm`` (grayscale) or ``.ppm`` (color) files
with contiguous indices.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadMagic,
    ContractError,
    DimensionMismatch,
    IoFailure,
    MissingFile,
    TruncatedBody,
    UnsupportedMaxval,
)

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # Rec.601 luma


@dataclass(frozen=True)
class Frame:
    """One 8-bit image: ``data`` is (h, w) for grayscale or (h, w, 3) for RGB."""

    data: np.ndarray
    index: int = 0

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.dtype != np.uint8:
            raise ContractError(f"frame data must be uint8, got {a.dtype}")
        if a.ndim == 2:
            pass
        elif a.ndim == 3 and a.shape[2] == 3:
            pass
        else:
            raise ContractError(f"frame shape {a.shape} not (h,w) or (h,w,3)")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3

    def with_index(self, index: int) -> "Frame":
        return replace(self, index=index)


# A grayscale Frame (channels == 1); kept as an alias for signatures.
GrayFrame = Frame


def _read_header_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited token, skipping '#' comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c in b" \t\r\n":
            pos += 1
        elif c == b"#":
            while pos < n and buf[pos:pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and buf[pos:pos + 1] not in b" \t\r\n":
        pos += 1
    if start == pos:
        raise TruncatedBody("netpbm header ended early")
    return buf[start:pos], pos


def load_netpbm(path) -> Frame:
    """Decode a binary P5 (grayscale) or P6 (RGB) file with maxval 255."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(path)
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc

    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise BadMagic(f"{path}: magic {magic!r}")
    channels = 1 if magic == b"P5" else 3

    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_header_token(buf, pos)
        if not tok.isdigit():
            raise BadMagic(f"{path}: non-numeric header field {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedMaxval(f"{path}: maxval {maxval}")
    pos += 1  # single whitespace byte after maxval

    need = width * height * channels
    body = buf[pos:pos + need]
    if len(body) < need:
        raise TruncatedBody(f"{path}: body {len(body)} < {need} bytes")
    a = np.frombuffer(body, dtype=np.uint8)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return Frame(a.reshape(shape))


def save_netpbm(frame: Frame, path) -> None:
    """Write ``frame`` as binary P5/P6; round-trips bit-exactly."""
    magic = b"P5" if frame.channels == 1 else b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, frame.width, frame.height)
    try:
        with open(os.fspath(path), "wb") as fh:
            fh.write(header)
            fh.write(frame.data.tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def to_grayscale(frame: Frame) -> GrayFrame:
    """Rec.601 luma conversion; 1-channel input is returned unchanged."""
    if frame.channels == 1:
        return frame
    r, g, b = (frame.data[..., k].astype(np.float64) for k in range(3))
    y = GRAY_WEIGHTS[0] * r + GRAY_WEIGHTS[1] * g + GRAY_WEIGHTS[2] * b
    y = np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)
    return Frame(y, index=frame.index)


_EXTS = ("pgm", "ppm")


@dataclass
class FrameSequence:
    """Directory of numbered frames sharing one geometry."""

    directory: str
    pattern: str = "frame_%06d.pgm"
    count: int = 0
    fps: float = 30.0
    _geometry: tuple | None = field(default=None, repr=False)

    def path(self, index: int) -> str:
        return os.path.join(self.directory, self.pattern % index)

    def load(self, index: int) -> Frame:
        if not 0 <= index < self.count:
            raise ContractError(f"frame index {index} outside 0..{self.count - 1}")
        return load_netpbm(self.path(index)).with_index(index)

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        for i in range(self.count):
            yield self.load(i)

    @classmethod
    def open(cls, directory, fps: float = 30.0) -> "FrameSequence":
        """Discover a ``frame_%06d.pgm|ppm`` sequence; indices must be 0..n-1."""
        directory = os.fspath(directory)
        if not os.path.isdir(directory):
            raise MissingFile(directory)
        rx = re.compile(r"^frame_(\d{6})\.(pgm|ppm)$")
        found = sorted(
            (int(m.group(1)), m.group(2))
            for name in os.listdir(directory)
            if (m := rx.match(name))
        )
        if not found:
            raise MissingFile(f"no frame_%06d.pgm|ppm files in {directory}")
        indices = [i for i, _ in found]
        if indices != list(range(len(indices))):
            raise ContractError(f"{directory}: frame indices not contiguous from 0")
        exts = {e for _, e in found}
        if len(exts) != 1:
            raise ContractError(f"{directory}: mixed pgm/ppm frames")
        ext = exts.pop()
        return cls(directory, f"frame_%06d.{ext}", len(indices), fps)

    def check_geometry(self, frame: Frame) -> None:
        """All frames of a sequence must share width/height/channels."""
        geom = (frame.width, frame.height, frame.channels)
        if self._geometry is None:
            self._geometry = geom
        elif self._geometry != geom:
            raise DimensionMismatch(
                f"frame {frame.index}: {geom} != sequence {self._geometry}"
            )


def write_sequence(frames, directory, fps: float = 30.0) -> FrameSequence:
    """Write an iterable of Frames as a new sequence directory."""
    os.makedirs(directory, exist_ok=True)
    count = 0
    ext = None
    for i, frame in enumerate(frames):
        if ext is None:
            ext = "pgm" if frame.channels == 1 else "ppm"
        save_netpbm(frame, os.path.join(directory, f"frame_{i:06d}.{ext}"))
        count += 1
    return FrameSequence(os.fspath(directory), f"frame_%06d.{ext}", count, fps)
