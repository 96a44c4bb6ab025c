"""Binary per-frame FeatureSet cache (FBFS format).

Layout, little-endian: magic ``FBFS``, version byte, u32 feature count, then
per feature a record of f32 x, y, angle, score and a u8 level, followed by
32 descriptor bytes.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import BadMagic, IoFailure, MissingFile, TruncatedBody
from .orb import FeatureSet

MAGIC = b"FBFS"
VERSION = 1
_REC = struct.Struct("<ffffB")


def save_featureset(fs: FeatureSet, path) -> None:
    parts = [MAGIC, bytes([VERSION]), struct.pack("<I", len(fs))]
    for i in range(len(fs)):
        parts.append(_REC.pack(float(fs.x[i]), float(fs.y[i]),
                               float(fs.angle[i]), float(fs.score[i]),
                               int(fs.level[i])))
        parts.append(fs.descriptors[i].tobytes())
    try:
        with open(os.fspath(path), "wb") as fh:
            fh.write(b"".join(parts))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_featureset(path, frame_index: int = 0) -> FeatureSet:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(path)
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MAGIC:
        raise BadMagic(f"{path}: not an FBFS file")
    if buf[4] != VERSION:
        raise BadMagic(f"{path}: unsupported FBFS version {buf[4]}")
    (count,) = struct.unpack_from("<I", buf, 5)
    need = 9 + count * (_REC.size + 32)
    if len(buf) < need:
        raise TruncatedBody(f"{path}: {len(buf)} < {need} bytes")

    x = np.empty(count, np.float32)
    y = np.empty(count, np.float32)
    angle = np.empty(count, np.float32)
    score = np.empty(count, np.float32)
    level = np.empty(count, np.uint8)
    desc = np.empty((count, 32), np.uint8)
    pos = 9
    for i in range(count):
        x[i], y[i], angle[i], score[i], level[i] = _REC.unpack_from(buf, pos)
        pos += _REC.size
        desc[i] = np.frombuffer(buf, np.uint8, 32, pos)
        pos += 32
    return FeatureSet(frame_index, x, y, level, score, angle, desc)
