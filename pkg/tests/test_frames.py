import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchbench.errors import (
    BadMagic,
    ContractError,
    MissingFile,
    TruncatedBody,
    UnsupportedMaxval,
)
from matchbench.frames import (
    Frame,
    FrameSequence,
    load_netpbm,
    save_netpbm,
    to_grayscale,
    write_sequence,
)


def test_load_p5_direct_bytes(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 64, 128, 255]))
    f = load_netpbm(p)
    assert (f.width, f.height, f.channels) == (2, 2, 1)
    assert f.data.tolist() == [[0, 64], [128, 255]]


def test_load_p6_direct_bytes(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_bytes(b"P6\n1 1\n255\n" + bytes([10, 20, 30]))
    f = load_netpbm(p)
    assert (f.width, f.height, f.channels) == (1, 1, 3)
    assert f.data.reshape(-1).tolist() == [10, 20, 30]


def test_load_truncated_body(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(8))
    with pytest.raises(TruncatedBody):
        load_netpbm(p)


def test_load_errors(tmp_path):
    with pytest.raises(MissingFile):
        load_netpbm(tmp_path / "nope.pgm")
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P7\n1 1\n255\n\x00")
    with pytest.raises(BadMagic):
        load_netpbm(bad)
    mv = tmp_path / "mv.pgm"
    mv.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(UnsupportedMaxval):
        load_netpbm(mv)


def test_header_comments_skipped(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by a tool\n2 1 # trailing\n255\n\x05\x06")
    f = load_netpbm(p)
    assert f.data.tolist() == [[5, 6]]


def test_save_magic_bytes(tmp_path):
    g = Frame(np.zeros((4, 4), np.uint8))
    c = Frame(np.zeros((4, 4, 3), np.uint8))
    save_netpbm(g, tmp_path / "g.pgm")
    save_netpbm(c, tmp_path / "c.ppm")
    assert (tmp_path / "g.pgm").read_bytes()[:2] == b"P5"
    assert (tmp_path / "c.ppm").read_bytes()[:2] == b"P6"


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1, 3]))
def test_roundtrip_bit_exact(tmp_path_factory, seed, channels):
    rng = np.random.default_rng(seed)
    shape = (7, 5) if channels == 1 else (7, 5, 3)
    f = Frame(rng.integers(0, 256, shape, dtype=np.uint8))
    p = tmp_path_factory.mktemp("rt") / "f.pnm"
    save_netpbm(f, p)
    g = load_netpbm(p)
    assert np.array_equal(f.data, g.data)


def test_grayscale_values():
    f = Frame(np.array([[[255, 255, 255], [255, 0, 0]]], np.uint8))
    g = to_grayscale(f)
    assert g.data.tolist() == [[255, 76]]


def test_grayscale_identity_on_gray():
    f = Frame(np.arange(16, dtype=np.uint8).reshape(4, 4))
    g = to_grayscale(f)
    assert g.data is f.data


def test_frame_validation():
    with pytest.raises(ContractError):
        Frame(np.zeros((4, 4), np.float32))
    with pytest.raises(ContractError):
        Frame(np.zeros((4, 4, 2), np.uint8))


def test_sequence_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    frames = [Frame(rng.integers(0, 256, (6, 8), dtype=np.uint8), index=i)
              for i in range(3)]
    seq = write_sequence(frames, tmp_path / "seq")
    assert seq.count == 3
    reopened = FrameSequence.open(tmp_path / "seq")
    assert reopened.count == 3
    for i in range(3):
        assert np.array_equal(reopened.load(i).data, frames[i].data)


def test_sequence_rejects_gap(tmp_path):
    d = tmp_path / "seq"
    d.mkdir()
    save_netpbm(Frame(np.zeros((4, 4), np.uint8)), d / "frame_000000.pgm")
    save_netpbm(Frame(np.zeros((4, 4), np.uint8)), d / "frame_000002.pgm")
    with pytest.raises(ContractError):
        FrameSequence.open(d)
