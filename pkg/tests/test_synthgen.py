import json

import numpy as np
import pytest

from matchbench.errors import BadMotion, BadParams, DegenerateModel
from matchbench.frames import FrameSequence
from matchbench.homography import project
from matchbench.synthgen import (
    BENCH_SPECS,
    MotionSpec,
    gen_benchmark,
    gen_sequence,
    gen_texture,
    overlap_fraction,
)


def test_texture_seeded_and_broadband():
    a = gen_texture(1, 256, 128)
    b = gen_texture(1, 256, 128)
    c = gen_texture(2, 256, 128)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    assert a.data.min() == 0 and a.data.max() == 255
    with pytest.raises(BadParams):
        gen_texture(1, 64, 64)


def test_truth_pair_composition(texture_800):
    spec = MotionSpec(translation=(3.0, 1.0), rotation=0.01)
    gts = gen_sequence(texture_800, spec, 10, 320, 240, seed=3)
    # truth_pair must compose: H(a->c) == H(b->c) @ H(a->b)
    h_ab = gts.truth_pair(1, 4)
    h_bc = gts.truth_pair(4, 8)
    h_ac = gts.truth_pair(1, 8)
    comp = h_bc @ h_ab
    assert np.allclose(comp / comp[2, 2], h_ac, atol=1e-9)
    assert np.allclose(gts.truth_pair(5, 5), np.eye(3), atol=1e-12)


def test_truth_pair_pure_translation(texture_800):
    gts = gen_sequence(texture_800, MotionSpec(translation=(4.0, 0.0)),
                       5, 320, 240)
    # content at x in frame 3 appeared at x+8 in frame 1
    h = gts.truth_pair(3, 1)
    p = project(h, np.array([[100.0, 100.0]]))
    assert np.allclose(p, [[108.0, 100.0]], atol=1e-9)


def test_render_translation_shifts_pixels(texture_800):
    gts = gen_sequence(texture_800, MotionSpec(translation=(6.0, 0.0)),
                       3, 320, 240)
    f0 = gts.render(0)
    f2 = gts.render(2)
    # integer 12 px shift: interiors must agree exactly (no noise configured)
    assert np.array_equal(f0.data[:, 12:], f2.data[:, :-12])


def test_render_deterministic_with_noise(texture_800):
    gts = gen_sequence(texture_800, MotionSpec(), 2, 320, 240,
                       noise_sigma=4.0, snow_density=5, seed=9)
    a = gts.render(1)
    b = gts.render(1)
    assert np.array_equal(a.data, b.data)
    # different frames draw different noise
    assert not np.array_equal(gts.render(0).data, a.data)


def test_snow_paints_bright_ellipses(texture_800):
    quiet = gen_sequence(texture_800, MotionSpec(), 1, 320, 240, seed=4)
    snowy = gen_sequence(texture_800, MotionSpec(), 1, 320, 240,
                         snow_density=10, seed=4)
    d = snowy.render(0).data.astype(int) - quiet.render(0).data.astype(int)
    changed = d != 0
    assert 0 < changed.sum() < 0.5 * d.size
    assert snowy.render(0).data[changed].min() >= 200


def test_bad_motion_rejected(texture_800):
    with pytest.raises(BadMotion):
        gen_sequence(texture_800, MotionSpec(translation=(50.0, 0.0)),
                     20, 320, 240)  # walks off the texture
    with pytest.raises(BadMotion):
        gen_sequence(texture_800, MotionSpec(scale=1.5), 10, 320, 240)
    with pytest.raises(BadParams):
        gen_sequence(texture_800, MotionSpec(), 0, 320, 240)


def test_write_emits_truth_json(texture_800, tmp_path):
    gts = gen_sequence(texture_800, MotionSpec(translation=(2.0, 0.0)),
                       4, 320, 240, seed=11)
    seq = gts.write(tmp_path / "seq")
    assert seq.count == 4
    assert FrameSequence.open(tmp_path / "seq").count == 4
    truth = json.loads((tmp_path / "seq" / "truth.json").read_text())
    assert truth["seed"] == 11
    assert len(truth["h_to_base"]) == 4
    h3 = np.array(truth["h_to_base"][3]).reshape(3, 3)
    assert np.allclose(h3, gts.h_to_base[3], rtol=1e-9)


def test_overlap_fraction():
    assert overlap_fraction(np.eye(3), 640, 480) == pytest.approx(1.0)
    half = np.array([[1.0, 0, -320], [0, 1.0, 0], [0, 0, 1.0]])
    assert overlap_fraction(half, 640, 480) == pytest.approx(0.5)
    gone = np.array([[1.0, 0, -10000], [0, 1.0, 0], [0, 0, 1.0]])
    assert overlap_fraction(gone, 640, 480) == 0.0
    with pytest.raises(DegenerateModel):
        overlap_fraction(np.zeros((3, 3)), 640, 480)


def test_bench_specs_frozen():
    assert set(BENCH_SPECS) == {"bench-drift", "bench-translate"}
    assert BENCH_SPECS["bench-drift"]["count"] == 300
    with pytest.raises(BadParams):
        gen_benchmark("bench-unknown")


def test_gen_benchmark_reproducible():
    a = gen_benchmark("bench-translate", seed=1)
    b = gen_benchmark("bench-translate", seed=1)
    assert np.array_equal(a.render(5).data, b.render(5).data)
    assert np.allclose(a.h_to_base[50], b.h_to_base[50])
