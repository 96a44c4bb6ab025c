"""Command-line interface: gen, enhance, features, lms, fmf, quality, report.

Exit codes: 0 success, 1 contract violation (bad arguments/inputs), 2 I/O
failure. ``--threads`` never changes output bytes; ``--config FILE`` supplies
key=value defaults that individual flags override.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict

from . import __version__
from .errors import BadParams, ContractError, IoError, IoFailure, MatchbenchError
from .frames import FrameSequence
from .manifest import RunManifest
from .metrics import (
    cumulative_distance_distribution,
    furthest_matchable,
    local_stability,
    sequence_quality,
)
from .orb import DetectorParams, detect_and_describe
from .ransac import RansacParams
from .report import decay_table, emit_curves, fmf_table, load_run
from .synthgen import BENCH_SPECS, gen_benchmark
from ._parallel import default_workers, get_ctx, pmap
from . import enhance as enhance_mod
from . import featcache


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- config file handling ---

def read_config(path) -> dict:
    """key=value lines; '#' starts a comment; values stay strings."""
    cfg = {}
    if path is None:
        return cfg
    if not os.path.isfile(path):
        raise IoFailure(f"config file {path} not found")
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise BadParams(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
    return cfg


def _pick(args, cfg: dict, key: str, default, cast):
    """CLI flag > config file > default."""
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError as exc:
            raise BadParams(f"config key {key}: {exc}") from exc
    return default


def _detector_params(args, cfg) -> DetectorParams:
    return DetectorParams(
        max_features=_pick(args, cfg, "max_features", 1000, int),
        n_levels=_pick(args, cfg, "n_levels", 8, int),
        scale_factor=_pick(args, cfg, "scale_factor", 1.2, float),
        fast_threshold=_pick(args, cfg, "fast_threshold", 20, int),
    )


def _ransac_params(args, cfg) -> RansacParams:
    return RansacParams(
        ransac_threshold=_pick(args, cfg, "ransac_threshold", 10.0, float),
        min_inlier_ratio=_pick(args, cfg, "min_inlier_ratio", 0.3, float),
        max_reproj_error=_pick(args, cfg, "max_reproj_error", 20.0, float),
        confidence=_pick(args, cfg, "confidence", 0.995, float),
        max_iterations=_pick(args, cfg, "max_iterations", 2000, int),
        min_matches=_pick(args, cfg, "min_matches", 15, int),
        seed=_pick(args, cfg, "seed", 0, int),
    )


def _threads(args, cfg) -> int:
    return _pick(args, cfg, "threads", default_workers(), int)


# --- feature cache ---

def _file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def _cache_meta(seq: FrameSequence, params: DetectorParams) -> dict:
    return {
        "version": __version__,
        "detector_params": asdict(params),
        "frame_hashes": [_file_hash(seq.path(i)) for i in range(len(seq))],
    }


def _extract_one(index: int):
    seq, params = get_ctx()
    return detect_and_describe(seq.load(index), params)


def extract_features(seq: FrameSequence, params: DetectorParams,
                     workers: int = 1) -> list:
    return pmap(_extract_one, range(len(seq)), workers, ctx=(seq, params))


def load_or_extract(seq: FrameSequence, params: DetectorParams,
                    workers: int) -> list:
    """Use the frame-hash-validated cache under <seq>/features if present."""
    cache_dir = os.path.join(seq.directory, "features")
    meta_path = os.path.join(cache_dir, "meta.json")
    if os.path.isfile(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
        if meta == _cache_meta(seq, params):
            return [featcache.load_featureset(
                os.path.join(cache_dir, f"frame_{i:06d}.fbfs"), i)
                for i in range(len(seq))]
        print(f"note: feature cache in {cache_dir} is stale, re-extracting",
              file=sys.stderr)
    return extract_features(seq, params, workers)


# --- run metadata ---

def _sequence_enhancer(directory) -> tuple[str, dict]:
    meta_path = os.path.join(directory, "enhance_meta.json")
    if os.path.isfile(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
        return meta.get("method", "unknown"), meta.get("params", {})
    return "original", {}


def _manifest(in_dir, det: DetectorParams, rp: RansacParams) -> RunManifest:
    name, params = _sequence_enhancer(in_dir)
    return RunManifest(
        sequence_id=os.path.basename(os.path.abspath(in_dir)),
        enhancer=name,
        enhancer_params=params,
        detector="orb",
        detector_params=asdict(det),
        ransac_params=asdict(rp),
        seed=rp.seed,
        version=__version__,
    )


def _open_out(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return open(path, "w")


def _json_float(v: float):
    return v if math.isfinite(v) else "inf"


def update_summary(out_file, section: str, payload: dict,
                   manifest: RunManifest) -> None:
    """Merge one metric section into summary.json next to ``out_file``."""
    path = os.path.join(os.path.dirname(os.path.abspath(out_file)),
                        "summary.json")
    summary = {}
    if os.path.isfile(path):
        with open(path) as fh:
            summary = json.load(fh)
    summary["manifest"] = manifest.as_dict()
    summary["manifest_hash"] = manifest.hash()
    summary[section] = payload
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")


# --- subcommands ---

def cmd_gen(args, cfg) -> int:
    seed = _pick(args, cfg, "seed", 0, int)
    gts = gen_benchmark(args.spec, seed)
    os.makedirs(args.out, exist_ok=True)
    gts.write(args.out)
    print(f"wrote {len(gts)} frames + truth.json to {args.out}")
    return 0


def _parse_tiles(s: str) -> tuple[int, int]:
    try:
        a, b = s.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise BadParams(f"--tiles expects AxB, got {s!r}") from exc


def cmd_enhance(args, cfg) -> int:
    seq = FrameSequence.open(args.in_dir)
    params = {}
    if args.method == "clahe":
        tiles = _parse_tiles(_pick(args, cfg, "tiles", "8x8", str))
        params = {"tiles_x": tiles[0], "tiles_y": tiles[1],
                  "clip_limit": _pick(args, cfg, "clip", 0.01, float)}
    elif args.method == "fusion":
        params = {"pyramid_levels": _pick(args, cfg, "pyramid_levels", 5, int),
                  "weight_epsilon": _pick(args, cfg, "weight_epsilon", 1e-6, float)}
    est = enhance_mod.make_enhancer(args.method, **params)
    out_seq = enhance_mod.apply_enhancer(seq, est, args.out)
    with open(os.path.join(args.out, "enhance_meta.json"), "w") as fh:
        json.dump({"method": args.method, "params": params, "source":
                   os.path.basename(os.path.abspath(args.in_dir))},
                  fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"enhanced {len(out_seq)} frames with {args.method} into {args.out}")
    return 0


def cmd_features(args, cfg) -> int:
    seq = FrameSequence.open(args.in_dir)
    det = _detector_params(args, cfg)
    feats = extract_features(seq, det, _threads(args, cfg))
    cache_dir = os.path.join(seq.directory, "features")
    os.makedirs(cache_dir, exist_ok=True)
    for i, fs in enumerate(feats):
        featcache.save_featureset(fs, os.path.join(cache_dir, f"frame_{i:06d}.fbfs"))
    with open(os.path.join(cache_dir, "meta.json"), "w") as fh:
        json.dump(_cache_meta(seq, det), fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"cached {len(feats)} feature sets "
          f"({sum(len(f) for f in feats)} keypoints) in {cache_dir}")
    return 0


def cmd_lms(args, cfg) -> int:
    seq = FrameSequence.open(args.in_dir)
    det = _detector_params(args, cfg)
    rp = _ransac_params(args, cfg)
    n = _pick(args, cfg, "n", 10, int)
    workers = _threads(args, cfg)
    feats = load_or_extract(seq, det, workers)
    profiles, aggregates = local_stability(feats, n, rp, workers)

    manifest = _manifest(args.in_dir, det, rp)
    try:
        with _open_out(args.out) as fh:
            fh.write(f"# manifest={manifest.hash()}\n")
            fh.write("subject,offset,n_inliers,inlier_ratio,"
                     "mean_reproj_error,accepted\n")
            for p in profiles:
                for o in p.per_offset:
                    err = o.mean_reproj_error
                    err_s = "inf" if math.isinf(err) else f"{err:.6f}"
                    fh.write(f"{p.subject_frame},{o.offset},{o.n_inliers},"
                             f"{o.inlier_ratio:.6f},{err_s},"
                             f"{str(o.accepted).lower()}\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    update_summary(args.out, "lms", {
        "n": n,
        "per_offset": [
            {"offset": a.offset, "mean_inliers": a.mean_inliers,
             "mean_inlier_ratio": a.mean_inlier_ratio,
             "mean_reproj_error": _json_float(a.mean_reproj_error),
             "n_pairs": a.n_pairs}
            for a in aggregates],
    }, manifest)
    print(f"lms: {len(profiles)} subjects x n={n} -> {args.out}")
    return 0


def cmd_fmf(args, cfg) -> int:
    seq = FrameSequence.open(args.in_dir)
    det = _detector_params(args, cfg)
    rp = _ransac_params(args, cfg)
    horizon = _pick(args, cfg, "horizon", 200, int)
    workers = _threads(args, cfg)
    feats = load_or_extract(seq, det, workers)
    records, average = furthest_matchable(feats, rp, horizon, workers)
    curve = cumulative_distance_distribution(records)

    manifest = _manifest(args.in_dir, det, rp)
    try:
        with _open_out(args.out) as fh:
            fh.write(f"# manifest={manifest.hash()}\n")
            fh.write("subject,fmf,capped\n")
            for r in records:
                fh.write(f"{r.subject_frame},{r.fmf},{str(r.capped).lower()}\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    update_summary(args.out, "fmf", {
        "horizon": horizon,
        "average": average,
        "n_zero": sum(1 for r in records if r.fmf == 0),
        "n_capped": sum(1 for r in records if r.capped),
        "cumulative": [[d, c] for d, c in curve],
    }, manifest)
    print(f"fmf: average {average:.2f} over {len(records)} subjects -> {args.out}")
    return 0


def cmd_quality(args, cfg) -> int:
    orig = FrameSequence.open(args.orig)
    enh = FrameSequence.open(args.enh)
    q = sequence_quality(orig, enh)
    det = _detector_params(args, cfg)
    rp = _ransac_params(args, cfg)
    manifest = _manifest(args.enh, det, rp)
    try:
        with _open_out(args.out) as fh:
            fh.write(f"# manifest={manifest.hash()}\n")
            fh.write("frame,psnr,ssim\n")
            for s in q.scores:
                p = "inf" if math.isinf(s.psnr) else f"{s.psnr:.6f}"
                fh.write(f"{s.frame},{p},{s.ssim:.6f}\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    update_summary(args.out, "quality", {
        "mean_psnr": _json_float(q.mean_psnr),
        "mean_ssim": q.mean_ssim,
        "n_inf_psnr": q.n_inf_psnr,
        "n_frames": len(q.scores),
    }, manifest)
    print(f"quality: mean ssim {q.mean_ssim:.4f} -> {args.out}")
    return 0


def cmd_report(args, cfg) -> int:
    runs = []
    for spec in args.run:
        if "=" not in spec:
            raise BadParams(f"--run expects LABEL=DIR, got {spec!r}")
        label, directory = spec.split("=", 1)
        runs.append(load_run(label, directory))
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    if all("fmf" in r.summary for r in runs):
        csv_text, txt = fmf_table(runs)
        for name, content in (("fmf_table.csv", csv_text), ("fmf_table.txt", txt)):
            path = os.path.join(args.out_dir, name)
            with open(path, "w") as fh:
                fh.write(content)
            written.append(path)
    if all("lms" in r.summary for r in runs):
        csv_text, txt = decay_table(runs)
        for name, content in (("decay_table.csv", csv_text),
                              ("decay_table.txt", txt)):
            path = os.path.join(args.out_dir, name)
            with open(path, "w") as fh:
                fh.write(content)
            written.append(path)
    written += emit_curves(runs, args.out_dir)
    print("report wrote:\n  " + "\n  ".join(written))
    return 0


# --- parser wiring ---

def build_parser() -> _Parser:
    p = _Parser(prog="matchbench",
                description="frame-matching stability benchmark toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value defaults file")
        sp.add_argument("--threads", type=int,
                        help="worker count (default: all cores); "
                             "never changes output bytes")

    g = sub.add_parser("gen", help="generate a synthetic benchmark sequence")
    g.add_argument("--spec", required=True, choices=sorted(BENCH_SPECS))
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("enhance", help="apply a named enhancer to a sequence")
    e.add_argument("--in", dest="in_dir", required=True)
    e.add_argument("--method", required=True,
                   choices=sorted(enhance_mod.ENHANCERS))
    e.add_argument("--tiles", help="clahe tile grid, e.g. 8x8")
    e.add_argument("--clip", type=float, help="clahe clip limit fraction")
    e.add_argument("--pyramid-levels", dest="pyramid_levels", type=int)
    e.add_argument("--weight-epsilon", dest="weight_epsilon", type=float)
    e.add_argument("--out", required=True)
    common(e)
    e.set_defaults(func=cmd_enhance)

    def detector_flags(sp):
        sp.add_argument("--max-features", dest="max_features", type=int)
        sp.add_argument("--levels", dest="n_levels", type=int)
        sp.add_argument("--scale-factor", dest="scale_factor", type=float)
        sp.add_argument("--fast-threshold", dest="fast_threshold", type=int)

    def ransac_flags(sp):
        sp.add_argument("--ransac-threshold", dest="ransac_threshold", type=float)
        sp.add_argument("--inlier-ratio", dest="min_inlier_ratio", type=float)
        sp.add_argument("--max-reproj", dest="max_reproj_error", type=float)
        sp.add_argument("--confidence", type=float)
        sp.add_argument("--max-iterations", dest="max_iterations", type=int)
        sp.add_argument("--min-matches", dest="min_matches", type=int)
        sp.add_argument("--seed", type=int)

    f = sub.add_parser("features", help="extract and cache feature sets")
    f.add_argument("--in", dest="in_dir", required=True)
    detector_flags(f)
    common(f)
    f.set_defaults(func=cmd_features)

    l = sub.add_parser("lms", help="local matching stability over offsets 1..n")
    l.add_argument("--in", dest="in_dir", required=True)
    l.add_argument("--n", type=int)
    l.add_argument("--out", required=True)
    detector_flags(l)
    ransac_flags(l)
    common(l)
    l.set_defaults(func=cmd_lms)

    m = sub.add_parser("fmf", help="furthest matchable frame per subject")
    m.add_argument("--in", dest="in_dir", required=True)
    m.add_argument("--horizon", type=int)
    m.add_argument("--out", required=True)
    detector_flags(m)
    ransac_flags(m)
    common(m)
    m.set_defaults(func=cmd_fmf)

    q = sub.add_parser("quality", help="PSNR/SSIM of enhanced vs original")
    q.add_argument("--orig", required=True)
    q.add_argument("--enh", required=True)
    q.add_argument("--out", required=True)
    common(q)
    q.set_defaults(func=cmd_quality)

    r = sub.add_parser("report", help="tables and curves from finished runs")
    r.add_argument("--run", action="append", required=True,
                   metavar="LABEL=DIR")
    r.add_argument("--out-dir", dest="out_dir", required=True)
    common(r)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = read_config(getattr(args, "config", None))
        return args.func(args, cfg)
    except IoError as exc:
        print(f"matchbench: I/O error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"matchbench: error: {exc}", file=sys.stderr)
        return 1
    except MatchbenchError as exc:
        print(f"matchbench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
