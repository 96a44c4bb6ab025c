"""Aggregate metric runs into tables and plot-ready curve files.

Everything is plain text (CSV, |-aligned tables, two-column .dat) so report
output diffs cleanly; each artifact embeds the manifest hash of every
contributing run in '#' comment lines.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import ContractError, IoFailure, MissingFile


@dataclass(frozen=True)
class ReportRun:
    label: str
    enhancer: str
    detector: str
    manifest_hash: str
    summary: dict


def load_run(label: str, directory) -> ReportRun:
    """Read a run directory produced by the lms/fmf/quality subcommands."""
    path = os.path.join(os.fspath(directory), "summary.json")
    if not os.path.isfile(path):
        raise MissingFile(path)
    with open(path) as fh:
        summary = json.load(fh)
    manifest = summary.get("manifest", {})
    return ReportRun(
        label=label,
        enhancer=manifest.get("enhancer", "original"),
        detector=manifest.get("detector", "orb"),
        manifest_hash=summary.get("manifest_hash", ""),
        summary=summary,
    )


def _hash_comments(runs) -> list[str]:
    return [f"# run {r.label} manifest={r.manifest_hash}" for r in runs]


def _aligned(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


def fmf_table(runs: list[ReportRun]) -> tuple[str, str]:
    """Average-FMF matrix, rows = enhancers, columns = detectors.

    Returns (csv_text, aligned_text); the best value per column carries a
    '*' flag in the aligned table and a trailing 'best' CSV row.
    """
    if not runs:
        raise ContractError("at least one run required")
    cells = {}
    for r in runs:
        fmf = r.summary.get("fmf")
        if fmf is None:
            raise ContractError(f"run {r.label}: no fmf section in summary")
        cells[(r.enhancer, r.detector)] = fmf["average"]
    enhancers = sorted({e for e, _ in cells})
    detectors = sorted({d for _, d in cells})
    best = {d: max(cells.get((e, d), float("-inf")) for e in enhancers)
            for d in detectors}

    def cell(e, d, flagged):
        v = cells.get((e, d))
        if v is None:
            return ""
        s = f"{v:.2f}"
        return s + "*" if flagged and v == best[d] else s

    csv_lines = _hash_comments(runs)
    csv_lines.append("enhancer," + ",".join(detectors))
    for e in enhancers:
        csv_lines.append(e + "," + ",".join(cell(e, d, False) for d in detectors))
    csv_lines.append("best," + ",".join(
        max(enhancers, key=lambda e: cells.get((e, d), float("-inf")))
        for d in detectors))
    rows = [[e] + [cell(e, d, True) for d in detectors] for e in enhancers]
    text = "\n".join(_hash_comments(runs)) + "\n" \
        + _aligned(["enhancer"] + detectors, rows)
    return "\n".join(csv_lines) + "\n", text


def decay_table(runs: list[ReportRun], n: int = 10) -> tuple[str, str]:
    """Mean inliers per offset 1..n, one row per enhancer (sorted by name)."""
    if not runs:
        raise ContractError("at least one run required")
    rows = []
    for r in sorted(runs, key=lambda r: (r.enhancer, r.label)):
        lms = r.summary.get("lms")
        if lms is None:
            raise ContractError(f"run {r.label}: no lms section in summary")
        means = {o["offset"]: o["mean_inliers"] for o in lms["per_offset"]}
        rows.append([r.enhancer] + [
            f"{means[k]:.2f}" if k in means else "" for k in range(1, n + 1)])
    headers = ["enhancer"] + [str(k) for k in range(1, n + 1)]
    csv_lines = _hash_comments(runs) + [",".join(headers)]
    csv_lines += [",".join(r) for r in rows]
    text = "\n".join(_hash_comments(runs)) + "\n" + _aligned(headers, rows)
    return "\n".join(csv_lines) + "\n", text


def emit_curves(runs: list[ReportRun], out_dir) -> list[str]:
    """Per-run two-column .dat files: inlier decay and cumulative matching
    distance, plus a manifest of the emitted series. Returns written paths."""
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    series = []
    try:
        for r in runs:
            lms = r.summary.get("lms")
            if lms:
                path = os.path.join(out_dir, f"{r.label}_inlier_decay.dat")
                with open(path, "w") as fh:
                    fh.write(f"# run {r.label} manifest={r.manifest_hash}\n")
                    fh.write("# offset mean_inliers\n")
                    for o in lms["per_offset"]:
                        fh.write(f"{o['offset']} {o['mean_inliers']:.6f}\n")
                written.append(path)
                series.append({"label": r.label, "curve": "inlier_decay",
                               "file": os.path.basename(path)})
            fmf = r.summary.get("fmf")
            if fmf and "cumulative" in fmf:
                path = os.path.join(out_dir, f"{r.label}_cumulative.dat")
                with open(path, "w") as fh:
                    fh.write(f"# run {r.label} manifest={r.manifest_hash}\n")
                    fh.write("# offset cumulative_accepted_pairs\n")
                    for d, c in fmf["cumulative"]:
                        fh.write(f"{d} {c}\n")
                written.append(path)
                series.append({"label": r.label, "curve": "cumulative",
                               "file": os.path.basename(path)})
        mpath = os.path.join(out_dir, "curves_manifest.json")
        with open(mpath, "w") as fh:
            json.dump({"series": series,
                       "runs": {r.label: r.manifest_hash for r in runs}},
                      fh, indent=1, sort_keys=True)
        written.append(mpath)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return written
