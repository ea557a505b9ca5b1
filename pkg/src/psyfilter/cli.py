"""Command line front end: batch filtering, threshold/mask dumps, and metric
reports.

Subcommands:
  filter      harden WAVs and write a JSON-lines manifest
  thresholds  dump one WAV's per-frame threshold matrix as CSV
  mask        dump one WAV's binary keep/drop matrix as CSV
  metrics     wer / snrseg reports as JSON lines

Settings resolve as defaults, then --config file values, then explicit
flags; the resolved values are recorded in the output itself. A bad file in
a batch is reported in the manifest and skipped, not fatal; the exit code is
1 if anything failed and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .audio_io import read_wav, require_rate, write_wav
from .errors import PsyFilterError
from .filtering import FilterConfig, PIPELINE_RATE, perceptual_filter
from .metrics import snrseg, wer
from .psychoacoustic import compute_mask, compute_thresholds
from .spectral import stft

DEFAULTS = {
    "phi": 0.0,
    "band": "200:7000",
    "psycho": True,
    "bandpass": True,
    "frame_len": 512,
    "hop": 256,
    "jobs": 1,
    "dump_spectra": False,
}


def parse_band(text: str) -> tuple[float, float]:
    """Parse "min:max" in Hz."""
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ValueError(f"band must look like MIN:MAX, got {text!r}")
    return float(parts[0]), float(parts[1])


def load_config_file(path) -> dict:
    with open(path, "rb") as fh:
        values = tomllib.load(fh)
    unknown = sorted(set(values) - set(DEFAULTS))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return values


def resolve_settings(args) -> dict:
    """defaults < config file < flags; flags left at None do not override."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(load_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def filter_config_from(settings: dict) -> FilterConfig:
    f_min, f_max = parse_band(settings["band"])
    return FilterConfig(
        phi=float(settings["phi"]),
        f_min=f_min,
        f_max=f_max,
        psycho_enabled=bool(settings["psycho"]),
        bandpass_enabled=bool(settings["bandpass"]),
        frame_len=int(settings["frame_len"]),
        hop=int(settings["hop"]),
    )


def collect_wavs(inputs) -> list[Path]:
    """Expand directories to their sorted *.wav contents; keep files as given."""
    files: list[Path] = []
    for raw in inputs:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(p.glob("*.wav")))
        else:
            files.append(p)
    return files


def write_matrix_csv(path, matrix, bin_frequencies, value_format) -> None:
    """Frame-major CSV: header row of bin center frequencies, one row per frame."""
    header = ",".join(f"{f:.2f}" for f in bin_frequencies)
    np.savetxt(path, matrix, delimiter=",", fmt=value_format, header=header, comments="")


def process_file(in_path: str, out_path: str, settings: dict) -> dict:
    """Filter one WAV; returns its manifest record. Never raises for bad input."""
    f_min, f_max = parse_band(settings["band"])
    record = {
        "record": "file",
        "input": in_path,
        "output": out_path,
        "phi": float(settings["phi"]),
        "band": [f_min, f_max],
    }
    try:
        config = filter_config_from(settings)
        buffer = require_rate(read_wav(in_path), PIPELINE_RATE)
        audio, mask, thresholds = perceptual_filter(buffer, config)
        write_wav(audio, out_path)
        if settings["dump_spectra"]:
            stem = Path(out_path).with_suffix("")
            freqs = np.arange(thresholds.levels.shape[1]) * (
                PIPELINE_RATE / config.frame_len
            )
            write_matrix_csv(f"{stem}.thresholds.csv", thresholds.levels, freqs, "%.6f")
            write_matrix_csv(f"{stem}.mask.csv", mask.bits, freqs, "%d")
        record["masked_fraction"] = mask.zero_fraction
        record["status"] = "ok"
    except (PsyFilterError, ValueError, OSError) as exc:
        record["status"] = "error"
        record["error"] = str(exc)
    return record


def _process_file_task(task) -> dict:
    return process_file(*task)


def _emit_jsonl(records, out_path) -> None:
    lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if out_path:
        Path(out_path).write_text(lines)
    else:
        sys.stdout.write(lines)


def cmd_filter(args, parser) -> int:
    settings = resolve_settings(args)
    files = collect_wavs(args.inputs)
    if not files:
        parser.error("no input WAV files found")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(str(p), str(out_dir / p.name), settings) for p in files]
    jobs = int(settings["jobs"])
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_process_file_task, tasks))
    else:
        records = [process_file(*t) for t in tasks]
    f_min, f_max = parse_band(settings["band"])
    # no timestamp: reruns with the same config must produce identical manifests
    run_record = {
        "record": "run",
        "command": "filter",
        "config": {
            "phi": float(settings["phi"]),
            "band": [f_min, f_max],
            "psycho": bool(settings["psycho"]),
            "bandpass": bool(settings["bandpass"]),
            "frame_len": int(settings["frame_len"]),
            "hop": int(settings["hop"]),
            "jobs": jobs,
            "dump_spectra": bool(settings["dump_spectra"]),
        },
    }
    with open(out_dir / "manifest.jsonl", "w") as fh:
        fh.write(json.dumps(run_record, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    failed = sum(r["status"] == "error" for r in records)
    for r in records:
        if r["status"] == "error":
            print(f"error: {r['input']}: {r['error']}", file=sys.stderr)
    print(f"{len(records) - failed}/{len(records)} files filtered -> {out_dir}")
    return 1 if failed else 0


def _analysis_for(args):
    settings = resolve_settings(args)
    config = filter_config_from(settings)
    buffer = require_rate(read_wav(args.input), PIPELINE_RATE)
    spec = stft(buffer, frame_len=config.frame_len, hop=config.hop)
    return settings, config, spec


def cmd_thresholds(args, parser) -> int:
    try:
        _, _, spec = _analysis_for(args)
        thresholds = compute_thresholds(spec)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / (Path(args.input).stem + ".thresholds.csv")
        write_matrix_csv(path, thresholds.levels, spec.bin_frequencies(), "%.6f")
    except (PsyFilterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


def cmd_mask(args, parser) -> int:
    try:
        _, config, spec = _analysis_for(args)
        thresholds = compute_thresholds(spec)
        mask = compute_mask(spec, thresholds, config.phi)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / (Path(args.input).stem + ".mask.csv")
        write_matrix_csv(path, mask.bits, spec.bin_frequencies(), "%d")
    except (PsyFilterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


def cmd_metrics_wer(args, parser) -> int:
    try:
        ref_lines = Path(args.ref).read_text().splitlines()
        hyp_lines = Path(args.hyp).read_text().splitlines()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if len(ref_lines) != len(hyp_lines):
        print(
            f"error: {len(ref_lines)} reference lines vs "
            f"{len(hyp_lines)} hypothesis lines",
            file=sys.stderr,
        )
        return 1
    records = []
    rates = []
    failed = 0
    for idx, (ref, hyp) in enumerate(zip(ref_lines, hyp_lines), start=1):
        name = f"{args.hyp}:{idx}"
        try:
            breakdown = wer(ref, hyp)
            rates.append(breakdown.wer_percent)
            records.append({
                "file": name,
                "wer": breakdown.wer_percent,
                "S": breakdown.substitutions,
                "D": breakdown.deletions,
                "I": breakdown.insertions,
                "N": breakdown.reference_len,
            })
        except PsyFilterError as exc:
            failed += 1
            records.append({"file": name, "status": "error", "error": str(exc)})
    records.append({
        "record": "aggregate",
        "pairs": len(records) - failed,
        "mean_wer": float(np.mean(rates)) if rates else None,
    })
    _emit_jsonl(records, args.out)
    return 1 if failed else 0


def cmd_metrics_snrseg(args, parser) -> int:
    originals = collect_wavs([args.original])
    modified = collect_wavs([args.modified])
    if not originals or len(originals) != len(modified):
        print(
            f"error: {len(originals)} original vs {len(modified)} modified files",
            file=sys.stderr,
        )
        return 1
    records = []
    values = []
    failed = 0
    for orig_path, mod_path in zip(originals, modified):
        try:
            result = snrseg(read_wav(orig_path), read_wav(mod_path))
            values.append(result.snrseg_db)
            records.append({
                "file": str(mod_path),
                "snrseg_db": result.snrseg_db,
                "segments_used": result.segments_used,
                "segments_skipped": result.segments_skipped,
            })
        except (PsyFilterError, OSError) as exc:
            failed += 1
            records.append({"file": str(mod_path), "status": "error", "error": str(exc)})
    records.append({
        "record": "aggregate",
        "pairs": len(records) - failed,
        "mean_snrseg_db": float(np.mean(values)) if values else None,
    })
    _emit_jsonl(records, args.out)
    return 1 if failed else 0


def _add_pipeline_flags(sub, with_phi=True):
    # defaults stay None so resolve_settings can tell flag-set from unset
    if with_phi:
        sub.add_argument("--phi", type=float, default=None,
                         help="dB margin over the hearing threshold (default 0)")
    sub.add_argument("--band", default=None, metavar="MIN:MAX",
                     help="band-pass cut-offs in Hz (default 200:7000)")
    sub.add_argument("--no-psycho", dest="psycho", action="store_const",
                     const=False, default=None,
                     help="disable the perceptual masking stage")
    sub.add_argument("--no-bandpass", dest="bandpass", action="store_const",
                     const=False, default=None,
                     help="disable the band-pass stage")
    sub.add_argument("--frame-len", dest="frame_len", type=int, default=None,
                     help="analysis frame length in samples (default 512)")
    sub.add_argument("--hop", type=int, default=None,
                     help="analysis hop in samples (default 256)")
    sub.add_argument("--config", default=None,
                     help="TOML file with flat key = value settings")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psyfilter",
        description="Remove imperceptible spectral content from speech audio "
                    "and measure the damage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_filter = sub.add_parser("filter", help="filter a batch of WAVs")
    p_filter.add_argument("inputs", nargs="+", metavar="WAV_OR_DIR")
    p_filter.add_argument("--out", required=True, help="output directory")
    _add_pipeline_flags(p_filter)
    p_filter.add_argument("--jobs", type=int, default=None,
                          help="parallel worker count (default 1)")
    p_filter.add_argument("--dump-spectra", dest="dump_spectra",
                          action="store_const", const=True, default=None,
                          help="also write threshold and mask CSVs per file")
    p_filter.set_defaults(func=cmd_filter)

    p_thresh = sub.add_parser("thresholds", help="dump threshold matrix CSV")
    p_thresh.add_argument("input", metavar="WAV")
    p_thresh.add_argument("--out", default=".", help="output directory")
    _add_pipeline_flags(p_thresh, with_phi=False)
    p_thresh.set_defaults(func=cmd_thresholds)

    p_mask = sub.add_parser("mask", help="dump binary mask CSV")
    p_mask.add_argument("input", metavar="WAV")
    p_mask.add_argument("--out", default=".", help="output directory")
    _add_pipeline_flags(p_mask)
    p_mask.set_defaults(func=cmd_mask)

    p_metrics = sub.add_parser("metrics", help="score transcript or audio pairs")
    msub = p_metrics.add_subparsers(dest="mode", required=True)

    p_wer = msub.add_parser("wer", help="word error rate over paired transcripts")
    p_wer.add_argument("--ref", required=True, help="reference transcripts, one per line")
    p_wer.add_argument("--hyp", required=True, help="hypothesis transcripts, one per line")
    p_wer.add_argument("--out", default=None, help="write JSON lines here instead of stdout")
    p_wer.set_defaults(func=cmd_metrics_wer)

    p_snr = msub.add_parser("snrseg", help="segmental SNR over paired WAVs")
    p_snr.add_argument("--original", required=True, help="clean WAV file or directory")
    p_snr.add_argument("--modified", required=True, help="processed WAV file or directory")
    p_snr.add_argument("--out", default=None, help="write JSON lines here instead of stdout")
    p_snr.set_defaults(func=cmd_metrics_snrseg)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        # config-file and pre-dispatch failures land here
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
