"""Command-line entry point.

Subcommands wrap the library operations one-to-one (``synth``, ``fuse``,
``restore``, ``average``, ``fsim``, ``mig``, ``dic``) plus the
``experiment-haze`` driver that compares the three haze-suppression
strategies. Every run that writes artifacts also writes a
``manifest.json`` recording the command, configuration snapshot, inputs,
seeds and outputs; reports contain only deterministic fields so re-runs
are byte-identical.

Exit codes: 0 success, 1 processing failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

import numpy as np

from . import __version__
from .config import ConfigError, ToolConfig, dumps_config, load_config
from .dic import edca, match_field, strain
from .fsim import UndefinedScoreError, fsim
from .fusion import enhance
from .image import mig
from .imgio import ImageIOError, read_image, write_image
from .restore import grayscale_average, optimize_params
from .synth import HazeSpec, SpeckleSpec, degrade_exposure, degrade_haze, gen_speckle

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

AVERAGE_FRAME_COUNT = 15


class CliError(Exception):
    """Fatal processing error; message goes to stderr, exit code 1."""


def _sig6(value):
    """Round floats to 6 significant digits for diff-stable reports."""
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            return repr(value)
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {k: _sig6(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sig6(v) for v in value]
    if isinstance(value, np.floating):
        return _sig6(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_sig6(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(outdir: str, command: str, cfg: ToolConfig, inputs, outputs, seeds, started: float) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": dumps_config(cfg),
        "inputs": list(inputs),
        "outputs": list(outputs),
        "seeds": list(seeds),
        "duration_s": round(time.time() - started, 3),
    }
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_tool_config(args) -> ToolConfig:
    cfg = ToolConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    if getattr(args, "nsr", None) is not None:
        cfg = ToolConfig(fusion=cfg.fusion, dic=cfg.dic, restore_init=cfg.restore_init, nsr=args.nsr)
    return cfg


def _map_ordered(fn, items, jobs: int):
    """Apply fn to items, preserving input order regardless of job count."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    cfg = _load_tool_config(args)
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    outputs, entries, seeds = [], [], []
    for i in range(args.count):
        seed = args.seed + i
        spec = SpeckleSpec(width=args.width, height=args.height, seed=seed)
        img = gen_speckle(spec)
        entry = {"index": i, "seed": seed, "spec": asdict(spec)}
        if args.degrade == "under":
            img = degrade_exposure(img, "under", args.gain).image
            entry["degrade"] = {"mode": "under", "gain": args.gain}
        elif args.degrade == "over":
            img = degrade_exposure(img, "over", args.gain).image
            entry["degrade"] = {"mode": "over", "gain": args.gain}
        elif args.degrade == "haze":
            haze = HazeSpec(
                params=cfg.restore_init,
                warp_amplitude=args.warp_amplitude,
                noise_sigma=args.noise_sigma,
                seed=seed,
            )
            img = degrade_haze(img, haze)
            entry["degrade"] = {
                "mode": "haze",
                "beta": haze.params.beta,
                "omega": haze.params.omega,
                "warp_amplitude": haze.warp_amplitude,
                "noise_sigma": haze.noise_sigma,
            }
        if args.noise > 0.0 and args.degrade in ("none", "under", "over"):
            rng = np.random.Generator(np.random.PCG64(seed + 10_000_000))
            img = np.clip(img + rng.normal(0.0, args.noise, img.shape), 0.0, 1.0)
            entry["noise_sigma"] = args.noise
        name = f"{args.prefix}{i:04d}.pgm"
        path = os.path.join(args.out, name)
        write_image(path, img)
        outputs.append(name)
        entries.append(entry | {"file": name})
        seeds.append(seed)
    _write_json(os.path.join(args.out, "corpus.json"), {"images": entries})
    _write_manifest(args.out, "synth", cfg, [], outputs + ["corpus.json"], seeds, started)
    print(f"wrote {len(outputs)} images to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# fuse


def cmd_fuse(args) -> int:
    cfg = _load_tool_config(args)
    started = time.time()
    os.makedirs(args.out, exist_ok=True)

    def process(path):
        try:
            img = read_image(path)
            before = mig(img)
            out = enhance(img, cfg.fusion)
            name = os.path.splitext(os.path.basename(path))[0] + "_fused.pgm"
            write_image(os.path.join(args.out, name), out)
            return {"input": path, "output": name, "status": "ok",
                    "mig_before": before, "mig_after": mig(out)}
        except (ImageIOError, FileNotFoundError, ValueError) as exc:
            return {"input": path, "status": "error", "error": str(exc)}

    results = _map_ordered(process, args.inputs, args.jobs)
    ok = [r for r in results if r["status"] == "ok"]
    report = {
        "files": results,
        "n_ok": len(ok),
        "n_failed": len(results) - len(ok),
        "mig_improved": sum(1 for r in ok if r["mig_after"] > r["mig_before"]),
    }
    _write_json(os.path.join(args.out, "fuse_report.json"), report)
    outputs = [r["output"] for r in ok] + ["fuse_report.json"]
    _write_manifest(args.out, "fuse", cfg, args.inputs, outputs, [], started)
    for r in results:
        if r["status"] == "ok":
            print(f"{r['input']}: MIG {r['mig_before']:.3f} -> {r['mig_after']:.3f}")
        else:
            print(f"{r['input']}: ERROR {r['error']}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAILURE


# --------------------------------------------------------------------------
# restore


def cmd_restore(args) -> int:
    cfg = _load_tool_config(args)
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    ref = read_image(args.ref)
    target = read_image(args.target)
    restored, report = optimize_params(ref, target, init=cfg.restore_init, nsr=cfg.nsr)
    out_name = os.path.splitext(os.path.basename(args.target))[0] + "_restored.pgm"
    write_image(os.path.join(args.out, out_name), restored)
    _write_json(os.path.join(args.out, "restore_report.json"), report.to_dict())
    _write_manifest(args.out, "restore", cfg, [args.ref, args.target],
                    [out_name, "restore_report.json"], [], started)
    print(f"FSIM {report.initial_fsim:.6f} -> {report.final_fsim:.6f} "
          f"(beta={report.params.beta:.3e}, omega={report.params.omega:.4f}, "
          f"iterations={report.iterations})")
    return EXIT_OK


# --------------------------------------------------------------------------
# average


def cmd_average(args) -> int:
    cfg = _load_tool_config(args)
    started = time.time()
    frames = [read_image(p) for p in args.inputs]
    mean_img = grayscale_average(frames)
    outdir = os.path.dirname(os.path.abspath(args.out)) or "."
    os.makedirs(outdir, exist_ok=True)
    write_image(args.out, mean_img)
    _write_manifest(outdir, "average", cfg, args.inputs, [os.path.basename(args.out)], [], started)
    print(f"averaged {len(frames)} frames -> {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# fsim / mig


def cmd_fsim(args) -> int:
    ref = read_image(args.ref)
    target = read_image(args.target)
    score = fsim(ref, target)
    print(f"{score:.6f}")
    return EXIT_OK


def cmd_mig(args) -> int:
    for path in args.inputs:
        print(f"{path}\t{mig(read_image(path)):.6f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# dic


def _strain_summary(sf) -> dict:
    out = {}
    for name, comp in (("exx", sf.exx), ("eyy", sf.eyy), ("gxy", sf.gxy)):
        vals = comp[sf.valid]
        out[name] = {
            "mean": float(vals.mean()) if vals.size else 0.0,
            "mean_abs": float(np.abs(vals).mean()) if vals.size else 0.0,
            "std": float(vals.std()) if vals.size else 0.0,
            "n": int(vals.size),
        }
    return out


def cmd_dic(args) -> int:
    cfg = _load_tool_config(args)
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    ref = read_image(args.ref)
    deformed = read_image(getattr(args, "def"))
    field = match_field(ref, deformed, cfg.dic)
    sf = strain(field)

    csv_path = os.path.join(args.out, "dic_field.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("x,y,u,v,zncc,exx,eyy,gxy,valid\n")
        for iy, y in enumerate(field.ys):
            for ix, x in enumerate(field.xs):
                score = field.score[iy, ix]
                fh.write(
                    f"{x},{y},{field.u[iy, ix]:.6g},{field.v[iy, ix]:.6g},"
                    f"{score if score == score else 'nan'},"
                    f"{sf.exx[iy, ix]:.6g},{sf.eyy[iy, ix]:.6g},{sf.gxy[iy, ix]:.6g},"
                    f"{int(field.valid[iy, ix] and sf.valid[iy, ix])}\n"
                )
    summary = {"edca": edca(field), "strain": _strain_summary(sf),
               "grid": {"nx": len(field.xs), "ny": len(field.ys)}}
    _write_json(os.path.join(args.out, "dic_summary.json"), summary)
    _write_manifest(args.out, "dic", cfg, [args.ref, getattr(args, "def")],
                    ["dic_field.csv", "dic_summary.json"], [], started)
    print(f"EDCA {summary['edca']:.2f}%  nodes {summary['grid']['nx']}x{summary['grid']['ny']}")
    return EXIT_OK


# --------------------------------------------------------------------------
# experiment-haze


def cmd_experiment_haze(args) -> int:
    cfg = _load_tool_config(args)
    started = time.time()
    if len(args.frames) < AVERAGE_FRAME_COUNT:
        print(
            f"error: experiment-haze needs at least {AVERAGE_FRAME_COUNT} frames "
            f"(grayscale averaging is defined over N = {AVERAGE_FRAME_COUNT}), got {len(args.frames)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    os.makedirs(args.out, exist_ok=True)
    ref = read_image(args.ref)

    def prep(path):
        return enhance(read_image(path), cfg.fusion)

    fused = _map_ordered(prep, args.frames, args.jobs)

    def field_means(img) -> tuple[dict, float]:
        f = match_field(ref, img, cfg.dic)
        sf = strain(f)
        return _strain_summary(sf), edca(f)

    per_frame, edcas = [], []
    for img in fused:
        s, e = field_means(img)
        per_frame.append(s)
        edcas.append(e)

    avg_img = grayscale_average(fused[:AVERAGE_FRAME_COUNT])
    avg_summary, avg_edca = field_means(avg_img)

    restored_frames = []
    restore_reports = []
    for img in fused:
        restored, rep = optimize_params(ref, img, init=cfg.restore_init, nsr=cfg.nsr)
        restored_frames.append(restored)
        restore_reports.append(rep.to_dict())
    per_restored = []
    edcas_restored = []
    for img in restored_frames:
        s, e = field_means(img)
        per_restored.append(s)
        edcas_restored.append(e)

    def aggregate(frames_summaries, key) -> dict:
        agg = {}
        for comp in ("exx", "eyy", "gxy"):
            vals = [s[comp][key] for s in frames_summaries]
            agg[comp] = float(np.mean(vals)) if vals else 0.0
        return agg

    report = {
        "n_frames": len(args.frames),
        "strategies": {
            "fused": aggregate(per_frame, "mean"),
            "average": {comp: avg_summary[comp]["mean"] for comp in ("exx", "eyy", "gxy")},
            "restored": aggregate(per_restored, "mean"),
        },
        "strategies_abs": {
            "fused": aggregate(per_frame, "mean_abs"),
            "average": {comp: avg_summary[comp]["mean_abs"] for comp in ("exx", "eyy", "gxy")},
            "restored": aggregate(per_restored, "mean_abs"),
        },
        "edca": {
            "fused_mean": float(np.mean(edcas)),
            "average": avg_edca,
            "restored_mean": float(np.mean(edcas_restored)),
        },
        "per_frame": {"fused": per_frame, "restored": per_restored},
        "restoration": restore_reports,
    }
    _write_json(os.path.join(args.out, "experiment_report.json"), report)
    _write_manifest(args.out, "experiment-haze", cfg, [args.ref] + list(args.frames),
                    ["experiment_report.json"], [], started)
    rows = report["strategies"]
    print("strategy   exx(ue)   eyy(ue)   gxy(ue)")
    for name in ("fused", "average", "restored"):
        r = rows[name]
        print(f"{name:<9} {r['exx']:9.1f} {r['eyy']:9.1f} {r['gxy']:9.1f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotspeckle",
        description="Exposure fusion, haze restoration and DIC evaluation for hot speckle imagery",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out_required=True):
        p.add_argument("--config", help="flat section.key = value config file")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for batch inputs")
        if out_required:
            p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic speckle corpus")
    add_common(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--degrade", choices=["none", "under", "over", "haze"], default="none")
    p.add_argument("--gain", type=float, default=0.15, help="exposure gain for under/over")
    p.add_argument("--noise", type=float, default=0.0, help="additive Gaussian sigma")
    p.add_argument("--warp-amplitude", type=float, default=0.5)
    p.add_argument("--noise-sigma", type=float, default=0.01, help="haze noise sigma")
    p.add_argument("--prefix", default="speckle_")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fuse", help="multi-exposure fusion enhancement of images")
    add_common(p)
    p.add_argument("inputs", nargs="+", help="input images (PGM/PNG)")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("restore", help="FSIM-guided Wiener restoration against a reference")
    add_common(p)
    p.add_argument("--ref", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--nsr", type=float, default=None, help="Wiener noise-to-signal ratio")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("average", help="grayscale-average a frame sequence")
    p.add_argument("--config", help="flat config file")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output mean image path")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("fsim", help="print the feature-similarity score of two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_fsim)

    p = sub.add_parser("mig", help="print the mean intensity gradient of images")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_mig)

    p = sub.add_parser("dic", help="subset DIC between a reference and a deformed image")
    add_common(p)
    p.add_argument("--ref", required=True)
    p.add_argument("--def", required=True, help="deformed image")
    p.set_defaults(func=cmd_dic)

    p = sub.add_parser("experiment-haze", help="three-strategy haze suppression comparison")
    add_common(p)
    p.add_argument("--ref", required=True, help="clean reference image")
    p.add_argument("--nsr", type=float, default=None)
    p.add_argument("frames", nargs="+", help="haze-degraded frames (>= 15)")
    p.set_defaults(func=cmd_experiment_haze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UndefinedScoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (ImageIOError, FileNotFoundError, ConfigError, CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
