"""Command-line pipeline: simulate, reconstruct, evaluate, export-slices, selftest.

Every command is driven by the config file described in
:mod:`ctvtomo.config`; flags override the file.  Exit codes: 0 on
success, 1 for usage or configuration errors, 2 for numerical failure
(divergence / NaN, or a failing selftest).
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import volio
from .config import ConfigError, RunConfig, default_config, load_config, save_config
from .geometry import GridMismatchError, Volume, VoxelGrid
from .phantom import NoiseSpec, add_noise, make_column_phantom, psnr
from .projector import GeometryMismatchError, ParallelProjector, Sinogram, make_scan_geometry
from .selftest import run_selftest
from .solver import DivergenceError, PdhgConfig, ReconResult, solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this CLI reserves 2 for
    # numerical failure, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_run_config(args) -> RunConfig:
    cfg = default_config(paper_scale=getattr(args, "paper_scale", False))
    if args.config is not None:
        cfg = load_config(args.config, base=cfg)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "method", None) is not None:
        overrides["method"] = args.method
    if getattr(args, "iters", None) is not None:
        overrides["max_iters"] = args.iters
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = args.out
    if getattr(args, "warm_start", None) is not None:
        overrides["warm_start"] = args.warm_start
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _scan_geometry(cfg: RunConfig):
    return make_scan_geometry(cfg.grid, cfg.angles_deg, cfg.detector_spacing, cfg.num_channels)


def _ground_truth(cfg: RunConfig) -> Volume:
    if cfg.input_volume is not None:
        vol, _ = volio.read_volume(cfg.input_volume)
        if vol.grid != cfg.grid:
            raise ConfigError(
                f"input volume grid {vol.grid.shape} does not match config grid {cfg.grid.shape}"
            )
        return vol
    return make_column_phantom(cfg.grid, cfg.column_radius, cfg.cracks)


def simulate(cfg: RunConfig):
    """Phantom + forward projection + noise.  Returns (volume, clean, noisy)."""
    truth = _ground_truth(cfg)
    geom = _scan_geometry(cfg)
    clean = Sinogram(geom, ParallelProjector(cfg.grid, geom)(truth.values))
    noisy = add_noise(clean, NoiseSpec(cfg.relative_sigma, cfg.seed))
    return truth, clean, noisy


def reconstruct(cfg: RunConfig, sino: Sinogram, log=None) -> ReconResult:
    """Run the configured solver on ``sino``; grid/geometry come from ``cfg``."""
    op = ParallelProjector(cfg.grid, sino.geometry)
    reg = {"tv": cfg.tv, "ctv": cfg.ctv, "none": None}[cfg.method]
    pdhg = PdhgConfig(
        max_iters=cfg.max_iters,
        extrapolation=cfg.extrapolation,
        nonneg=cfg.nonneg,
        norm_iters=cfg.norm_iters,
        seed=cfg.seed,
        stop_tol=cfg.stop_tol,
        verbose=log is not None,
    )
    init = None
    if cfg.warm_start is not None:
        init, _ = volio.read_volume(cfg.warm_start)
    return solve(op, sino.values, reg=reg, cfg=pdhg, init=init, log=log)


def _weights_meta(cfg: RunConfig) -> dict:
    if cfg.method == "tv":
        return {"lambda_x": cfg.tv.x, "lambda_y": cfg.tv.y, "lambda_z": cfg.tv.z}
    if cfg.method == "ctv":
        return {
            "lambda_angular": cfg.ctv.angular,
            "lambda_radial": cfg.ctv.radial,
            "lambda_axial": cfg.ctv.axial,
        }
    return {}


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    truth, clean, noisy = simulate(cfg)
    sigma = cfg.relative_sigma * float(clean.values.max() - clean.values.min())

    truth_path = volio.write_volume(out / "ground_truth.raw", truth, {"role": "ground-truth"})
    clean_path = volio.write_sinogram(out / "sino_clean.raw", clean, {"noise_sigma": 0.0})
    noisy_path = volio.write_sinogram(
        out / "sino_noisy.raw",
        noisy,
        {"noise_sigma": repr(sigma), "relative_sigma": repr(cfg.relative_sigma), "seed": cfg.seed},
    )
    save_config(out / "run_config.cfg", cfg)

    geom = clean.geometry
    print(f"phantom: {cfg.grid.nx}x{cfg.grid.ny}x{cfg.grid.nz} voxels, "
          f"spacing {cfg.grid.voxel_spacing} mm")
    print(f"sinogram: {geom.num_views} views x {geom.num_rows} rows x "
          f"{geom.num_channels} channels, detector {geom.detector_spacing} mm")
    print(f"noise: sigma = {sigma:.6g} ({cfg.relative_sigma:.2%} of range), seed = {cfg.seed}")
    print(f"wrote: {truth_path} {clean_path} {noisy_path}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    cfg = _load_run_config(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    sino_path = Path(args.sinogram) if args.sinogram else out / "sino_noisy.raw"
    if not sino_path.is_file():
        raise ConfigError(f"sinogram file not found: {sino_path} (run simulate first?)")
    sino, _ = volio.read_sinogram(sino_path)

    expected = _scan_geometry(cfg)
    if sino.geometry != expected:
        raise ConfigError(
            "sinogram geometry does not match the config: "
            f"file has {sino.geometry}, config implies {expected}"
        )

    log_path = out / f"recon_{cfg.method}_iters.log"
    started = time.perf_counter()
    with log_path.open("w") as log:
        result = reconstruct(cfg, sino, log=log)
    wall = time.perf_counter() - started

    meta = {
        "role": "reconstruction",
        "method": cfg.method,
        "iterations": result.iterations,
        "wall_time_s": f"{wall:.3f}",
        "seed": cfg.seed,
        "objective_final": repr(float(result.objective[-1])),
        "datafit_final": repr(float(result.datafit[-1])),
    }
    meta.update(_weights_meta(cfg))
    recon_path = volio.write_volume(out / f"recon_{cfg.method}.raw", result.volume, meta)
    print(f"method: {cfg.method}, iterations: {result.iterations}, "
          f"wall time: {wall:.2f} s")
    print(f"objective: {result.objective[-1]:.6e} (datafit {result.datafit[-1]:.6e})")
    print(f"wrote: {recon_path} {log_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    recon, meta = volio.read_volume(args.recon)
    reference, _ = volio.read_volume(args.reference)
    value = psnr(recon, reference)
    print(f"psnr_db = {'inf' if value == float('inf') else f'{value:.4f}'}")
    if "wall_time_s" in meta:
        print(f"wall_time_s = {meta['wall_time_s']}")
    if "method" in meta:
        print(f"method = {meta['method']}")
    return EXIT_OK


def _parse_indices(raw: str, size: int):
    indices = []
    for part in raw.split(","):
        part = part.strip()
        if part == "mid":
            indices.append(size // 2)
        elif part:
            indices.append(int(part))
    return indices


def cmd_export_slices(args) -> int:
    vol, _ = volio.read_volume(args.volume)
    axis_size = dict(x=vol.grid.nx, y=vol.grid.ny, z=vol.grid.nz)[args.axis]
    indices = _parse_indices(args.indices, axis_size)
    window = None
    if args.window is not None:
        lo, _, hi = args.window.partition(":")
        window = (float(lo), float(hi))
    out_dir = Path(args.out) if args.out else Path(args.volume).parent
    stem = Path(args.volume).stem
    paths = volio.export_slices(
        vol, args.axis, indices, out_dir, stem=stem, depth=args.depth, window=window
    )
    for path in paths:
        print(f"wrote: {path}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    ok = run_selftest(seed=args.seed if args.seed is not None else 0)
    print("selftest:", "all checks passed" if ok else "FAILURES detected")
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctvtomo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run config file")
    common.add_argument("--seed", type=int, metavar="N", help="override the run seed")
    common.add_argument("--out", metavar="DIR", help="override the output directory")
    common.add_argument("--paper-scale", action="store_true",
                        help="use the full-size 121x121x100 defaults")
    common.add_argument("--verbose", action="store_true", help="chatty progress output")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="generate phantom, sinograms and noise")
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct", parents=[common],
                           help="solve the regularized reconstruction")
    p_rec.add_argument("--method", choices=("tv", "ctv", "none"),
                       help="override the configured prior")
    p_rec.add_argument("--iters", type=int, metavar="N", help="override max iterations")
    p_rec.add_argument("--warm-start", metavar="PATH", help="initial volume file")
    p_rec.add_argument("--sinogram", metavar="PATH",
                       help="input sinogram (default: <out>/sino_noisy.raw)")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_eval = sub.add_parser("evaluate", help="PSNR of a reconstruction against a reference")
    p_eval.add_argument("recon", help="reconstructed volume (.raw)")
    p_eval.add_argument("reference", help="reference volume (.raw)")
    p_eval.set_defaults(func=cmd_evaluate)

    p_exp = sub.add_parser("export-slices", help="write cross sections as PGM images")
    p_exp.add_argument("volume", help="volume file (.raw)")
    p_exp.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p_exp.add_argument("--indices", default="mid",
                       help="comma-separated indices, 'mid' for the center")
    p_exp.add_argument("--depth", type=int, choices=(8, 16), default=8)
    p_exp.add_argument("--window", metavar="LO:HI", help="gray window (default: min:max)")
    p_exp.add_argument("--out", metavar="DIR", help="output directory (default: alongside input)")
    p_exp.set_defaults(func=cmd_export_slices)

    p_self = sub.add_parser("selftest", help="run the adjoint/invariant check suite")
    p_self.add_argument("--seed", type=int, metavar="N")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridMismatchError, GeometryMismatchError, FileNotFoundError,
            IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
