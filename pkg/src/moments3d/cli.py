"""Command-line front end: ``moments3d {voxelize,featurize,stats,bench,reconstruct}``.

Exit codes: 0 clean, 1 some inputs failed, 2 usage or configuration error.
Any long option can also be given in a JSON file passed with ``--config``
(keys use underscores, e.g. ``{"grid": 32, "families": ["hahn"]}``);
command-line flags override the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import HahnParams
from .bench import bench_families, bench_kernels, format_kernel_report, format_report
from .moments import FAMILIES, MomentError, hahn_moments_3d, reconstruct_hahn
from .pipeline import PipelineError, RunConfig, build_table, load_grid, read_feature_csv, read_labels, to_labeled_dataset
from .stats import DispersionError, class_dispersion
from .voxel import VoxelGrid, parse_xyz, read_binvox, voxelize, write_binvox

log = logging.getLogger("moments3d")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
MAX_RECONSTRUCT_N = 16


class UsageError(Exception):
    pass


def _add_grid_options(p: argparse.ArgumentParser):
    p.add_argument("--grid", type=int, default=64, help="voxel grid edge n (default 64)")
    p.add_argument("--mode", choices=("sphere", "point"), default="sphere", help="voxelization mode (default sphere)")
    p.add_argument("--margin", type=float, default=0.05, help="fractional empty border per side (default 0.05)")


def _add_moment_options(p: argparse.ArgumentParser):
    p.add_argument("--families", nargs="+", choices=FAMILIES, default=list(FAMILIES),
                   help="moment families (default: all five)")
    p.add_argument("--max-order", type=int, default=8, help="maximum moment order (default 8)")
    p.add_argument("--mu", type=float, default=0.0, help="Hahn mu (default 0)")
    p.add_argument("--nu", type=float, default=0.0, help="Hahn nu (default 0)")
    p.add_argument("--geometric-variant", choices=("zero_order", "precise"), default="zero_order",
                   help="geometric basis (default zero_order)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moments3d", description="3D moment descriptors for voxelized molecules.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="JSON file of option defaults")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("voxelize", help="XYZ files to binvox grids plus a manifest")
    p.add_argument("inputs", nargs="*", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_grid_options(p)

    p = sub.add_parser("featurize", help="binvox/XYZ files to a CSV and/or ARFF dataset")
    p.add_argument("inputs", nargs="*", type=Path)
    p.add_argument("--labels", type=Path, required=True, help="CSV of id,class")
    p.add_argument("--out", type=Path, required=True, help="output path; the extension is replaced per format")
    p.add_argument("--format", choices=("csv", "arff", "both"), default="both", help="default both")
    p.add_argument("--raw-real", action="store_true", help="write real families as plain decimals, not encoded")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    _add_grid_options(p)
    _add_moment_options(p)

    p = sub.add_parser("stats", help="dispersion report for a featurized CSV")
    p.add_argument("dataset", type=Path)
    p.add_argument("--out", type=Path, help="report path (default stdout)")
    p.add_argument("--stats-mode", choices=("pooled", "loo"), default="pooled", help="comparison sets (default pooled)")

    p = sub.add_parser("bench", help="per-family timing and memory (machine-dependent)")
    p.add_argument("inputs", nargs="*", type=Path)
    p.add_argument("--repeats", type=int, default=50, help="timed runs per family (default 50)")
    p.add_argument("--kernels", action="store_true", help="also compare numpy and numba kernels")
    p.add_argument("--out", type=Path, help="report path (default stdout)")
    _add_grid_options(p)
    _add_moment_options(p)

    p = sub.add_parser("reconstruct", help="Hahn forward+inverse round trip of a small binvox grid")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, required=True, help="binvox of the clipped reconstruction")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    return parser


def _load_config(argv: list[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return {}
    try:
        cfg = json.loads(known.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _apply_config(parser: argparse.ArgumentParser, cfg: dict):
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})


def _run_config(args) -> RunConfig:
    try:
        return RunConfig(
            families=tuple(getattr(args, "families", FAMILIES)),
            max_order=getattr(args, "max_order", 8),
            grid=args.grid,
            mu=getattr(args, "mu", 0.0),
            nu=getattr(args, "nu", 0.0),
            mode=args.mode,
            margin=args.margin,
            geometric_variant=getattr(args, "geometric_variant", "zero_order"),
            raw_real=getattr(args, "raw_real", False),
            jobs=max(getattr(args, "jobs", 1), 1),
            repeats=getattr(args, "repeats", 50),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _need_inputs(args):
    if not args.inputs:
        raise UsageError("no input files given")


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8", newline="")


def cmd_voxelize(args) -> int:
    _need_inputs(args)
    config = _run_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    manifest, failed = ["id,file"], 0
    for path in args.inputs:
        try:
            mol = parse_xyz(path.read_text(encoding="utf-8"), name=path.stem)
            grid = voxelize(mol, config.grid, config.mode, margin=config.margin)
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            failed += 1
            continue
        target = args.out / f"{path.stem}.binvox"
        target.write_bytes(write_binvox(grid))
        manifest.append(f"{path.stem},{target.name}")
    (args.out / "manifest.csv").write_text("\n".join(manifest) + "\n", encoding="utf-8")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_featurize(args) -> int:
    _need_inputs(args)
    config = _run_config(args)
    try:
        labels = read_labels(args.labels.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read labels: {exc}") from None
    try:
        table, errors = build_table(args.inputs, labels, config)
    except PipelineError as exc:
        raise UsageError(str(exc)) from None
    for msg in errors:
        print(f"error: {msg}", file=sys.stderr)
    if not table.ids:
        print("error: no molecule was featurized", file=sys.stderr)
        return EXIT_PARTIAL
    base = args.out.with_suffix("")
    if args.format in ("csv", "both"):
        Path(f"{base}.csv").write_text(table.to_csv(), encoding="utf-8", newline="")
    if args.format in ("arff", "both"):
        Path(f"{base}.arff").write_text(table.to_arff(), encoding="utf-8", newline="")
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_stats(args) -> int:
    try:
        table = read_feature_csv(args.dataset.read_text(encoding="utf-8"))
        report = class_dispersion(to_labeled_dataset(table), mode=args.stats_mode)
    except OSError as exc:
        raise UsageError(f"cannot read dataset: {exc}") from None
    except (PipelineError, DispersionError) as exc:
        raise UsageError(str(exc)) from None
    _emit(report.to_csv(), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _run_config(args)
    if args.inputs:
        grids = []
        for path in args.inputs:
            try:
                grids.append(load_grid(path, config))
            except (OSError, ValueError, KeyError) as exc:
                print(f"error: {path}: {exc}", file=sys.stderr)
        if not grids:
            return EXIT_PARTIAL
    else:
        # no inputs: a centred ball, so the run is self-contained
        c = (2.0 * np.arange(config.grid) - config.grid + 1) / config.grid
        x, y, z = np.meshgrid(c, c, c, indexing="ij")
        grids = [VoxelGrid((x * x + y * y + z * z <= 0.64).astype(np.float64))]
    parts = []
    for grid in grids:
        params = HahnParams(config.mu, config.nu, grid.n)
        results = bench_families(grid, config.repeats, config.families, config.max_order, params)
        parts.append(format_report(results))
    if args.kernels:
        try:
            parts.append(format_kernel_report(bench_kernels(min(config.grid, 32))))
        except RuntimeError as exc:
            parts.append(f"# kernel comparison skipped: {exc}\n")
    _emit("".join(parts), args.out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    try:
        grid = read_binvox(args.input.read_bytes())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    if grid.n > MAX_RECONSTRUCT_N:
        raise UsageError(
            f"grid n={grid.n} is too large for a complete Hahn basis (limit {MAX_RECONSTRUCT_N}); "
            "downsample or re-voxelize with --grid 16"
        )
    try:
        params = HahnParams(args.mu, args.nu, grid.n)
        moments = hahn_moments_3d(grid, grid.n - 1, params, complete=True)
        recon = reconstruct_hahn(moments)
    except (ValueError, MomentError) as exc:
        raise UsageError(str(exc)) from None
    err = float(np.max(np.abs(recon - grid.values))) if recon.size else 0.0
    clipped = np.clip(recon, 0.0, 1.0)
    args.out.write_bytes(write_binvox(VoxelGrid(clipped, grid.translate, grid.scale)))
    print(f"max_abs_error {err:.3e}")
    return EXIT_OK


COMMANDS = {
    "voxelize": cmd_voxelize,
    "featurize": cmd_featurize,
    "stats": cmd_stats,
    "bench": cmd_bench,
    "reconstruct": cmd_reconstruct,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, _load_config(argv))
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code == 0 else EXIT_USAGE
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
