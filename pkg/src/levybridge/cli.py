"""Command-line surface: tables, Monte Carlo studies and path dumps.

Subcommands
-----------
zeta          table of zeta at even integers with the matching Bernoulli numbers
mse-table     analytic truncation mean-squared errors and budget-scaled values
convergence   coupled Monte Carlo error estimates against the analytic values,
              with running and final rate fits; method values cheap/stitch
              instead check the covariance-matched samplers' second moment
fluctuation   scaled residual covariance grids (analytic, optional empirical,
              and the pointwise limit)
sample-path   truncated-bridge sample paths on a grid

Output goes to stdout or --out as CSV (default) or newline-delimited JSON.
Every run is a pure function of its flags: metadata records the semantically
relevant flags only, so files are byte-identical across --threads settings.
Exit codes: 0 success, 2 flag/usage error, 3 runtime precondition failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bridge_expansions import (
    default_grid,
    limit_fluctuation_cov,
    residual_cov_grid,
    truncated_bridge_path,
)
from .gaussian_core import KINDS, RngStream, sample_coefficients
from .levy_area import (
    METHODS,
    VARIANTS,
    cheap_entry_batch,
    exact_mse,
    gaussian_budget,
    stitched_entry_batch,
)
from .mc_harness import (
    MCEstimate,
    _chunk_ranges,
    _map_ordered,
    _pairwise_merge,
    estimate_fluct_cov,
    estimate_mse,
    fit_rate,
)

AREA_METHODS = METHODS + ("cheap", "stitch")


@dataclass
class RunConfig:
    """Parsed, validated flags of one invocation."""

    subcommand: str
    seed: int = 42
    n_samples: int = 100_000
    dims: int = 2
    n_list: list[int] = field(default_factory=list)
    grid: np.ndarray | None = None
    methods: list[str] = field(default_factory=list)
    kind: str = "kl"
    variant: str = "davie"
    fmt: str = "csv"
    out: str | None = None
    threads: int = 1
    stream_offset: int = 0
    max_n: int = 8
    order: int = 64
    n_ref: int | None = None

    def meta_flags(self) -> dict:
        """Flags recorded in output metadata; excludes execution-only ones."""
        meta = {"seed": self.seed, "format": self.fmt, "stream-offset": self.stream_offset}
        if self.subcommand == "zeta":
            meta["max-n"] = self.max_n
        if self.subcommand in ("mse-table", "convergence"):
            meta["method"] = ",".join(self.methods)
            meta["n-list"] = ",".join(str(n) for n in self.n_list)
        if self.subcommand == "convergence":
            meta.update(
                {
                    "samples": self.n_samples,
                    "dims": self.dims,
                    "variant": self.variant,
                    "n-ref": self.n_ref if self.n_ref is not None else "auto",
                }
            )
        if self.subcommand == "fluctuation":
            meta.update(
                {
                    "kind": self.kind,
                    "n-list": ",".join(str(n) for n in self.n_list),
                    "samples": self.n_samples,
                    "grid": _grid_repr(self.grid),
                }
            )
        if self.subcommand == "sample-path":
            meta.update(
                {
                    "kind": self.kind,
                    "order": self.order,
                    "dims": self.dims,
                    "grid": _grid_repr(self.grid),
                }
            )
        return meta


def _grid_repr(grid: np.ndarray | None) -> str:
    if grid is None:
        return ""
    return ",".join(repr(float(g)) for g in grid)


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(rows: list[dict], fieldnames: list[str], meta: dict, cfg: RunConfig) -> None:
    buf = io.StringIO()
    if cfg.fmt == "csv":
        buf.write(f"# levybridge {__version__}\n")
        buf.write(f"# command: {cfg.subcommand}\n")
        flat = " ".join(f"{k}={v}" for k, v in sorted(meta.items()))
        buf.write(f"# flags: {flat}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt_cell(row.get(name)) for name in fieldnames])
    else:
        header = {"meta": {"version": __version__, "command": cfg.subcommand, **meta}}
        buf.write(json.dumps(header, sort_keys=True) + "\n")
        for row in rows:
            ordered = {name: row.get(name) for name in fieldnames if row.get(name) is not None}
            buf.write(json.dumps(ordered) + "\n")
    text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _parse_n_list(text: str, minimum: int) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("level list is empty")
    if any(v < minimum for v in values):
        raise argparse.ArgumentTypeError(f"levels must be >= {minimum}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("level list must be strictly increasing")
    return values


def _parse_grid(text: str) -> np.ndarray:
    if "," not in text and "." not in text:
        count = int(text)
        if count < 2:
            raise argparse.ArgumentTypeError("grid needs at least two points")
        return default_grid(count)
    try:
        points = np.array([float(p) for p in text.split(",") if p != ""], dtype=np.float64)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc
    if points.size == 0 or np.any(points < 0.0) or np.any(points > 1.0):
        raise argparse.ArgumentTypeError("grid points must lie in [0, 1]")
    return points


def _parse_methods(text: str, allowed: tuple[str, ...]) -> list[str]:
    if text == "all":
        return list(METHODS)
    methods = [part for part in text.split(",") if part != ""]
    bad = [m for m in methods if m not in allowed]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}, allowed: {allowed}")
    return methods


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=_seed_value, default=42)
    sub.add_argument("--stream-offset", type=_nonneg_int, default=0)
    sub.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", default=None)
    sub.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levybridge",
        description="Brownian bridge expansions, Levy-area approximations and their fluctuations",
    )
    parser.add_argument("--version", action="version", version=f"levybridge {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("zeta", help="zeta(2n) and Bernoulli table")
    p.add_argument("--max-n", type=_positive_int, default=8)
    _add_common_flags(p)

    p = subs.add_parser("mse-table", help="analytic Levy-area truncation errors")
    p.add_argument("--method", default="all")
    p.add_argument("--n-list", default="0,1,2,4,8,16,32,64,128,256,512")
    _add_common_flags(p)

    p = subs.add_parser("convergence", help="Monte Carlo truncation-error study")
    p.add_argument("--method", default="all")
    p.add_argument("--n-list", default="1,2,4,8,16,32")
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--dims", type=_positive_int, default=2)
    p.add_argument("--n-ref", default="auto")
    p.add_argument("--variant", choices=VARIANTS, default="davie")
    _add_common_flags(p)

    p = subs.add_parser("fluctuation", help="scaled residual covariance grids")
    p.add_argument("--kind", choices=KINDS, default="kl")
    p.add_argument("--n-list", default="64,256,1024")
    p.add_argument("--grid", default="101")
    p.add_argument("--samples", type=_nonneg_int, default=0)
    _add_common_flags(p)

    p = subs.add_parser("sample-path", help="truncated bridge sample paths")
    p.add_argument("--kind", choices=KINDS, default="kl")
    p.add_argument("--order", type=_positive_int, default=64)
    p.add_argument("--dims", type=_positive_int, default=1)
    p.add_argument("--grid", default="101")
    _add_common_flags(p)

    return parser


def _config_from_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    cfg.seed = args.seed
    cfg.stream_offset = args.stream_offset
    cfg.fmt = args.fmt
    cfg.out = args.out
    cfg.threads = args.threads
    try:
        if args.subcommand == "zeta":
            cfg.max_n = args.max_n
        elif args.subcommand == "mse-table":
            cfg.methods = _parse_methods(args.method, METHODS)
            cfg.n_list = _parse_n_list(args.n_list, minimum=0)
        elif args.subcommand == "convergence":
            cfg.methods = _parse_methods(args.method, AREA_METHODS)
            cfg.n_list = _parse_n_list(args.n_list, minimum=0)
            cfg.n_samples = args.samples
            cfg.dims = args.dims
            cfg.variant = args.variant
            if args.n_ref != "auto":
                cfg.n_ref = _positive_int(args.n_ref)
            if cfg.dims < 2:
                raise argparse.ArgumentTypeError("area subcommands need --dims >= 2")
        elif args.subcommand == "fluctuation":
            cfg.kind = args.kind
            cfg.n_list = _parse_n_list(args.n_list, minimum=1)
            cfg.grid = _parse_grid(args.grid)
            cfg.n_samples = args.samples
        elif args.subcommand == "sample-path":
            cfg.kind = args.kind
            cfg.order = args.order
            cfg.dims = args.dims
            cfg.grid = _parse_grid(args.grid)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    return cfg


def _cmd_zeta(cfg: RunConfig) -> None:
    from .zeta_moments import bernoulli_numbers, zeta_even

    table = bernoulli_numbers(2 * cfg.max_n)
    rows = []
    for n in range(1, cfg.max_n + 1):
        rows.append(
            {
                "n": n,
                "zeta_2n": zeta_even(n),
                "bernoulli_2n": str(table.rational(2 * n)),
            }
        )
    _emit(rows, ["n", "zeta_2n", "bernoulli_2n"], cfg.meta_flags(), cfg)


def _cmd_mse_table(cfg: RunConfig) -> None:
    rows = []
    for method in cfg.methods:
        for n in cfg.n_list:
            if method != "poly" and n < 1:
                continue
            mse = exact_mse(method, n)
            budget = gaussian_budget(method, n)
            rows.append(
                {
                    "method": method,
                    "n": n,
                    "budget": budget,
                    "mse": mse,
                    "budget_mse": budget * mse,
                }
            )
    _emit(rows, ["method", "n", "budget", "mse", "budget_mse"], cfg.meta_flags(), cfg)


def _moment_estimate(cfg: RunConfig, kernel) -> MCEstimate:
    def worker(rng):
        lo, hi = rng
        ids = cfg.stream_offset + np.arange(lo, hi, dtype=np.uint64)
        values = kernel(ids)
        return MCEstimate.from_values(values * values)

    parts = _map_ordered(worker, _chunk_ranges(cfg.n_samples, 1 << 14), cfg.threads)
    return _pairwise_merge(parts)


def _cmd_convergence(cfg: RunConfig) -> None:
    fields = [
        "row",
        "method",
        "n",
        "budget",
        "n_ref",
        "mse_mc",
        "stderr",
        "mse_analytic",
        "n_samples",
        "slope_running",
        "slope",
        "constant",
        "residual_norm",
    ]
    rows = []
    for method in cfg.methods:
        if method in METHODS:
            fit_points = []
            for n in cfg.n_list:
                if method != "poly" and n < 1:
                    continue
                n_ref = cfg.n_ref if cfg.n_ref is not None else max(64, 16 * n)
                if n_ref <= n:
                    raise ValueError(f"--n-ref must exceed every level, got {n_ref} <= {n}")
                est = estimate_mse(
                    method,
                    n,
                    n_ref,
                    cfg.dims,
                    cfg.n_samples,
                    seed=cfg.seed,
                    stream_offset=cfg.stream_offset,
                    threads=cfg.threads,
                )
                # exact reference correction: coupled mean + mse(n_ref) is an
                # unbiased estimate of the level-n error
                mse_mc = est.mean + exact_mse(method, n_ref)
                budget = gaussian_budget(method, n)
                fit_points.append((budget, mse_mc))
                row = {
                    "row": "mse",
                    "method": method,
                    "n": n,
                    "budget": budget,
                    "n_ref": n_ref,
                    "mse_mc": mse_mc,
                    "stderr": est.stderr,
                    "mse_analytic": exact_mse(method, n),
                    "n_samples": cfg.n_samples,
                }
                if len(fit_points) >= 3:
                    row["slope_running"] = fit_rate(fit_points).slope
                rows.append(row)
            if len(fit_points) >= 3:
                fit = fit_rate(fit_points)
                rows.append(
                    {
                        "row": "fit",
                        "method": method,
                        "slope": fit.slope,
                        "constant": fit.constant,
                        "residual_norm": fit.residual_norm,
                    }
                )
        else:
            label = f"{method}-{cfg.variant}"
            if method == "cheap":
                est = _moment_estimate(
                    cfg, lambda ids: cheap_entry_batch(cfg.seed, ids, cfg.dims, cfg.variant)
                )
                rows.append(
                    {
                        "row": "moment",
                        "method": label,
                        "n": 0,
                        "mse_mc": est.mean,
                        "stderr": est.stderr,
                        "mse_analytic": 0.25,
                        "n_samples": cfg.n_samples,
                    }
                )
            else:
                for n_sub in cfg.n_list:
                    if n_sub < 1:
                        continue
                    est = _moment_estimate(
                        cfg,
                        lambda ids: stitched_entry_batch(
                            cfg.seed, ids, cfg.dims, n_sub, cfg.variant
                        ),
                    )
                    rows.append(
                        {
                            "row": "moment",
                            "method": label,
                            "n": n_sub,
                            "mse_mc": est.mean,
                            "stderr": est.stderr,
                            "mse_analytic": 0.25,
                            "n_samples": cfg.n_samples,
                        }
                    )
    _emit(rows, fields, cfg.meta_flags(), cfg)


def _cmd_fluctuation(cfg: RunConfig) -> None:
    fields = ["kind", "n", "s", "t", "value", "empirical", "stderr", "limit"]
    rows = []
    grid = cfg.grid
    for n_terms in cfg.n_list:
        analytic = residual_cov_grid(cfg.kind, n_terms, grid)
        empirical = None
        if cfg.n_samples > 0:
            empirical = estimate_fluct_cov(
                cfg.kind,
                n_terms,
                grid,
                cfg.n_samples,
                seed=cfg.seed,
                stream_offset=cfg.stream_offset,
                threads=cfg.threads,
            )
        for i, s in enumerate(grid):
            for j, t in enumerate(grid):
                row = {
                    "kind": cfg.kind,
                    "n": n_terms,
                    "s": float(s),
                    "t": float(t),
                    "value": float(analytic.values[i, j]),
                    "limit": limit_fluctuation_cov(cfg.kind, float(s), float(t)),
                }
                if empirical is not None:
                    row["empirical"] = float(empirical.values[i, j])
                    row["stderr"] = float(empirical.stderr[i, j])
                rows.append(row)
    _emit(rows, fields, cfg.meta_flags(), cfg)


def _cmd_sample_path(cfg: RunConfig) -> None:
    stream = RngStream(seed=cfg.seed, stream_id=cfg.stream_offset)
    coeffs = sample_coefficients(stream, cfg.kind, cfg.order, cfg.dims)
    path = truncated_bridge_path(coeffs, cfg.grid)
    fields = ["t"] + [f"v{i + 1}" for i in range(cfg.dims)]
    rows = []
    for i, t in enumerate(path.ts):
        row = {"t": float(t)}
        for j in range(cfg.dims):
            row[f"v{j + 1}"] = float(path.values[i, j])
        rows.append(row)
    _emit(rows, fields, cfg.meta_flags(), cfg)


_COMMANDS = {
    "zeta": _cmd_zeta,
    "mse-table": _cmd_mse_table,
    "convergence": _cmd_convergence,
    "fluctuation": _cmd_fluctuation,
    "sample-path": _cmd_sample_path,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config_from_args(parser, args)
    try:
        _COMMANDS[cfg.subcommand](cfg)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
