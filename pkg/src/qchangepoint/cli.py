"""Batch experiment runner.

Three subcommands expose the library with stable CSV/JSONL output schemas:

* ``sweep``      -- collective bounds, SRM, fixed-point optimum, asymptote,
                    and optionally the two online strategies over an (n, c^2)
                    grid.
* ``spectrum``   -- eigenvalue-angle table and square-root-diagonal deviation
                    table at a single (n, c^2) point.
* ``montecarlo`` -- seeded Monte Carlo estimates for one online strategy,
                    with an optional per-trial JSONL audit dump.

Configuration comes from an optional flat key=value file plus command-line
flags; flags win.  Outputs are written to a temporary file and atomically
renamed, so failures never leave partial files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .collective import collective_summary
from .exceptions import SpectralFailureError
from .gram import diag_deviation_asymptotic, solve_spectrum, sqrt_gram, sqrt_trace_limit
from .online import basic_local_closed_form, iter_trial_records, monte_carlo

__all__ = ["ConfigError", "SweepRecord", "main", "entrypoint",
           "run_sweep", "run_spectrum_dump", "run_montecarlo"]

_MAX_SEED = 2**64

SWEEP_COLUMNS = (
    "n", "c2", "lower_bound", "srm", "fixed_point_opt", "upper_bound",
    "asymptotic", "basic_local", "greedy_estimate", "greedy_stderr",
)
SPECTRUM_COLUMNS = (
    "table", "l", "theta_l", "lambda_l", "k", "sqrtg_kk", "gamma",
    "deviation_numeric", "deviation_asymptotic",
)
MONTECARLO_COLUMNS = ("strategy", "n", "c2", "trials", "estimate", "std_error", "base_seed")


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class SweepRecord:
    """One output row of the sweep subcommand; None fields serialize empty."""

    n: int
    c2: float
    lower_bound: float
    srm: float
    fixed_point_opt: float
    upper_bound: float
    asymptotic: float
    basic_local: Optional[float] = None
    greedy_estimate: Optional[float] = None
    greedy_stderr: Optional[float] = None


# ---------------------------------------------------------------------------
# configuration


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def _parse_int_list(key: str, raw: str) -> list[int]:
    return [_parse_int(key, part) for part in raw.split(",") if part.strip()]


def _parse_float_list(key: str, raw: str) -> list[float]:
    return [_parse_float(key, part) for part in raw.split(",") if part.strip()]


_COMMON_KEYS = {"out", "format", "seed", "threads"}
_ALLOWED_KEYS = {
    "sweep": _COMMON_KEYS | {"n", "c2", "c2_start", "c2_stop", "c2_count",
                             "trials", "fp_tol", "fp_max_iter"},
    "spectrum": _COMMON_KEYS | {"n", "c2", "kmax"},
    "montecarlo": _COMMON_KEYS | {"strategy", "n", "c2", "trials", "records"},
}


def _read_config_file(path: str, allowed: set[str]) -> dict[str, str]:
    raw: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value.strip()
    return raw


def _merge_config(args: argparse.Namespace, subcommand: str) -> dict[str, str]:
    allowed = _ALLOWED_KEYS[subcommand]
    merged = _read_config_file(args.config, allowed) if args.config else {}
    for key in sorted(allowed):
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = str(flag_value)
    return merged


def _common_settings(raw: dict[str, str]) -> dict:
    out = raw.get("out")
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"format must be csv or jsonl, got {fmt!r}")
    seed = _parse_int("seed", raw.get("seed", "0"))
    if not 0 <= seed < _MAX_SEED:
        raise ConfigError(f"seed must lie in [0, 2^64), got {seed}")
    threads = _parse_int("threads", raw.get("threads", "1"))
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return {"out": out, "format": fmt, "seed": seed, "threads": threads}


def _c2_grid(raw: dict[str, str]) -> list[float]:
    has_list = "c2" in raw
    has_range = any(k in raw for k in ("c2_start", "c2_stop", "c2_count"))
    if has_list and has_range:
        raise ConfigError("give either c2 or c2_start/c2_stop/c2_count, not both")
    if has_range:
        missing = [k for k in ("c2_start", "c2_stop", "c2_count") if k not in raw]
        if missing:
            raise ConfigError(f"incomplete c2 range, missing {', '.join(missing)}")
        start = _parse_float("c2_start", raw["c2_start"])
        stop = _parse_float("c2_stop", raw["c2_stop"])
        count = _parse_int("c2_count", raw["c2_count"])
        if count < 1:
            raise ConfigError(f"c2_count must be >= 1, got {count}")
        grid = [float(v) for v in np.linspace(start, stop, count)]
    elif has_list:
        grid = _parse_float_list("c2", raw["c2"])
    else:
        grid = []
    if not grid:
        raise ConfigError("empty c2 grid")
    for value in grid:
        if not 0.0 <= value < 1.0:
            raise ConfigError(f"c2 values must lie in [0, 1), got {value}")
    return grid


def _n_list(raw: dict[str, str]) -> list[int]:
    values = _parse_int_list("n", raw.get("n", ""))
    if not values:
        raise ConfigError("empty n grid")
    for value in values:
        if value < 1:
            raise ConfigError(f"n values must be >= 1, got {value}")
    return values


# ---------------------------------------------------------------------------
# serialization


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _json_cell(value):
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    # round-trip through the 12-significant-digit text form for stable diffs
    return float(f"{float(value):.12g}")


def _serialize(columns: Sequence[str], rows: list[dict], fmt: str) -> str:
    lines = []
    if fmt == "csv":
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_format_cell(row.get(col)) for col in columns))
    else:
        for row in rows:
            lines.append(json.dumps(
                {col: _json_cell(row.get(col)) for col in columns},
                separators=(",", ":"),
            ))
    return "\n".join(lines) + "\n"


def _write_output(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp_name = tempfile.mkstemp(dir=directory, prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _map_grid(worker, points, threads: int) -> list:
    if threads == 1 or len(points) <= 1:
        return [worker(point) for point in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, points))


# ---------------------------------------------------------------------------
# subcommands


def run_sweep(raw: dict[str, str]) -> tuple[dict, list[dict]]:
    settings = _common_settings(raw)
    n_values = _n_list(raw)
    c2_values = _c2_grid(raw)
    trials = _parse_int("trials", raw.get("trials", "0"))
    if trials < 0:
        raise ConfigError(f"trials must be >= 0, got {trials}")
    fp_tol = _parse_float("fp_tol", raw.get("fp_tol", "1e-10"))
    if fp_tol <= 0.0:
        raise ConfigError(f"fp_tol must be > 0, got {fp_tol}")
    fp_max_iter = _parse_int("fp_max_iter", raw.get("fp_max_iter", "10000"))
    if fp_max_iter < 1:
        raise ConfigError(f"fp_max_iter must be >= 1, got {fp_max_iter}")

    def worker(point: tuple[int, float]) -> dict:
        n, c2 = point
        c = math.sqrt(c2)
        try:
            summary = collective_summary(n, c, tol=fp_tol, max_iter=fp_max_iter)
        except SpectralFailureError as exc:
            raise SpectralFailureError(f"at grid point n={n}, c2={c2:g}: {exc}") from exc
        record = SweepRecord(
            n=n,
            c2=c2,
            lower_bound=summary.lower_bound,
            srm=summary.srm,
            fixed_point_opt=summary.fixed_point_opt,
            upper_bound=summary.upper_bound,
            asymptotic=summary.asymptotic,
        )
        row = record.__dict__.copy()
        if trials > 0:
            estimate, stderr = monte_carlo("greedy", n, c, trials, settings["seed"])
            row["basic_local"] = basic_local_closed_form(n, c)
            row["greedy_estimate"] = estimate
            row["greedy_stderr"] = stderr
        return row

    points = [(n, c2) for n in n_values for c2 in c2_values]
    rows = _map_grid(worker, points, settings["threads"])
    return settings, rows


def run_spectrum_dump(raw: dict[str, str]) -> tuple[dict, list[dict]]:
    settings = _common_settings(raw)
    n_values = _n_list(raw)
    c2_values = _c2_grid(raw)
    if len(n_values) != 1 or len(c2_values) != 1:
        raise ConfigError("spectrum expects a single n and a single c2")
    n, c2 = n_values[0], c2_values[0]
    kmax = _parse_int("kmax", raw.get("kmax", str(min(n, 15))))
    if not 1 <= kmax <= n:
        raise ConfigError(f"kmax must lie in [1, n={n}], got {kmax}")
    c = math.sqrt(c2)
    try:
        spectrum = solve_spectrum(n, c)
    except SpectralFailureError as exc:
        raise SpectralFailureError(f"at grid point n={n}, c2={c2:g}: {exc}") from exc
    root = sqrt_gram(spectrum)
    gamma = sqrt_trace_limit(c)
    rows: list[dict] = []
    for l in range(n):
        rows.append({
            "table": "eigen",
            "l": l + 1,
            "theta_l": float(spectrum.thetas[l]),
            "lambda_l": float(spectrum.lambdas[l]),
        })
    for k in range(1, kmax + 1):
        diag_kk = float(root.diag[k - 1])
        rows.append({
            "table": "diag",
            "k": k,
            "sqrtg_kk": diag_kk,
            "gamma": gamma,
            "deviation_numeric": diag_kk - gamma,
            "deviation_asymptotic": diag_deviation_asymptotic(k, c),
        })
    return settings, rows


def run_montecarlo(raw: dict[str, str]) -> tuple[dict, list[dict], list[dict]]:
    settings = _common_settings(raw)
    strategy = raw.get("strategy")
    if strategy not in ("basic", "greedy"):
        raise ConfigError(f"strategy must be basic or greedy, got {strategy!r}")
    n_values = _n_list(raw)
    c2_values = _c2_grid(raw)
    trials = _parse_int("trials", raw.get("trials", "100000"))
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    records_path = raw.get("records")
    seed = settings["seed"]

    def worker(point: tuple[int, float]) -> tuple[dict, list[dict]]:
        n, c2 = point
        c = math.sqrt(c2)
        point_records: list[dict] = []
        if records_path is None:
            estimate, stderr = monte_carlo(strategy, n, c, trials, seed)
        else:
            successes = 0
            for trial, record in enumerate(
                iter_trial_records(strategy, n, c, trials, seed)
            ):
                successes += record.success
                point_records.append({
                    "strategy": strategy, "n": n, "c2": c2, "trial": trial,
                    "true_k": record.true_k, "guess": record.guess,
                    "outcomes": record.outcomes, "success": record.success,
                    "seed": record.seed,
                })
            estimate = successes / trials
            stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
        row = {
            "strategy": strategy, "n": n, "c2": c2, "trials": trials,
            "estimate": estimate, "std_error": stderr, "base_seed": seed,
        }
        return row, point_records

    points = [(n, c2) for n in n_values for c2 in c2_values]
    results = _map_grid(worker, points, settings["threads"])
    rows = [row for row, _ in results]
    records = [record for _, point_records in results for record in point_records]
    settings["records_path"] = records_path
    return settings, rows, records


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=["csv", "jsonl"], help="output format")
    parser.add_argument("--seed", type=int, help="base seed, 64-bit unsigned")
    parser.add_argument("--threads", type=int, help="worker threads for grid points")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qchangepoint",
        description="change-point identification experiments on qubit streams",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sweep = sub.add_parser("sweep", help="collective figures over an (n, c2) grid")
    _add_common_flags(sweep)
    sweep.add_argument("--n", help="comma-separated sequence lengths")
    sweep.add_argument("--c2", help="comma-separated squared overlaps in [0, 1)")
    sweep.add_argument("--trials", type=int,
                       help="greedy Monte Carlo trials per point (0 skips online columns)")
    sweep.add_argument("--fp-tol", dest="fp_tol", type=float,
                       help="fixed-point solver gain tolerance")
    sweep.add_argument("--fp-max-iter", dest="fp_max_iter", type=int,
                       help="fixed-point solver iteration cap")

    spectrum = sub.add_parser("spectrum", help="eigenvalue and sqrt-diagonal tables")
    _add_common_flags(spectrum)
    spectrum.add_argument("--n", help="sequence length (single value)")
    spectrum.add_argument("--c2", help="squared overlap (single value)")
    spectrum.add_argument("--kmax", type=int, help="diagonal rows to emit (default min(n, 15))")

    mc = sub.add_parser("montecarlo", help="online-strategy Monte Carlo estimates")
    _add_common_flags(mc)
    mc.add_argument("--strategy", choices=["basic", "greedy"])
    mc.add_argument("--n", help="comma-separated sequence lengths")
    mc.add_argument("--c2", help="comma-separated squared overlaps in [0, 1)")
    mc.add_argument("--trials", type=int, help="trials per grid point")
    mc.add_argument("--records", help="optional JSONL path for per-trial records")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        raw = _merge_config(args, args.subcommand)
        if args.subcommand == "sweep":
            settings, rows = run_sweep(raw)
            _write_output(settings["out"], _serialize(SWEEP_COLUMNS, rows, settings["format"]))
        elif args.subcommand == "spectrum":
            settings, rows = run_spectrum_dump(raw)
            _write_output(settings["out"], _serialize(SPECTRUM_COLUMNS, rows, settings["format"]))
        else:
            settings, rows, records = run_montecarlo(raw)
            _write_output(settings["out"], _serialize(MONTECARLO_COLUMNS, rows, settings["format"]))
            if settings["records_path"] is not None:
                lines = [json.dumps({k: _json_cell(v) for k, v in record.items()},
                                    separators=(",", ":"))
                         for record in records]
                _write_output(settings["records_path"], "\n".join(lines) + "\n")
    except ConfigError as exc:
        print(f"qchangepoint: config error: {exc}", file=sys.stderr)
        return 2
    except SpectralFailureError as exc:
        print(f"qchangepoint: spectral failure: {exc}", file=sys.stderr)
        return 3
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
