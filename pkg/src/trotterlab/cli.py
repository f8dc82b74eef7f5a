"""Command-line front end: error sweeps, bound tables, invariant battery, model dumps.

Sweep configs are flat ``key = value`` text (see the README for the
grammar); all CSV output uses one fixed column set with empty cells for
non-applicable columns, floats in shortest round-trip decimal, and rows
sorted lexicographically, so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, replace

from .bounds import (BoundInputs, FORMULA_COMMUTATOR, FORMULA_COUNT_CONST,
                     FORMULA_COUNT_GENERAL, FORMULA_WEAKLY_CORRELATED,
                     const_gamma_error_bound, generic_error_bound,
                     projected_commutator_bound, trotter_count_formula,
                     weakly_correlated_number)
from .errors import ErrorLab, ErrorSample
from .formulas import suzuki_plan
from .lattice import (DEFAULT_DIM_CAP, build_aklt, build_long_range_heisenberg,
                      build_mg, extensiveness, spec_to_json)
from .operators import spectral_norm
from .verify import results_to_csv, run_verify

CSV_HEADER = ["model", "N", "p", "Gamma", "t", "delta", "error_kind", "error_value",
              "bound_cor_s4", "bound_thm_s3", "delta_prime", "p0",
              "time_condition_ok", "formula_id"]

MODELS = ("aklt", "mg", "lr_heisenberg")
_LOCAL_DIM = {"aklt": 3, "mg": 2, "lr_heisenberg": 2}
_MIN_SITES = {"aklt": 2, "mg": 3, "lr_heisenberg": 2}
_ORDERS = (1, 2, 4, 6)

BOUNDS_REQUIRED_COLUMNS = ("N", "k", "g", "Gamma", "p", "delta", "t",
                           "eps_total", "eps_small")
BOUNDS_OPTIONAL_COLUMNS = ("c_conc", "energy_expect")


class ConfigError(ValueError):
    """Bad config file or flag combination; mapped to exit code 2."""


@dataclass(frozen=True)
class SweepConfig:
    model: str
    n_list: tuple[int, ...]
    p_list: tuple[int, ...]
    t_list: tuple[float, ...]
    delta_list: tuple[float, ...]
    bounds: bool = False
    seed: int = 0
    output_path: str | None = None
    eps_small: float = 0.01
    workers: int = 1
    cap: int = DEFAULT_DIM_CAP
    nu: float = 2.0
    j0: float = 1.0


_CONFIG_KEYS = ("model", "n", "p", "t", "delta", "bounds", "seed", "out",
                "eps_small", "workers", "cap", "nu", "j0")
_REQUIRED_KEYS = ("model", "n", "p", "t", "delta")


def _parse_scalar(key: str, text: str, kind) -> object:
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {text!r}") from exc


def _parse_list(key: str, text: str, kind) -> tuple:
    items = [piece.strip() for piece in text.split(",")]
    if any(not piece for piece in items):
        raise ConfigError(f"key {key!r}: empty list entry in {text!r}")
    return tuple(_parse_scalar(key, piece, kind) for piece in items)


def _parse_delta(key: str, text: str) -> float:
    if text.lower() == "inf":
        return math.inf
    return float(_parse_scalar(key, text, float))


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse and validate the flat key = value grammar."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: key {key!r} has an empty value")
        values[key] = value
    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    bounds_text = values.get("bounds", "false").lower()
    if bounds_text not in ("true", "false"):
        raise ConfigError(f"key 'bounds': expected true or false, got {values['bounds']!r}")
    config = SweepConfig(
        model=values["model"],
        n_list=_parse_list("n", values["n"], int),
        p_list=_parse_list("p", values["p"], int),
        t_list=_parse_list("t", values["t"], float),
        delta_list=tuple(_parse_delta("delta", piece.strip())
                         for piece in values["delta"].split(",")),
        bounds=bounds_text == "true",
        seed=int(_parse_scalar("seed", values.get("seed", "0"), int)),
        output_path=values.get("out"),
        eps_small=float(_parse_scalar("eps_small", values.get("eps_small", "0.01"), float)),
        workers=int(_parse_scalar("workers", values.get("workers", "1"), int)),
        cap=int(_parse_scalar("cap", values.get("cap", str(DEFAULT_DIM_CAP)), int)),
        nu=float(_parse_scalar("nu", values.get("nu", "2.0"), float)),
        j0=float(_parse_scalar("j0", values.get("j0", "1.0"), float)),
    )
    validate_sweep_config(config)
    return config


def validate_sweep_config(config: SweepConfig) -> None:
    if config.model not in MODELS:
        raise ConfigError(f"key 'model': unknown model {config.model!r}")
    if not config.n_list:
        raise ConfigError("key 'n': empty list")
    for n in config.n_list:
        if n < _MIN_SITES[config.model]:
            raise ConfigError(f"key 'n': {config.model} needs at least "
                              f"{_MIN_SITES[config.model]} sites, got {n}")
        dim = _LOCAL_DIM[config.model] ** n
        if dim > config.cap:
            raise ConfigError(f"key 'n': {config.model} N={n} has Hilbert dimension "
                              f"{dim}, above the cap {config.cap}")
    if not config.p_list or any(p not in _ORDERS for p in config.p_list):
        raise ConfigError(f"key 'p': orders must be among {_ORDERS}")
    if not config.t_list or any(t < 0 for t in config.t_list):
        raise ConfigError("key 't': need a nonempty list of nonnegative times")
    if not config.delta_list:
        raise ConfigError("key 'delta': empty list")
    if not 0 < config.eps_small < 1:
        raise ConfigError("key 'eps_small': must lie in (0, 1)")
    if config.workers < 1:
        raise ConfigError("key 'workers': must be at least 1")
    if config.seed < 0:
        raise ConfigError("key 'seed': must be nonnegative")
    if config.cap < 4:
        raise ConfigError("key 'cap': must be at least 4")
    if config.nu < 0 or config.j0 <= 0:
        raise ConfigError("keys 'nu'/'j0': need nu >= 0 and j0 > 0")


def _build_model(model: str, n: int, cap: int, nu: float, j0: float):
    if model == "aklt":
        return build_aklt(n, dim_cap=cap)
    if model == "mg":
        return build_mg(n, dim_cap=cap)
    return build_long_range_heisenberg(n, nu, j0, dim_cap=cap)


def _empty_row() -> dict:
    return dict.fromkeys(CSV_HEADER)


def _task_rows(config: SweepConfig, n: int) -> list[dict]:
    spec = _build_model(config.model, n, config.cap, config.nu, config.j0)
    lab = ErrorLab(spec)
    g = extensiveness(spec)
    k = spec.locality_k
    gamma = spec.gamma_count
    energy_cap = n * g
    rows = []
    for p in config.p_list:
        plan = suzuki_plan(p, gamma)
        for t in config.t_list:
            diff = lab.difference(plan, t)
            for delta in config.delta_list:
                if math.isinf(delta):
                    kind, value = "full", spectral_norm(diff)
                else:
                    kind = "projected"
                    value = spectral_norm(diff @ lab.low_column_basis(delta))
                sample = ErrorSample(config.model, n, p, gamma, t,
                                     None if math.isinf(delta) else delta, value, kind)
                row = _empty_row()
                row.update(model=config.model, N=n, p=p, Gamma=gamma, t=t, delta=delta,
                           error_kind=sample.error_kind, error_value=sample.error_value)
                if config.bounds and not math.isinf(delta) and 0 <= delta <= energy_cap:
                    inputs = BoundInputs(n, k, g, gamma, p, delta, t,
                                         eps_total=config.eps_small,
                                         eps_small=config.eps_small)
                    const_report = const_gamma_error_bound(inputs)
                    generic_report = generic_error_bound(inputs)
                    row.update(bound_cor_s4=const_report.bound_value,
                               bound_thm_s3=generic_report.bound_value,
                               time_condition_ok=(const_report.time_condition_ok
                                                  and generic_report.time_condition_ok))
                rows.append(row)
    return rows


def _task_rows_star(args) -> list[dict]:
    return _task_rows(*args)


def _sort_key(row: dict):
    return (row["model"], row["N"], row["p"], row["t"], row["delta"])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_cell(row[name]) for name in CSV_HEADER])
    return buffer.getvalue()


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def run_sweep(config: SweepConfig) -> str:
    """Evaluate the grid, return (and optionally write) the sorted CSV."""
    validate_sweep_config(config)
    tasks = [(config, n) for n in config.n_list]
    if config.workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_task_rows_star, tasks))
    else:
        chunks = [_task_rows(*task) for task in tasks]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=_sort_key)
    text = rows_to_csv(rows)
    if config.output_path:
        _write_atomic(config.output_path, text)
    return text


def _parse_bounds_record(record: dict) -> BoundInputs:
    def grab(column: str, kind):
        raw = (record.get(column) or "").strip()
        if not raw:
            raise ValueError(f"missing value for {column!r}")
        return kind(raw)

    optional: dict = {}
    c_conc = (record.get("c_conc") or "").strip()
    if c_conc:
        optional["concentration_c"] = float(c_conc)
    energy = (record.get("energy_expect") or "").strip()
    if energy:
        optional["energy_expectation"] = float(energy)
    return BoundInputs(
        num_sites=grab("N", int), locality=grab("k", int),
        extensiveness=grab("g", float), gamma_count=grab("Gamma", int),
        order_p=grab("p", int), delta=grab("delta", float), time=grab("t", float),
        eps_total=grab("eps_total", float), eps_small=grab("eps_small", float),
        **optional)


def run_bounds(text: str) -> tuple[str, list[str]]:
    """Evaluate every bound family per input row; returns (csv, diagnostics)."""
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [col for col in BOUNDS_REQUIRED_COLUMNS if col not in header]
    if missing:
        raise ConfigError(f"bounds input is missing columns {missing}")
    rows: list[dict] = []
    diagnostics: list[str] = []
    for number, record in enumerate(reader, start=2):
        try:
            inputs = _parse_bounds_record(record)
        except (ValueError, TypeError) as exc:
            diagnostics.append(f"row {number}: rejected ({exc})")
            continue

        def stamped(**fields) -> dict:
            row = _empty_row()
            row.update(N=inputs.num_sites, p=inputs.order_p, Gamma=inputs.gamma_count,
                       t=inputs.time, delta=inputs.delta)
            row.update(fields)
            return row

        const_report = const_gamma_error_bound(inputs)
        generic_report = generic_error_bound(inputs)
        rows.append(stamped(bound_cor_s4=const_report.bound_value,
                            delta_prime=const_report.delta_prime,
                            time_condition_ok=const_report.time_condition_ok,
                            formula_id=const_report.formula_id))
        rows.append(stamped(bound_thm_s3=generic_report.bound_value,
                            delta_prime=generic_report.delta_prime,
                            p0=generic_report.p0,
                            time_condition_ok=generic_report.time_condition_ok,
                            formula_id=generic_report.formula_id))
        commutator_cap = projected_commutator_bound(
            inputs.order_p, inputs.locality, inputs.extensiveness, inputs.delta)
        rows.append(stamped(error_value=commutator_cap, formula_id=FORMULA_COMMUTATOR))
        rows.append(stamped(error_value=trotter_count_formula(inputs, "const_gamma"),
                            formula_id=FORMULA_COUNT_CONST))
        rows.append(stamped(error_value=trotter_count_formula(inputs, "general"),
                            formula_id=FORMULA_COUNT_GENERAL))
        if inputs.energy_expectation is not None:
            x, count = weakly_correlated_number(inputs)
            rows.append(stamped(error_value=count,
                                delta_prime=inputs.energy_expectation + x,
                                formula_id=FORMULA_WEAKLY_CORRELATED))
    return rows_to_csv(rows), diagnostics


def _cmd_sweep(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    config = parse_sweep_config(text)
    overrides = {}
    if args.out is not None:
        overrides["output_path"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.cap is not None:
        overrides["cap"] = args.cap
    if overrides:
        config = replace(config, **overrides)
        validate_sweep_config(config)
    text_out = run_sweep(config)
    if not config.output_path:
        sys.stdout.write(text_out)
    return 0


def _cmd_bounds(args) -> int:
    try:
        with open(args.inputs, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read inputs {args.inputs!r}: {exc}") from exc
    csv_text, diagnostics = run_bounds(text)
    for line in diagnostics:
        print(line, file=sys.stderr)
    if args.out:
        _write_atomic(args.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    return 1 if diagnostics else 0


def _cmd_verify(args) -> int:
    results = run_verify(seed=args.seed if args.seed is not None else 0)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        detail = "" if result.observed is None else f" observed={result.observed!r}"
        print(f"{status} {result.check_id}{detail}")
    failures = sum(not r.passed for r in results)
    print(f"{len(results) - failures}/{len(results)} checks passed")
    if args.out:
        _write_atomic(args.out, results_to_csv(results))
    return 1 if failures else 0


def _cmd_dump_model(args) -> int:
    if args.model not in MODELS:
        raise ConfigError(f"unknown model {args.model!r}")
    if args.n < _MIN_SITES[args.model]:
        raise ConfigError(f"{args.model} needs at least {_MIN_SITES[args.model]} sites")
    cap = args.cap if args.cap is not None else DEFAULT_DIM_CAP
    try:
        spec = _build_model(args.model, args.n, cap, args.nu, args.j0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    text = spec_to_json(spec) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trotterlab",
        description="Exact product-formula errors on low-energy subspaces")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run an error sweep from a config file")
    sweep.add_argument("config", help="flat key = value config file")
    sweep.add_argument("--out", help="output CSV path (overrides the config)")
    sweep.add_argument("--workers", type=int, help="parallel workers over chain sizes")
    sweep.add_argument("--seed", type=int, help="seed recorded with the sweep")
    sweep.add_argument("--cap", type=int, help="Hilbert dimension cap")
    sweep.set_defaults(func=_cmd_sweep)

    bounds = sub.add_parser("bounds", help="evaluate bound formulas for input rows")
    bounds.add_argument("inputs", help="CSV of scalar inputs, one row per evaluation")
    bounds.add_argument("--out", help="output CSV path")
    bounds.set_defaults(func=_cmd_bounds)

    verify = sub.add_parser("verify", help="run the invariant battery")
    verify.add_argument("--out", help="write the check table as CSV")
    verify.add_argument("--seed", type=int, help="seed for sampled checks")
    verify.set_defaults(func=_cmd_verify)

    dump = sub.add_parser("dump-model", help="print a built-in model as JSON")
    dump.add_argument("--model", required=True, choices=MODELS)
    dump.add_argument("--n", required=True, type=int, help="number of sites")
    dump.add_argument("--nu", type=float, default=2.0, help="long-range decay exponent")
    dump.add_argument("--j0", type=float, default=1.0, help="long-range base coupling")
    dump.add_argument("--cap", type=int, help="Hilbert dimension cap")
    dump.add_argument("--out", help="output path (default stdout)")
    dump.set_defaults(func=_cmd_dump_model)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
