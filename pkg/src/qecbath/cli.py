"""Command-line entry points.

Four subcommands, each taking --config <path> plus repeatable
--set key=value overrides:

  simulate       one fidelity-vs-time comparison -> CSV + metadata JSON
  sweep          cartesian parameter grid, flushed row-by-row, resumable
  critical-time  crossover times kappa*t_c over a Werner p grid -> CSV
  validate-codes brute-force code-correctness suites; nonzero exit on
                 any disagreement with the tabulated corrections

Exit codes: 0 ok, 1 domain error (failed validation, integration
failure), 2 usage error (bad arguments or configuration). Output files
carry no timestamps, so identical runs produce byte-identical artifacts.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

from .codes import validate_all
from .config import ConfigError, parse_config
from .protocols import critical_time, run_protocol, sweep, sweep_points

__all__ = ["main"]

UNITS_COMMENT = ("# units: time in 1/omega; temperature and kappa in units of omega; "
                 "fidelity dimensionless")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        if x != x:
            return "nan"
        if x == float("inf"):
            return "inf"
        return f"{x:.12g}"
    return str(x)


def _write_metadata(path, config, extra):
    doc = {"config": config.as_dict()}
    doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(config):
    spec = config.to_protocol_spec()
    result = run_protocol(spec)
    csv_path = config.output + ".csv"
    meta_path = config.output + ".meta.json"
    cols = ["t"]
    if result.fidelity_no_qec is not None:
        cols.append("fidelity_no_qec")
    cols += [f"fidelity_qec_c{n}" for n in spec.n_cycles]
    with open(csv_path, "w") as fh:
        fh.write(UNITS_COMMENT + "\n")
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(result.t_grid):
            row = [_fmt(float(t))]
            if result.fidelity_no_qec is not None:
                row.append(_fmt(float(result.fidelity_no_qec[i])))
            row += [_fmt(float(result.fidelity_qec[n][i])) for n in spec.n_cycles]
            fh.write(",".join(row) + "\n")
    _write_metadata(meta_path, config, {
        "effective_times": {str(k): v for k, v in
                            result.metadata["effective_times"].items()},
        "engine": result.metadata["engine"],
    })
    print(f"wrote {csv_path} and {meta_path}")
    return 0


def _sweep_grid(config):
    grid = {}
    if config.kappa_values is not None:
        grid["kappa"] = list(config.kappa_values)
    if config.temperature_values is not None:
        grid["temperature"] = list(config.temperature_values)
    if config.p_values is not None:
        grid["werner_p"] = list(config.p_values)
    if config.code_values is not None:
        grid["code"] = list(config.code_values)
    if config.cycles_values is not None:
        grid["n_cycles"] = [(c,) for c in config.cycles_values]
    if config.topology_values is not None:
        grid["topology"] = list(config.topology_values)
    if not grid:
        grid["kappa"] = [config.kappa]
    return grid


SWEEP_COLS = ("point", "kappa", "temperature", "werner_p", "code", "cycles",
              "topology", "t", "fidelity_no_qec", "fidelity_qec", "status")


def _completed_points(csv_path, rows_per_point):
    """Indices of grid points already fully present in an existing CSV.

    A point is complete when all its time rows were flushed, or when it
    ended in a single error row.
    """
    if not os.path.exists(csv_path):
        return set()
    counts = {}
    errored = set()
    with open(csv_path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("point") or not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            idx = int(parts[0])
            counts[idx] = counts.get(idx, 0) + 1
            if parts[-1].startswith("error:"):
                errored.add(idx)
    return {i for i, c in counts.items() if c >= rows_per_point} | errored


def cmd_sweep(config):
    spec = config.to_protocol_spec()
    grid = _sweep_grid(config)
    combos = sweep_points(grid)
    csv_path = config.output + ".csv"
    done = _completed_points(csv_path, len(spec.t_grid))
    done &= set(range(len(combos)))
    fh = open(csv_path, "a" if done else "w")
    if not done:
        fh.write(UNITS_COMMENT + "\n")
        fh.write(",".join(SWEEP_COLS) + "\n")
    failures = []

    def flush_point(idx, overrides, result, error):
        if error == "skipped":
            return
        point_spec = replace(spec, **overrides)
        fixed = [_fmt(point_spec.kappa), _fmt(point_spec.temperature),
                 _fmt(point_spec.werner_p), str(point_spec.code),
                 ";".join(str(c) for c in point_spec.n_cycles),
                 point_spec.topology]
        if error is not None:
            failures.append((idx, error))
            clean = error.replace(",", ";")
            fh.write(",".join([str(idx)] + fixed + ["", "", "", f"error:{clean}"]) + "\n")
        else:
            fq = result.fidelity_qec.get(point_spec.n_cycles[0])
            for i, t in enumerate(result.t_grid):
                row = [str(idx)] + fixed + [
                    _fmt(float(t)),
                    _fmt(float(result.fidelity_no_qec[i]))
                    if result.fidelity_no_qec is not None else "",
                    _fmt(float(fq[i])) if fq is not None else "",
                    "ok",
                ]
                fh.write(",".join(row) + "\n")
        fh.flush()

    sweep(spec, grid, workers=config.workers, on_result=flush_point, skip=done)
    fh.close()
    _write_metadata(config.output + ".meta.json", config,
                    {"grid": {k: list(v) for k, v in grid.items()},
                     "n_points": len(combos)})
    print(f"sweep: {len(combos)} points ({len(done)} resumed), wrote {csv_path}")
    if failures:
        for idx, err in failures:
            print(f"point {idx} failed: {err}", file=sys.stderr)
        return 1
    return 0


def cmd_critical_time(config):
    spec = config.to_protocol_spec()
    if spec.initial_state != "werner":
        spec = replace(spec, initial_state="werner")
    p_grid = config.p_values if config.p_values is not None else (config.werner_p,)
    csv_path = config.output + ".csv"
    rows = []
    for p in p_grid:
        for n in config.cycles:
            res = critical_time(replace(spec, werner_p=p), n_cycles=n,
                                window_kt=config.kt_window,
                                scan_points=config.scan_points)
            rows.append((p, n, res.kt_c, res.status))
            print(f"p={p:g} cycles={n}: kt_c={_fmt(res.kt_c)} ({res.status})")
    with open(csv_path, "w") as fh:
        fh.write(UNITS_COMMENT + "\n")
        fh.write("p,cycles,kt_c,status\n")
        for p, n, kt, status in rows:
            fh.write(f"{_fmt(p)},{n},{_fmt(kt)},{status}\n")
    _write_metadata(config.output + ".meta.json", config, {"n_rows": len(rows)})
    print(f"wrote {csv_path}")
    return 0


def cmd_validate_codes(config):
    reports = validate_all()
    all_ok = True
    for rep in reports:
        status = "ok" if rep["passed"] else "FAILED"
        print(f"{rep['name']}: {rep['n_verified']}/{rep['n_checks']} checks verified "
              f"[{status}]")
        for label, ok, info in rep["checks"]:
            if not ok:
                print(f"  FAIL {label}: {info}")
                all_ok = False
    total = sum(r["n_checks"] for r in reports)
    print(f"total: {sum(r['n_verified'] for r in reports)}/{total} verified")
    return 0 if all_ok else 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qecbath",
        description="Error-correction fidelity benchmarks for qubit registers "
                    "coupled to bosonic thermal baths.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("simulate", "run one fidelity-vs-time comparison"),
            ("sweep", "run a parameter grid with incremental CSV output"),
            ("critical-time", "locate crossover times over a Werner p grid"),
            ("validate-codes", "brute-force validation of all code tables")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field (repeatable)")
        p.add_argument("--output", default=None, help="output path prefix")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    overrides = list(args.set)
    if args.output is not None:
        overrides.append(f"output={args.output}")
    try:
        config = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    command = {
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "critical-time": cmd_critical_time,
        "validate-codes": cmd_validate_codes,
    }[args.command]
    try:
        return command(config)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
