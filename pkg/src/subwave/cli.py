"""Command-line entry point: run a configuration, emit records and a report.

Result files are deterministic (17-significant-digit numbers, LF endings,
fixed iteration order); wall time lives only in the sidecar report.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bands as band_engine
from .config import RunConfig, emit_config, parse_config
from .errors import RangeError, SchemaError, SubwaveError
from .hill import EP_SENTINEL, MathieuParams, mathieu_char_exponent
from .capacitance import capacitance_matrix

COMMANDS = (
    "capacitance",
    "static-bands",
    "uniform-bands",
    "modulated-bands",
    "finite",
    "mathieu-chart",
)

_BAND_COLUMNS = (
    "path_parameter", "alpha_x", "alpha_y", "band_index",
    "re_omega", "im_omega", "ep_condition", "regime",
)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _band_records(result: band_engine.BandStructure) -> list:
    records = []
    for k in range(len(result.path)):
        for b in range(result.n_bands):
            w = result.bands[k, b]
            records.append(
                {
                    "path_parameter": float(result.path.params[k]),
                    "alpha_x": float(result.path.alphas[k][0]),
                    "alpha_y": float(result.path.alphas[k][1]),
                    "band_index": b,
                    "re_omega": float(w.real),
                    "im_omega": float(w.imag),
                    "ep_condition": float(result.ep_condition[k]),
                    "regime": result.regime,
                }
            )
    return records


def _json_safe(record: dict) -> dict:
    return {
        key: ("inf" if isinstance(value, float) and np.isinf(value) else value)
        for key, value in record.items()
    }


def _write_records(records: list, columns, destination: Path, fmt: str, extra: dict | None = None):
    if fmt == "csv":
        lines = [",".join(columns)]
        for rec in records:
            lines.append(",".join(_fmt(rec[c]) for c in columns))
        destination.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    else:
        payload = {"records": [_json_safe(rec) for rec in records]}
        if extra:
            payload.update(extra)
        destination.write_text(
            json.dumps(payload, indent=1, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
        )


def _config_digest(config: RunConfig) -> str:
    return hashlib.sha256(emit_config(config).encode()).hexdigest()[:16]


def _run_band_command(command: str, config: RunConfig):
    spec = config.lattice()
    array = config.resonators()
    settings = config.sweep_settings()
    path = config.path(spec)
    mod = config.data.get("modulation", {})
    if command == "static-bands":
        fold_with = mod.get("omega") if mod.get("fold_static") else None
        result = band_engine.sweep_static(array, spec, path, settings, fold_with=fold_with)
    elif command == "uniform-bands":
        if mod.get("regime") != "uniform":
            raise SchemaError("modulation.regime", "uniform-bands requires regime 'uniform'")
        params = {k: mod[k] for k in ("rho1", "rho2", "t0") if k in mod}
        result = band_engine.sweep_uniform(
            array, spec, path, mod["law"], mod["omega"], mod["eps"], settings, params
        )
    else:
        if mod.get("regime") != "resonator":
            raise SchemaError("modulation.regime", "modulated-bands requires regime 'resonator'")
        result = band_engine.sweep_resonator_modulated(
            array, spec, path, config.profile(), settings
        )
    return result


def _detector_summary(result: band_engine.BandStructure, numerics: dict) -> dict:
    if result.regime == "static" or result.modulation_frequency is None:
        return {}
    kgaps = band_engine.detect_kgap(result, numerics["im_tol"])
    eps_reports = band_engine.detect_exceptional_points(result, numerics["cond_threshold"])
    return {
        "k_gaps": [
            {"kind": r.kind, **r.location, **r.metrics} for r in kgaps
        ],
        "exceptional_points": [
            {"kind": r.kind, **r.location, **r.metrics} for r in eps_reports
        ],
    }


_REQUIRED_BLOCKS = {
    "capacitance": ("lattice", "resonators", "sweep"),
    "static-bands": ("lattice", "resonators", "sweep"),
    "uniform-bands": ("lattice", "resonators", "sweep", "modulation"),
    "modulated-bands": ("lattice", "resonators", "sweep", "modulation"),
    "finite": ("modulation", "finite"),
    "mathieu-chart": ("mathieu",),
}


def run_command(command: str, config: RunConfig, output: Path, fmt: str | None = None,
                threads: int | None = None) -> dict:
    """Execute one pipeline command; returns the report dictionary."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    for block in _REQUIRED_BLOCKS[command]:
        if block not in config.data:
            raise SchemaError(block, f"required by the {command} command")
    if threads is not None:
        config.data["numerics"]["threads"] = int(threads)
    fmt = fmt or config.data["output"]["format"]
    started = time.perf_counter()
    report = {
        "command": command,
        "config_digest": _config_digest(config),
        "numerics": config.data["numerics"],
    }

    if command == "mathieu-chart":
        grid = config.data.get("mathieu")
        if grid is None:
            raise SchemaError("mathieu", "mathieu-chart requires a mathieu block")
        a_values = np.linspace(grid["a_min"], grid["a_max"], grid["a_count"])
        q_values = np.linspace(grid["q_min"], grid["q_max"], grid["q_count"])
        records = []
        for a in a_values:
            for q in q_values:
                nu = mathieu_char_exponent(MathieuParams(float(a), float(q)), grid["method"])
                records.append(
                    {"a": float(a), "q": float(q), "re_nu": nu.real, "im_nu": nu.imag}
                )
        _write_records(records, ("a", "q", "re_nu", "im_nu"), output, fmt)
        report["n_records"] = len(records)
    elif command == "finite":
        finite = config.data.get("finite")
        if finite is None:
            raise SchemaError("finite", "finite command requires a finite block")
        spectrum = band_engine.sweep_finite(
            np.array(finite["capacitance"]),
            config.profile(),
            np.array(finite["volumes"]),
            config.material(),
            ode_tolerance=config.data["numerics"]["ode_tolerance"],
        )
        records = [
            {
                "path_parameter": 0.0,
                "alpha_x": 0.0,
                "alpha_y": 0.0,
                "band_index": b,
                "re_omega": float(w.real),
                "im_omega": float(w.imag),
                "ep_condition": float(spectrum.ep_condition),
                "regime": "finite",
            }
            for b, w in enumerate(spectrum.exponents)
        ]
        _write_records(records, _BAND_COLUMNS, output, fmt)
        report["n_records"] = len(records)
    elif command == "capacitance":
        spec = config.lattice()
        array = config.resonators()
        settings = config.sweep_settings()
        path = config.path(spec)
        records, max_err = [], 0.0
        for k, alpha in enumerate(path.alphas):
            C = capacitance_matrix(array, spec, alpha, settings.multipole)
            max_err = max(max_err, C.diagnostics["rel_error"])
            for i in range(array.n_resonators):
                for j in range(array.n_resonators):
                    records.append(
                        {
                            "path_parameter": float(path.params[k]),
                            "alpha_x": float(alpha[0]),
                            "alpha_y": float(alpha[1]),
                            "row_index": i,
                            "col_index": j,
                            "re_c": float(C.entries[i, j].real),
                            "im_c": float(C.entries[i, j].imag),
                        }
                    )
        _write_records(
            records,
            ("path_parameter", "alpha_x", "alpha_y", "row_index", "col_index", "re_c", "im_c"),
            output, fmt,
        )
        report["truncation"] = {"max_rel_error": max_err}
        report["n_records"] = len(records)
    else:
        result = _run_band_command(command, config)
        records = _band_records(result)
        _write_records(records, _BAND_COLUMNS, output, fmt)
        rel_errors = [d["rel_error"] for d in result.diagnostics]
        report["truncation"] = {
            "max_rel_error": max(rel_errors) if rel_errors else 0.0,
            "mean_rel_error": float(np.mean(rel_errors)) if rel_errors else 0.0,
        }
        report["ode_tolerance"] = config.data["numerics"]["ode_tolerance"]
        report["warnings"] = result.warnings
        report["detectors"] = _detector_summary(result, config.data["numerics"])
        report["n_records"] = len(records)

    report["wall_time_s"] = time.perf_counter() - started
    report_path = output.with_suffix(output.suffix + ".report.json")
    report_path.write_text(
        json.dumps(report, indent=1, sort_keys=True, default=str) + "\n", encoding="utf-8"
    )
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="subwave",
        description="Band structures of time-modulated high-contrast resonator lattices",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="YAML configuration file")
    parser.add_argument("--output", type=Path, default=None, help="result file (CSV or JSON)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config.read_text(encoding="utf-8"))
        fmt = args.format or config.data["output"]["format"]
        output = args.output
        if output is None:
            dest = config.data["output"].get("destination")
            output = Path(dest) if dest else Path(f"{args.command}.{fmt}")
        report = run_command(args.command, config, output, fmt, args.threads)
    except (SchemaError, RangeError) as exc:
        json.dump(
            {"error": {"type": type(exc).__name__, "field": exc.field, "message": str(exc)}},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return 2
    except (SubwaveError, ValueError, OSError) as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    summary = {
        "command": args.command,
        "output": str(output),
        "records": report.get("n_records"),
        "wall_time_s": round(report["wall_time_s"], 3),
    }
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
