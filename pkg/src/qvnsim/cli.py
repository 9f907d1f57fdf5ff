"""Command-line entry point: configuration ingestion, run orchestration, and
machine-readable result emission (CSV or JSON).

Commands: optimize-cz, simulate-cz, estimate, g-optimize, cz23, idle-error,
transmon, figure-data.  Exit codes: 0 success, 2 validation error, 3
non-converged optimization, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

import numpy as np

from .device import DeviceConfig, default_config, build_qubit_bus_hamiltonian
from .estimators import (QuadratureError, TwoChannelSpec, cz_switch_spec,
                         pulse_precision_bounds, switching_report)
from .optimizer import Stage1Error, optimize_cz, simulate_cz
from .propagator import PropagationError
from .pulses import CZPulseParams, sudden_limit_ton
from .sequence import run_cz23_ghz
from .system import compute_zz, g_optimize, idle_error, min_frequency
from . import __version__

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NON_CONVERGED = 3
EXIT_NUMERICAL = 4

#: CSV column order for optimize-cz / simulate-cz rows.
CZ_COLUMNS = ["eta_ghz", "gb_ghz", "gm_ghz", "ton_sudden_ns", "tramp_ns",
              "sigma_ns", "ton_ns", "tgate_ns", "f_ave", "f_11", "a_sq",
              "p_sw", "f11_est"]

_DEVICE_KEYS = {
    "n_qubits": ("n_qubits", int),
    "memory_freqs": ("memory_freqs", "floats"),
    "bus_freq": ("bus_freq", float),
    "g_m": ("g_memory", float),
    "g_b": ("g_bus", float),
    "eta": ("anharmonicity", float),
    "eta_prime": ("second_anharmonicity", float),
    "park_freq": ("park_freq", float),
    "off_freq": ("off_freq", float),
    "qubit_freqs": ("qubit_freqs", "floats"),
}

_RUN_KEYS = {"command", "tramp", "sigma", "ton", "won", "eta", "gb", "gm",
             "target_fidelity", "qubit", "park", "t_idle", "n_idle", "ratio",
             "figure", "dt", "memory_index"}


class ConfigError(ValueError):
    """Configuration file or argument rejected."""


def _parse_value(key, raw, kind, where):
    try:
        if kind == "floats":
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {key} = {raw!r}")


def _load_ini(text: str, path: str):
    device_kw, run_kw = {}, {}
    section = "device"
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip().lower()
            if section not in ("device", "run"):
                raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        where = f"{path}:{lineno}"
        if section == "device":
            if key not in _DEVICE_KEYS:
                raise ConfigError(f"{where}: unknown device key {key!r}")
            field, kind = _DEVICE_KEYS[key]
            device_kw[field] = _parse_value(key, raw, kind, where)
        else:
            if key not in _RUN_KEYS:
                raise ConfigError(f"{where}: unknown run key {key!r}")
            run_kw[key] = raw
    return device_kw, run_kw


def _load_json(text: str, path: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})")
    device_kw, run_kw = {}, {}
    for key, val in (doc.get("device") or {}).items():
        if key not in _DEVICE_KEYS:
            raise ConfigError(f"{path}: unknown device key {key!r}")
        field, kind = _DEVICE_KEYS[key]
        device_kw[field] = tuple(val) if kind == "floats" else kind(val)
    for key, val in (doc.get("run") or {}).items():
        if key not in _RUN_KEYS:
            raise ConfigError(f"{path}: unknown run key {key!r}")
        run_kw[key] = str(val)
    return device_kw, run_kw


def load_config(path: str | None):
    """Parse a config file into device keyword overrides and run defaults.

    Accepts flat key = value sections ([device]/[run]) or the JSON emitted
    by previous runs.  Unknown keys are hard errors.
    """
    if path is None:
        return {}, {}
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}")
    head = text.lstrip()
    if head.startswith("{"):
        return _load_json(text, path)
    return _load_ini(text, path)


def build_device(device_kw: dict, args) -> DeviceConfig:
    base = default_config()
    merged = dict(
        n_qubits=base.n_qubits, memory_freqs=base.memory_freqs,
        bus_freq=base.bus_freq, g_memory=base.g_memory, g_bus=base.g_bus,
        anharmonicity=base.anharmonicity, park_freq=base.park_freq,
        off_freq=base.off_freq)
    merged.update(device_kw)
    # command-line overrides win over the file
    if getattr(args, "eta", None) is not None:
        merged["anharmonicity"] = args.eta
        merged.pop("second_anharmonicity", None)
    if getattr(args, "gb", None) is not None:
        merged["g_bus"] = args.gb
    if getattr(args, "gm", None) is not None:
        merged["g_memory"] = args.gm
    if "g_bus" not in device_kw and getattr(args, "gb", None) is None:
        merged["g_bus"] = 0.15 * merged["anharmonicity"]
    try:
        return DeviceConfig(**merged)
    except ValueError as e:
        raise ConfigError(str(e))


def device_as_config_dict(device: DeviceConfig) -> dict:
    return {
        "n_qubits": device.n_qubits,
        "memory_freqs": list(device.memory_freqs),
        "bus_freq": device.bus_freq,
        "g_m": device.g_memory,
        "g_b": device.g_bus,
        "eta": device.anharmonicity,
        "eta_prime": device.second_anharmonicity,
        "park_freq": device.park_freq,
        "off_freq": device.off_freq,
    }


def emit_results(rows: list[dict], fmt: str, path: str | None,
                 device: DeviceConfig | None = None, columns=None) -> str:
    """Serialize result rows and write them to ``path`` (or stdout)."""
    if fmt == "csv":
        cols = columns or sorted({k for r in rows for k in r})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for r in rows:
            writer.writerow([_fmt(r.get(c)) for c in cols])
        text = buf.getvalue()
    elif fmt == "json":
        doc = {"results": rows}
        if device is not None:
            doc["device"] = device_as_config_dict(device)
        text = json.dumps(doc, indent=2, default=_fmt) + "\n"
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    if path:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as e:
            raise ConfigError(f"cannot write {path}: {e.strerror}")
    else:
        sys.stdout.write(text)
    return text


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _cz_row(device: DeviceConfig, gate) -> dict:
    report = switching_report(cz_switch_spec(device, t_ramp=gate.pulse.t_ramp))
    return {
        "eta_ghz": device.anharmonicity,
        "gb_ghz": device.g_bus,
        "gm_ghz": device.g_memory,
        "ton_sudden_ns": sudden_limit_ton(device.g_bus),
        "tramp_ns": gate.pulse.t_ramp,
        "sigma_ns": gate.pulse.sigma,
        "ton_ns": gate.pulse.t_on,
        "tgate_ns": gate.pulse.t_gate,
        "f_ave": gate.report.f_ave,
        "f_11": gate.report.f_min11,
        "a_sq": report.a_sq,
        "p_sw": report.p_sw,
        "f11_est": 1.0 - 2.0 * report.p_sw,
    }


def _run_float(run_kw, args, key, default=None):
    if getattr(args, key, None) is not None:
        return getattr(args, key)
    if key in run_kw:
        return float(run_kw[key])
    return default


def cmd_optimize_cz(args, device, run_kw):
    tramp = _run_float(run_kw, args, "tramp")
    sigma = _run_float(run_kw, args, "sigma")
    if tramp is None and sigma is None:
        raise ConfigError("optimize-cz needs --tramp or --sigma")
    gate = optimize_cz(device, t_ramp=tramp, sigma=sigma,
                       qubit=int(_run_float(run_kw, args, "qubit", 0)))
    emit_results([_cz_row(device, gate)], args.format, args.out,
                 device=device, columns=CZ_COLUMNS)
    return EXIT_OK if gate.converged else EXIT_NON_CONVERGED


def cmd_simulate_cz(args, device, run_kw):
    tramp = _run_float(run_kw, args, "tramp")
    sigma = _run_float(run_kw, args, "sigma")
    ton = _run_float(run_kw, args, "ton")
    won = _run_float(run_kw, args, "won")
    if ton is None or won is None or (tramp is None and sigma is None):
        raise ConfigError("simulate-cz needs --ton, --won and --tramp/--sigma")
    pulse = CZPulseParams(off_freq=device.off_freq, on_freq=won, t_on=ton,
                          sigma=sigma, t_ramp=tramp)
    gate = simulate_cz(device, pulse,
                       qubit=int(_run_float(run_kw, args, "qubit", 0)))
    emit_results([_cz_row(device, gate)], args.format, args.out,
                 device=device, columns=CZ_COLUMNS)
    return EXIT_OK


def cmd_estimate(args, device, run_kw):
    rows = []
    for loss in (1e-3, 1e-4):
        dt_on, domega = pulse_precision_bounds(loss, device.g_bus)
        rows.append({"loss": loss, "ton_precision_ns": dt_on,
                     "won_precision_ghz": domega})
    emit_results(rows, args.format, args.out, device=device,
                 columns=["loss", "ton_precision_ns", "won_precision_ghz"])
    return EXIT_OK


def cmd_g_optimize(args, device, run_kw):
    target = _run_float(run_kw, args, "target_fidelity", 0.999)
    curve = g_optimize(device, target=target)
    rows = [{"gb_ghz": s.g_bus, "tramp_ns": s.t_ramp, "tgate_ns": s.t_gate,
             "recommended": int(abs(s.g_bus - curve.recommended_g_bus) < 5e-4)}
            for s in curve.samples]
    emit_results(rows, args.format, args.out, device=device,
                 columns=["gb_ghz", "tramp_ns", "tgate_ns", "recommended"])
    return EXIT_OK


def cmd_cz23(args, device, run_kw):
    report = run_cz23_ghz(device)
    rows = [{"fidelity": report.fidelity, "total_time_ns": report.total_time,
             "cz_f_ave": report.cz_f_ave,
             "segments": len(report.spec.segments)}]
    emit_results(rows, args.format, args.out, device=device,
                 columns=["fidelity", "total_time_ns", "cz_f_ave", "segments"])
    return EXIT_OK


def cmd_idle_error(args, device, run_kw):
    park = _run_float(run_kw, args, "park", device.park_freq)
    t_idle = _run_float(run_kw, args, "t_idle", 1000.0)
    n = int(_run_float(run_kw, args, "n_idle", device.n_qubits))
    mi = int(_run_float(run_kw, args, "memory_index", 0))
    zz = compute_zz(device, park_freq=park, memory_index=mi)
    rows = [{"park_ghz": park, "omega_zz_khz": zz * 1e6,
             "t_ns": t_idle, "n": n, "idle_error": idle_error(zz, t_idle, n)}]
    emit_results(rows, args.format, args.out, device=device,
                 columns=["park_ghz", "omega_zz_khz", "t_ns", "n", "idle_error"])
    return EXIT_OK


def cmd_transmon(args, device, run_kw):
    ratio = _run_float(run_kw, args, "ratio", 50.0)
    rows = [{"eta_ghz": device.anharmonicity, "ratio": ratio,
             "min_freq_ghz": min_frequency(device.anharmonicity, ratio)}]
    emit_results(rows, args.format, args.out, device=device,
                 columns=["eta_ghz", "ratio", "min_freq_ghz"])
    return EXIT_OK


def _figure3_rows(device):
    rows = []
    for eps in np.arange(6.0, 7.6005, 0.01):
        h = build_qubit_bus_hamiltonian(float(eps), device.anharmonicity,
                                        device.bus_freq, device.g_bus)
        for k, e in enumerate(np.linalg.eigvalsh(h.entries)):
            rows.append({"series": f"level{k}", "x": float(eps),
                         "y": float(e / (2 * np.pi))})
    return rows


def _figure4_rows(device):
    pairs = []
    for eta, gb in ((0.2, 0.03), (0.3, 0.045), (0.4, 0.06)):
        pairs.append((eta - np.sqrt(2) * gb, 1.0))
    pairs += [(1.0, 1.8), (0.5, 1.5)]
    rows = []
    for don, doff in pairs:
        name = f"don{don*1000:.1f}MHz_doff{doff*1000:.0f}MHz"
        for sig in np.arange(0.5, 3.0001, 0.05):
            spec = TwoChannelSpec.from_ghz(min(0.2 * don, 0.05), don, doff,
                                           sigma=float(sig))
            rows.append({"series": name, "x": float(sig),
                         "y": switching_report(spec).a_sq})
    return rows


def _figure9_rows(device):
    rows = []
    for eta in (0.3, 0.4):
        for ratio in np.arange(20.0, 100.5, 1.0):
            rows.append({"series": f"eta{eta*1000:.0f}MHz", "x": float(ratio),
                         "y": min_frequency(eta, float(ratio))})
    return rows


def cmd_figure_data(args, device, run_kw):
    fig = (args.figure or run_kw.get("figure", "")).lower()
    makers = {"fig3": _figure3_rows, "fig4": _figure4_rows, "fig9": _figure9_rows}
    if fig not in makers:
        raise ConfigError(f"unknown figure {fig!r}; expected fig3, fig4 or fig9")
    emit_results(makers[fig](device), args.format, args.out, device=device,
                 columns=["series", "x", "y"])
    return EXIT_OK


COMMANDS = {
    "optimize-cz": cmd_optimize_cz,
    "simulate-cz": cmd_simulate_cz,
    "estimate": cmd_estimate,
    "g-optimize": cmd_g_optimize,
    "cz23": cmd_cz23,
    "idle-error": cmd_idle_error,
    "transmon": cmd_transmon,
    "figure-data": cmd_figure_data,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qvnsim",
                                description="CZ gate design toolkit for "
                                            "qubit-resonator processors")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="config file (key = value sections or JSON)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    for name, help_text in (
            ("eta", "qubit anharmonicity, GHz"),
            ("gb", "qubit-bus coupling, GHz"),
            ("gm", "qubit-memory coupling, GHz"),
            ("tramp", "ramp truncation time, ns"),
            ("sigma", "ramp standard deviation, ns"),
            ("ton", "pulse plateau time, ns"),
            ("won", "pulse on-frequency, GHz"),
            ("target-fidelity", "fidelity target for g-optimize"),
            ("park", "parking frequency, GHz"),
            ("t-idle", "idle duration, ns"),
            ("ratio", "transmon E_J/E_C ratio")):
        p.add_argument(f"--{name}", type=float, help=help_text)
    p.add_argument("--qubit", type=int, help="driven qubit index (0-based)")
    p.add_argument("--n-idle", type=int, help="qubit count for the idle error")
    p.add_argument("--figure", help="figure-data selector: fig3, fig4, fig9")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        device_kw, run_kw = load_config(args.config)
        device = build_device(device_kw, args)
        return COMMANDS[args.command](args, device, run_kw)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Stage1Error as e:
        print(f"error: optimization failed: {e}", file=sys.stderr)
        return EXIT_NON_CONVERGED
    except (PropagationError, QuadratureError, np.linalg.LinAlgError) as e:
        print(f"error: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
