"""Batch command line front end.

Subcommands:

* ``scan``       robustness scan of one lattice gate versus a control knob,
                 written as a CSV table plus a run manifest
* ``gate-times`` primitive gate durations and module time budgets in
                 physical units, as a JSON table
* ``repeater``   nested purification / swapping protocol run, as a JSON
                 per-level trace with a summary
* ``verify``     self-verification suites, as a pass/fail report

Configuration may come from a flat ``key = value`` file with one section
per subcommand (see the README for the grammar); command line flags
override file values.  Every output file is accompanied by a manifest
JSON naming it, its digest, the fully resolved configuration and the
seed, so a run can be reproduced bit for bit.  The manifest carries the
only timestamp; the data files themselves are byte-stable.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 partial numerical failure (flagged rows in a scan).
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .core import ValidationError
from .lattice import detuning_scan, gate_time, na_514, LatticeUnits
from .lattice.gates import GATE_KINDS
from .lattice.scans import SCAN_KNOBS
from .noise import analytic_module_fidelity
from .protocol import ProtocolConfig, gate_time_budget, nested_repeater_run
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3

#: environment variable naming the default output directory
OUTPUT_DIR_ENV = "DFSREPEATER_OUTDIR"

SCHEMA_VERSION = "1"

_KNOB_ALIASES = {
    "uoverj": "u_over_j",
    "j2overj1": "j2_over_j1",
    "uaboveru": "uab_over_u",
    "uq1overj": "uq1_over_j",
    "residualuoverj": "residual_u_over_j",
}


class UsageError(Exception):
    """Bad flags, config values or grids; maps to exit code 2."""


def _normalize_knob(knob: str) -> str:
    key = knob.lower().replace("_", "").replace("-", "")
    if key not in _KNOB_ALIASES:
        raise UsageError(f"unknown knob {knob!r}; choose from "
                         f"{sorted(set(_KNOB_ALIASES.values()))}")
    return _KNOB_ALIASES[key]


def _parse_grid(spec: str) -> np.ndarray:
    """Grid syntax ``start:stop:count`` (inclusive linspace)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:count, got {spec!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise UsageError(f"malformed grid {spec!r}: {exc}") from None
    if count < 1:
        raise UsageError(f"grid {spec!r} is empty")
    return np.linspace(start, stop, count)


def _fmt(x: float) -> str:
    """Scientific notation with 17 significant digits (round-trip stable)."""
    if not np.isfinite(x):
        return "nan"
    return f"{x:.16e}"


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _resolve_out(out: str | None, default_name: str, out_dir: str | None) -> str:
    base = out_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    if out is None:
        return os.path.join(base, default_name)
    if os.path.isabs(out):
        return out
    return os.path.join(base, out)


def _write_manifest(subcommand: str, config: dict, seed: int, outputs) -> str:
    """Write ``<first output>.manifest.json`` naming every produced file."""
    manifest = {
        "artifact_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": {os.path.basename(p): _sha256(p) for p in outputs},
    }
    path = outputs[0] + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# configuration file

def _load_config(path: str | None, section: str) -> dict:
    """Flat key = value config; the section named after the subcommand."""
    if path is None:
        return {}
    if not os.path.exists(path):
        raise UsageError(f"config file {path!r} not found")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise UsageError(f"malformed config file: {exc}") from None
    if not parser.has_section(section):
        return {}
    return dict(parser.items(section))


def _pick(args_value, config: dict, key: str, cast, default):
    """Flag value if given, else config file value, else default."""
    if args_value is not None:
        return args_value
    if key in config:
        raw = config[key]
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError as exc:
            raise UsageError(f"bad config value {key} = {raw!r}: {exc}") from None
    return default


# ---------------------------------------------------------------------------
# scan

def _scan_point(gate: str, knob: str, x: float, u_over_j: float):
    try:
        r = detuning_scan(gate, knob, np.array([x]), u_over_j=u_over_j)
        return (float(r.infidelity[0]), float(r.phase_error[0]),
                float(r.leakage[0]), "ok")
    except Exception:
        return (float("nan"), float("nan"), float("nan"), "failed")


def cmd_scan(args, file_cfg: dict) -> int:
    gate = _pick(args.gate, file_cfg, "gate", str, None)
    knob = _pick(args.knob, file_cfg, "knob", str, None)
    grid_spec = _pick(args.grid, file_cfg, "grid", str, None)
    u_over_j = _pick(args.u_over_j, file_cfg, "u_over_j", float, 100.0)
    threads = _pick(args.threads, file_cfg, "threads", int,
                    os.cpu_count() or 1)
    seed = _pick(args.seed, file_cfg, "seed", int, 0)
    plot = args.plot or _pick(None, file_cfg, "plot", bool, False)
    if gate is None or knob is None or grid_spec is None:
        raise UsageError("scan requires --gate, --knob and --grid")
    if gate not in SCAN_KNOBS:
        raise UsageError(f"unknown gate {gate!r}; choose from {sorted(SCAN_KNOBS)}")
    knob = _normalize_knob(knob)
    if knob not in SCAN_KNOBS[gate]:
        raise UsageError(f"gate {gate!r} has no knob {knob!r}; "
                         f"choose from {SCAN_KNOBS[gate]}")
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    grid = _parse_grid(grid_spec)

    # parallel over grid points; assembly stays in grid order
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(
            lambda x: _scan_point(gate, knob, float(x), u_over_j), grid))

    out = _resolve_out(args.out, f"scan_{gate}_{knob}.csv", args.out_dir)
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w") as fh:
        fh.write(f"{knob},infidelity,phase_error,leakage,status\n")
        for x, (infid, phase, leak, status) in zip(grid, rows):
            fh.write(f"{_fmt(x)},{_fmt(infid)},{_fmt(phase)},"
                     f"{_fmt(leak)},{status}\n")
    outputs = [out]
    if plot:
        outputs.append(_render_scan_plot(out, gate, knob, grid, rows))

    config = {"gate": gate, "knob": knob, "grid": grid_spec,
              "u_over_j": u_over_j, "threads": threads, "plot": bool(plot)}
    manifest = _write_manifest("scan", config, seed, outputs)
    print(f"wrote {out} ({grid.size} rows) and {manifest}")
    failed = sum(1 for r in rows if r[3] != "ok")
    if failed:
        print(f"warning: {failed} grid point(s) failed numerically",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _render_scan_plot(csv_path: str, gate: str, knob: str, grid, rows) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    infid = np.array([r[0] for r in rows])
    phase = np.array([r[1] for r in rows])
    leak = np.array([r[2] for r in rows])
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    for ax, y, label in zip(axes, (infid, phase, leak),
                            ("infidelity", "phase error", "leakage")):
        if np.all(np.isnan(y)):
            ax.set_visible(False)
            continue
        positive = np.nanmin(y[y > 0]) if np.any(y > 0) else None
        if positive is not None and np.nanmax(y) / positive > 50:
            ax.semilogy(grid, np.clip(y, positive * 1e-3, None), "o-")
        else:
            ax.plot(grid, y, "o-")
        ax.set_xlabel(knob)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    fig.suptitle(f"{gate} gate vs {knob}")
    fig.tight_layout()
    path = os.path.splitext(csv_path)[0] + ".png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# gate-times

def _resolve_units(args, file_cfg: dict) -> LatticeUnits:
    units = _pick(args.units, file_cfg, "units", str, None)
    wavelength = _pick(args.wavelength, file_cfg, "wavelength", float, None)
    mass = _pick(args.mass, file_cfg, "mass", float, None)
    if wavelength is not None or mass is not None:
        if wavelength is None or mass is None:
            raise UsageError("custom units need both --wavelength (m) and "
                             "--mass (kg)")
        return LatticeUnits(wavelength=wavelength, mass=mass)
    if units in (None, "na514"):
        return na_514()
    raise UsageError(f"unknown units {units!r}; use na514 or "
                     "--wavelength/--mass")


def cmd_gate_times(args, file_cfg: dict) -> int:
    units = _resolve_units(args, file_cfg)
    j_in_recoil = _pick(args.J, file_cfg, "j", float, None)
    u_over_j = _pick(args.u_over_j, file_cfg, "u_over_j", float, 75.0)
    gamma = _pick(args.gamma, file_cfg, "gamma", float, None)
    seed = _pick(args.seed, file_cfg, "seed", int, 0)
    if j_in_recoil is None:
        raise UsageError("gate-times requires --J (hopping in recoil units)")

    gate_ms = {kind: 1e3 * gate_time(kind, j_in_recoil, u_over_j, units)
               for kind in GATE_KINDS}
    budget = gate_time_budget(units, j_in_recoil=j_in_recoil,
                              u_over_j=u_over_j)
    table = {
        "schema_version": SCHEMA_VERSION,
        "wavelength_m": units.wavelength,
        "mass_kg": units.mass,
        "j_in_recoil": j_in_recoil,
        "u_over_j": u_over_j,
        "gate_times_ms": gate_ms,
        "module_budget_ms": {m: 1e3 * t for m, t in budget.items()},
    }
    if gamma is not None:
        # gamma is the ancilla dephasing rate in 1/ms; one register contact
        # lasts one free-mode traversal
        gt = gamma * gate_ms["cphase_free"]
        table["gamma_per_ms"] = gamma
        table["contact_gamma_t"] = gt
        table["module_fidelities"] = {
            "cphase": float(analytic_module_fidelity("cphase", gt)),
            "cnot": float(analytic_module_fidelity("cnot", gt)),
            "state_transfer":
                float(analytic_module_fidelity("state_transfer", gt)),
            "ent_purification_bound":
                float(analytic_module_fidelity("ent_purification", gt)),
        }
    text = json.dumps(table, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        out = _resolve_out(args.out, "gate_times.json", args.out_dir)
        _write_json(out, table)
        _write_manifest("gate-times", {k: v for k, v in table.items()
                                       if not isinstance(v, dict)},
                        seed, [out])
    return EXIT_OK


# ---------------------------------------------------------------------------
# repeater

def cmd_repeater(args, file_cfg: dict) -> int:
    source_fidelity = _pick(args.F0, file_cfg, "source_fidelity", float, None)
    if source_fidelity is None:
        raise UsageError("repeater requires --F0 (source pair fidelity)")
    f_min = _pick(args.f_min, file_cfg, "f_min", float, 0.95)
    levels = _pick(args.levels, file_cfg, "levels", int, 1)
    max_rounds = _pick(args.max_rounds, file_cfg, "max_rounds", int, 20)
    gamma = _pick(args.gamma, file_cfg, "gamma", float, 0.0)
    aux = _pick(args.aux_strategy, file_cfg, "aux_strategy", str, "symmetric")
    seed = _pick(args.seed, file_cfg, "seed", int, 0)
    plot = args.plot or _pick(None, file_cfg, "plot", bool, False)

    budget = gate_time_budget(na_514())
    gate_times = {m: 1e3 * t for m, t in budget.items()}   # ms
    gate_times["cphase"] = 1e3 * gate_time("cphase_free", 0.033, 75.0, na_514())
    try:
        config = ProtocolConfig(source_fidelity=source_fidelity, f_min=f_min,
                                max_rounds=max_rounds, levels=levels,
                                gamma=gamma, gate_times=gate_times,
                                aux_strategy=aux, seed=seed)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    result = nested_repeater_run(config)

    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": {"source_fidelity": source_fidelity, "f_min": f_min,
                   "levels": levels, "max_rounds": max_rounds,
                   "gamma_per_ms": gamma, "aux_strategy": aux, "seed": seed,
                   "gate_times_ms": gate_times},
        "trace": [
            {"level": lv.level, "fidelity_in": lv.fidelity_in,
             "rounds": lv.rounds, "fidelity_purified": lv.fidelity_purified,
             "p_success": lv.p_success,
             "fidelity_swapped": lv.fidelity_swapped,
             "cumulative_time_ms": lv.time}
            for lv in result.trace
        ],
        "summary": {
            "final_fidelity": result.final_fidelity,
            "converged": result.converged,
            "rounds_total": result.rounds_total,
            "total_time_ms": result.total_time,
            "success_probability": result.success_probability,
        },
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        out = _resolve_out(args.out, "repeater.json", args.out_dir)
        _write_json(out, payload)
        outputs = [out]
        if plot:
            outputs.append(_render_repeater_plot(out, result))
        _write_manifest("repeater", payload["config"], seed, outputs)
    # non-convergence is a result, not a failure
    return EXIT_OK


def _render_repeater_plot(json_path: str, result) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    levels = [lv.level for lv in result.trace]
    fin = [lv.fidelity_in for lv in result.trace]
    fpur = [lv.fidelity_purified for lv in result.trace]
    fswap = [lv.fidelity_swapped for lv in result.trace]
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(levels, fin, "o--", label="input")
    ax.plot(levels, fpur, "s-", label="purified")
    if any(f is not None for f in fswap):
        ks = [k for k, f in zip(levels, fswap) if f is not None]
        ax.plot(ks, [f for f in fswap if f is not None], "^-", label="swapped")
    ax.set_xlabel("nesting level")
    ax.set_ylabel("fidelity")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = os.path.splitext(json_path)[0] + ".png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args, file_cfg: dict) -> int:
    suite = _pick(args.suite, file_cfg, "suite", str, "all")
    seed = _pick(args.seed, file_cfg, "seed", int, 0)
    if suite == "all":
        suites = SUITES
    elif suite in SUITES:
        suites = (suite,)
    else:
        raise UsageError(f"unknown suite {suite!r}; choose from "
                         f"{('all',) + SUITES}")
    reports = run_suites(suites, seed=seed)
    for rep in reports:
        print(f"suite {rep.suite}: {'PASS' if rep.passed else 'FAIL'}")
        for check in rep.checks:
            print("  " + check.line())
    all_passed = all(r.passed for r in reports)
    if args.out is not None:
        out = _resolve_out(args.out, "verify.json", args.out_dir)
        _write_json(out, {"schema_version": SCHEMA_VERSION,
                          "passed": all_passed,
                          "suites": [r.as_dict() for r in reports]})
        _write_manifest("verify", {"suite": suite}, seed, [out])
    if not all_passed:
        failed = [c.name for r in reports for c in r.checks if not c.passed]
        print("failed assertions: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dfsrepeater",
        description="Simulator for a DFS-encoded quantum repeater on a "
                    "two-species optical lattice.")
    p.add_argument("--config", help="key = value configuration file; "
                                    "flags override file values")
    p.add_argument("--out-dir",
                   help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
    sub = p.add_subparsers(dest="command")

    ps = sub.add_parser("scan", help="gate error figures versus one knob")
    ps.add_argument("--gate", choices=sorted(SCAN_KNOBS))
    ps.add_argument("--knob", help="e.g. UoverJ, J2_over_J1, Uab_over_U, "
                                   "Uq1_over_J, residual_U_over_J")
    ps.add_argument("--grid", help="start:stop:count (inclusive)")
    ps.add_argument("--UoverJ", dest="u_over_j", type=float,
                    help="register interaction for detuning knobs "
                         "(default 100)")
    ps.add_argument("--out", help="CSV output path")
    ps.add_argument("--threads", type=int,
                    help="scan-point workers (default: hardware count); "
                         "never affects results")
    ps.add_argument("--seed", type=int)
    ps.add_argument("--plot", action="store_true",
                    help="render a PNG next to the CSV")

    pg = sub.add_parser("gate-times", help="physical gate durations")
    pg.add_argument("--units", help="na514 (sodium, 514 nm lattice)")
    pg.add_argument("--wavelength", type=float, help="lattice wavelength in m")
    pg.add_argument("--mass", type=float, help="atomic mass in kg")
    pg.add_argument("--J", type=float, help="hopping in recoil units")
    pg.add_argument("--UoverJ", dest="u_over_j", type=float,
                    help="interaction over hopping (default 75)")
    pg.add_argument("--gamma", type=float,
                    help="ancilla dephasing rate in 1/ms; adds module "
                         "fidelities to the table")
    pg.add_argument("--out", help="JSON output path")
    pg.add_argument("--seed", type=int)

    pr = sub.add_parser("repeater", help="nested repeater protocol run")
    pr.add_argument("--F0", type=float, help="source pair fidelity")
    pr.add_argument("--f-min", dest="f_min", type=float,
                    help="working-fidelity threshold (default 0.95)")
    pr.add_argument("--levels", type=int, help="nesting levels (default 1)")
    pr.add_argument("--max-rounds", dest="max_rounds", type=int,
                    help="purification round cap per level (default 20)")
    pr.add_argument("--gamma", type=float,
                    help="ancilla dephasing rate in 1/ms (default 0)")
    pr.add_argument("--aux-strategy", dest="aux_strategy",
                    choices=("symmetric", "constant"))
    pr.add_argument("--out", help="JSON output path")
    pr.add_argument("--seed", type=int)
    pr.add_argument("--plot", action="store_true",
                    help="render a per-level fidelity PNG next to the JSON")

    pv = sub.add_parser("verify", help="run the self-verification suites")
    pv.add_argument("--suite", help="all|dfs|lattice|noise|protocol")
    pv.add_argument("--out", help="JSON report path")
    pv.add_argument("--seed", type=int)

    return p


_COMMANDS = {
    "scan": cmd_scan,
    "gate-times": cmd_gate_times,
    "repeater": cmd_repeater,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        file_cfg = _load_config(args.config, args.command)
        return _COMMANDS[args.command](args, file_cfg)
    except (UsageError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
