"""Command-line front end.

    geophase run <config.yaml> <experiment>
    geophase validate <config.yaml> [experiment]
    geophase list-experiments

Exit codes: 0 success, 2 configuration error, 3 numerical or backend error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .algos import run_dj, run_grover
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config, validate_config
from .experiments import circuit_trajectory, phase_experiment, sweep_csv
from .geomphase import GeometryError, enclosed_solid_angle
from .prep import PrepError, pseudopure_sequence, prepare_pseudopure_00
from .pulse import X, PulseError, QuantumState, StateError, apply, gradient_crush, hard
from .readout import ReadoutError, density_matrix_json, effective_pure_state, simulate_fid, spectrum, tomograph
from .spinsys import SpinSystemError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

NUMERIC_ERRORS = (PulseError, StateError, ReadoutError, GeometryError, PrepError, SpinSystemError,
                  np.linalg.LinAlgError, FloatingPointError)


class _Writer:
    """Collects emitted files so the run summary can list them with hashes."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[dict] = []
        root.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        (self.root / name).write_text(text)
        self.files.append({"path": name, "sha256": hashlib.sha256(text.encode()).hexdigest()})


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _readout_kwargs(cfg: ExperimentConfig) -> dict:
    r = cfg.data["readout"]
    return {
        "n_points": int(r["n_points"]),
        "dwell": float(r["dwell_s"]),
        "t2": None if r["t2_s"] is None else float(r["t2_s"]),
    }


def _run_sweep(cfg, kind, out: _Writer) -> dict:
    system = cfg.system(f"sweep-{kind}")
    e = cfg.data["experiment"]
    results = [
        phase_experiment(
            system, kind, float(phi), float(e["theta"]), cfg.backend(),
            tau=None if e["tau_s"] is None else float(e["tau_s"]),
            n_samples=int(e["n_samples"]), gamma_weights=cfg.gamma_weights(),
            **_readout_kwargs(cfg),
        )
        for phi in cfg.phis()
    ]
    out.write(f"sweep_{kind}.csv", sweep_csv(results))
    for i, r in enumerate(results):
        out.write(f"spectrum_{kind}_{i:02d}.csv", r.spectrum.to_csv())
    return {"points": len(results)}


def _read_spectra(system, state, cfg, out: _Writer) -> None:
    """Populations are read as in the experiment: crush, then a (pi/2) read on one spin."""
    crushed = gradient_crush(state)
    for spin in range(system.n_spins):
        read = apply(crushed, hard(spin, np.pi / 2, X), system)
        spec = spectrum(simulate_fid(system, read, spin, **_readout_kwargs(cfg)))
        out.write(f"spectrum_spin{spin}.csv", spec.to_csv())


def _write_tomography(system, state, out: _Writer) -> None:
    """Raw reconstruction and its deviation rescaled to an effective pure state."""
    rho = tomograph(system, state)
    out.write("tomography_raw.json", density_matrix_json(rho))
    eff = effective_pure_state(QuantumState(rho, check=False))
    out.write("tomography.json", density_matrix_json(eff.rho))


def _algo_common(cfg, experiment):
    system = cfg.system(experiment)
    b = cfg.data["backend"]
    initial = prepare_pseudopure_00(system, cfg.gamma_weights())
    kwargs = dict(backend=cfg.backend(), initial=initial)
    if cfg.backend().is_shaped:
        kwargs.update(refocus=bool(b["refocus"]), calibrate=bool(b["calibrate"]))
    return system, kwargs


def _result_fields(res) -> dict:
    return {
        "dominant": res.dominant,
        "fidelity": round(res.fidelity, 12),
        "uhlmann_fidelity": round(res.uhlmann, 12),
        "probability": round(res.probability, 12),
        "oracle_calls": res.oracle_calls,
    }


def _run_dj(cfg, f, out: _Writer) -> dict:
    system, kwargs = _algo_common(cfg, f"dj:{f}")
    res = run_dj(system, f, **kwargs)
    _read_spectra(system, res.state, cfg, out)
    _write_tomography(system, res.state, out)
    summary = {"function": f, "classification": res.answer, **_result_fields(res)}
    out.write("result.json", _dumps(summary))
    return summary


def _run_grover(cfg, x, out: _Writer) -> dict:
    system, kwargs = _algo_common(cfg, f"grover:{x}")
    res = run_grover(system, x, **kwargs)
    _read_spectra(system, res.state, cfg, out)
    _write_tomography(system, res.state, out)
    summary = {"target": x, "found": res.dominant, "iterations": res.iterations, **_result_fields(res)}
    out.write("result.json", _dumps(summary))
    return summary


def _run_bloch(cfg, kind, out: _Writer) -> dict:
    e = cfg.data["experiment"]
    system = cfg.system(f"bloch:{kind}")
    angles = []
    for i, phi in enumerate(cfg.phis()):
        path = circuit_trajectory(kind, float(phi), float(e["theta"]), int(e["n_samples"]), system, cfg.backend())
        out.write(f"bloch_{kind}_{i:02d}.csv", path.to_csv())
        angles.append({"phi": float(phi), "solid_angle": enclosed_solid_angle(path) if path.is_closed else None})
    return {"trajectories": angles}


def run_experiment(cfg: ExperimentConfig, experiment: str) -> tuple[Path, dict]:
    """Run one named experiment and write its data files plus ``run_summary.json``."""
    problems = validate_config(cfg, experiment)
    if problems:
        raise ConfigError("; ".join(problems))
    root = cfg.output_dir / experiment.replace(":", "_")
    out = _Writer(root)
    family, _, arg = experiment.partition(":")
    if family.startswith("sweep-"):
        summary = _run_sweep(cfg, family[len("sweep-"):], out)
    elif family == "dj":
        summary = _run_dj(cfg, arg, out)
    elif family == "grover":
        summary = _run_grover(cfg, arg, out)
    else:
        summary = _run_bloch(cfg, arg, out)
    run = {
        "experiment": experiment,
        "seed": cfg.data["seed"],
        "config": cfg.data,
        "result": summary,
        "files": out.files,
    }
    (root / "run_summary.json").write_text(_dumps(run))
    return root, run


def _validate_with_prep(cfg: ExperimentConfig, experiment: str | None) -> list[str]:
    problems = validate_config(cfg, experiment)
    if not problems:
        try:
            pseudopure_sequence(cfg.system(experiment), cfg.gamma_weights())
        except PrepError as exc:
            problems.append(f"preparation: {exc}")
    return problems


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geophase", description="Geometric-phase NMR gate simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment")
    run.add_argument("config", help="YAML config file")
    run.add_argument("experiment", choices=EXPERIMENTS, metavar="experiment",
                     help="one of: " + ", ".join(EXPERIMENTS))
    val = sub.add_parser("validate", help="check a config and list every problem")
    val.add_argument("config")
    val.add_argument("experiment", nargs="?", default=None)
    sub.add_parser("list-experiments", help="print the available experiment names")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.command == "list-experiments":
        print("\n".join(EXPERIMENTS))
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        problems = _validate_with_prep(cfg, args.experiment)
        for p in problems:
            print(p)
        if not problems:
            print("ok")
        return EXIT_CONFIG if problems else EXIT_OK

    problems = _validate_with_prep(cfg, args.experiment)
    if problems:
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        root, run = run_experiment(cfg, args.experiment)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {len(run['files']) + 1} files to {root}")
    print(json.dumps(run["result"], sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
