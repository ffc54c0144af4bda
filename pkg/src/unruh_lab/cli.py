"""Command-line front end: ``unruh-lab <command> [--config FILE] [--out DIR] ...``.

Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 no result.
Every JSON artifact carries the fully resolved configuration under
``"config"``; CSV artifacts get a JSON sidecar with the same content.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import THREADS_ENV, set_threads
from .errors import UnruhLabError, ValidationError
from .oscillatory import AmplitudePair, Regularization, eval_pair, spectrum_scan
from .states import ProbabilityContext, field_state_from_dict, state_probabilities
from .trajectory import PhaseFunction, reconstruct_trajectory
from .transparency import SearchSpec, demo_spec, transparency_report
from .unruh import UnruhSpec, thermal_spectrum_check

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NO_RESULT = 4

DEFAULT_FAMILY = {"k0": 1.0, "s0": 1.0, "s1": 0.5, "s2": 2.0, "T1": 5.0, "T2": 10.0}


class ConfigError(ValidationError):
    pass


def _clean(obj):
    # strict JSON: non-finite floats become null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump(obj, path):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _complex(z):
    return [float(z.real), float(z.imag)]


def _check_keys(block, allowed, where):
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {where} field '{unknown[0]}'", field=unknown[0])


def _regularization(block, pf_k0, epsilon):
    if block is None:
        reg = Regularization.adiabatic(1e-3 * pf_k0)
    elif isinstance(block, dict):
        reg = Regularization.from_dict(block)
    else:
        raise ConfigError("regularization must be an object", field="regularization")
    if epsilon is not None:
        reg = Regularization.adiabatic(epsilon)
    return reg


def _omega_grid(block):
    if isinstance(block, list):
        return np.asarray(block, dtype=float)
    if not isinstance(block, dict):
        raise ConfigError("omega_grid must be a list or {min, max, n}", field="omega_grid")
    _check_keys(block, ("min", "max", "n"), "omega_grid")
    try:
        lo, hi, n = float(block["min"]), float(block["max"]), block["n"]
    except KeyError as exc:
        raise ConfigError(f"omega_grid missing '{exc.args[0]}'", field="omega_grid") from None
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"omega_grid n must be a positive integer, got {n!r}", field="omega_grid.n")
    return np.linspace(lo, hi, n)


def _phase_function(block):
    if not isinstance(block, dict):
        raise ConfigError("phase_function must be an object", field="phase_function")
    try:
        return PhaseFunction.from_dict(block)
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed phase_function: {exc}", field="phase_function") from None


# -- commands -------------------------------------------------------------------------
# each returns (resolved config, writer) where writer(out_dir, fmt) produces artifacts


def cmd_scan(cfg, args):
    _check_keys(cfg, ("phase_function", "regularization", "omega_grid"), "scan")
    pf = _phase_function(cfg.get("phase_function", DEFAULT_FAMILY))
    reg = _regularization(cfg.get("regularization"), pf.k0, args.epsilon)
    grid = _omega_grid(cfg.get("omega_grid", {"min": 0.05, "max": 3.0, "n": 300}))
    spec = spectrum_scan(pf, grid, reg)
    resolved = {"phase_function": pf.to_dict(), "regularization": reg.to_dict(), "omega_grid": grid.tolist()}

    def write(out, fmt, meta):
        if fmt == "csv":
            spec.metadata = {"config": meta}
            spec.write(out / "spectrum.csv", out / "spectrum.csv.json")
        else:
            data = {
                "config": meta,
                "omega": spec.omega.tolist(),
                "i_plus": [_complex(z) for z in spec.i_plus],
                "i_minus": [_complex(z) for z in spec.i_minus],
            }
            _dump(data, out / "spectrum.json")

    return resolved, write


def cmd_find_transparency(cfg, args):
    base = demo_spec().to_dict()
    base["regularization"] = None
    base.update(cfg)
    if args.epsilon is not None:
        base["regularization"] = Regularization.adiabatic(args.epsilon).to_dict()
    try:
        spec = SearchSpec.from_dict(base)
    except TypeError as exc:
        raise ConfigError(f"malformed search spec: {exc}", field="search") from None
    report = transparency_report(spec)
    resolved = spec.to_dict()

    def write(out, fmt, meta):
        d = report.to_dict("transparency_spectrum.csv")
        d["config"] = meta
        _dump(d, out / "transparency.json")
        report.spectrum.metadata = {"config": meta}
        report.spectrum.write(out / "transparency_spectrum.csv", out / "transparency_spectrum.csv.json")

    return resolved, write


def cmd_reconstruct(cfg, args):
    _check_keys(cfg, ("phase_function", "tau_min", "tau_max", "n_samples", "tolerance"), "reconstruct")
    pf = _phase_function(cfg.get("phase_function", DEFAULT_FAMILY))
    knots = pf.knots
    tau_min = float(cfg.get("tau_min", min(knots[0], 0.0) - 5.0))
    tau_max = float(cfg.get("tau_max", knots[-1] + 5.0))
    n = cfg.get("n_samples", 1001)
    tol = float(cfg.get("tolerance", 1e-10))
    traj = reconstruct_trajectory(pf, tau_min, tau_max, n, tol)
    resolved = {"phase_function": pf.to_dict(), "tau_min": tau_min, "tau_max": tau_max, "n_samples": n,
                "tolerance": tol}

    def write(out, fmt, meta):
        summary = {"config": meta, "verification": dict(traj.diagnostics)}
        if fmt == "csv":
            traj.to_csv(out / "trajectory.csv")
            _dump(summary, out / "trajectory.json")
        else:
            summary["samples"] = {
                "tau": traj.tau.tolist(),
                "t": traj.position[:, 0].tolist(),
                "x": traj.position[:, 1].tolist(),
                "u0": traj.velocity[:, 0].tolist(),
                "u1": traj.velocity[:, 1].tolist(),
            }
            _dump(summary, out / "trajectory.json")

    return resolved, write


def cmd_probability(cfg, args):
    _check_keys(cfg, ("amplitude_pair", "phase_function", "omega", "regularization", "state", "ctx"), "probability")
    if "amplitude_pair" in cfg:
        try:
            pair = AmplitudePair.from_dict(cfg["amplitude_pair"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed amplitude_pair: {exc}", field="amplitude_pair") from None
        source = {"amplitude_pair": pair.to_dict()}
    elif "phase_function" in cfg:
        pf = _phase_function(cfg["phase_function"])
        if "omega" not in cfg:
            raise ConfigError("probability from a phase function needs 'omega'", field="omega")
        reg = _regularization(cfg.get("regularization"), pf.k0, args.epsilon)
        pair = eval_pair(pf, float(cfg["omega"]), reg)
        source = {"phase_function": pf.to_dict(), "omega": float(cfg["omega"]), "regularization": reg.to_dict()}
    else:
        raise ConfigError("probability needs 'amplitude_pair' or 'phase_function'", field="amplitude_pair")
    state = field_state_from_dict(cfg.get("state", {"type": "fock", "value": 0}))
    ctx = ProbabilityContext.from_dict(cfg.get("ctx"))
    result = state_probabilities(pair, state, ctx)
    resolved = dict(source, state=state.to_dict(), ctx=ctx.to_dict())

    def write(out, fmt, meta):
        d = {"config": meta, "amplitudes": pair.to_dict(), "ratio": pair.ratio}
        d.update({k: v for k, v in result.items() if k not in ("state", "ctx")})
        _dump(d, out / "probability.json")

    return resolved, write


def cmd_unruh_check(cfg, args):
    d = dict(cfg)
    if args.epsilon is not None:
        d["epsilon"] = args.epsilon
    try:
        spec = UnruhSpec.from_dict(d)
    except TypeError as exc:
        raise ConfigError(f"malformed unruh spec: {exc}", field="unruh") from None
    report = thermal_spectrum_check(spec)
    resolved = spec.to_dict()

    def write(out, fmt, meta):
        summary = report.to_dict()
        summary["config"] = meta
        if fmt == "csv":
            with open(out / "unruh.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["omega", "measured", "expected", "rel_dev"])
                for row in report.csv_rows():
                    w.writerow([repr(float(v)) for v in row])
        else:
            summary["rows"] = [dict(zip(("omega", "measured", "expected", "rel_dev"), r)) for r in report.csv_rows()]
        _dump(summary, out / "unruh.json")

    return resolved, write


COMMANDS = {
    "scan": cmd_scan,
    "find-transparency": cmd_find_transparency,
    "reconstruct": cmd_reconstruct,
    "probability": cmd_probability,
    "unruh-check": cmd_unruh_check,
}


# -- entry point ----------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="unruh-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--out", default=".", help="output directory (created if missing)")
        s.add_argument("--threads", type=int, default=None, help=f"worker threads (fallback ${THREADS_ENV})")
        s.add_argument("--epsilon", type=float, default=None, help="override the adiabatic damping rate")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:  # OSError -> exit 3
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", field="config") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object", field="config")
    return cfg


def _fail(code, message):
    print(f"unruh-lab: {message}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None and args.threads < 1:
            raise ValidationError(f"--threads must be >= 1, got {args.threads}", field="threads")
        if args.epsilon is not None and not (math.isfinite(args.epsilon) and args.epsilon > 0):
            raise ValidationError(f"--epsilon must be positive, got {args.epsilon}", field="epsilon")
        set_threads(args.threads)
        cfg = _load_config(args.config)
        cfg.pop("version", None)
        cfg.pop("command", None)
        seed = cfg.pop("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}", field="seed")
        resolved, write = COMMANDS[args.command](cfg, args)
        meta = {"command": args.command, "version": __version__, "seed": seed, "format": args.format}
        meta.update(resolved)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write(out, args.format, meta)
    except ValidationError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        return _fail(EXIT_VALIDATION, f"invalid input{where}: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, f"I/O error: {exc}")
    except UnruhLabError as exc:
        return _fail(EXIT_NO_RESULT, f"no result: {type(exc).__name__}: {exc}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
