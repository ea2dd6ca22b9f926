"""Command-line front end for the snoidal wave laboratory.

Subcommands
-----------
wave       construct one profile: samples CSV (x, h, h1, h2) + parameter JSON
spectrum   full linearized-operator report as JSON (field names are stable:
           parameters, counts, eigenvalues, D1_closed, D1_numeric, Dmatrix,
           n0, z0, d2, residuals, coercivity)
evolve     run the (projected) flow, write the trace CSV
           `t,E,F,mean_phi,mean_phidot,orbit_distance` plus a metadata JSON
stability  evolve + record the measured ratio max orbit distance / eps
sweep      fan a key=value config file (comma lists expand to a cartesian
           product) over a worker pool; one output file set per job

Exit codes: 0 success, 2 invalid parameters, 3 internal consistency
violation, 4 blow-up (blow-up time goes to stderr).

All floating-point output uses shortest round-trip decimal strings, so a
repeated run with the same flags and seed is byte-identical.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .evolution import (
    BlowUpError,
    perturbation_random,
    run_experiment,
    TRACE_COLUMNS,
)
from .spectral import (
    EigenSolveError,
    IndexMismatchError,
    SingularSystemError,
    full_report,
)
from .waves import ModulusBoundaryError, OutOfRangeError, solve_modulus

__all__ = ["main", "build_parser"]


def _fmt(x: float) -> str:
    """Shortest decimal string that round-trips the double."""
    return repr(float(x))


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    return obj


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonify(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: str, header: tuple[str, ...], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _metadata(args, wave, **extra) -> dict:
    meta = {
        "command": args.command,
        "L": wave.L,
        "c": wave.c,
        "omega": wave.omega,
        "k": wave.k.value,
        "N": args.N,
        "format": args.format,
    }
    for name in ("dt", "T", "eps", "seed", "projected"):
        if hasattr(args, name):
            meta[name] = getattr(args, name)
    meta.update(extra)
    return meta


def cmd_wave(args) -> int:
    from .waves import ode_residual, profile_eval

    wave = solve_modulus(args.L, args.c)
    xs = np.arange(args.N) * (wave.L / args.N)
    rows = [(x, *profile_eval(wave, x)) for x in xs]
    residual = ode_residual(wave, args.N)
    if args.format == "csv":
        _write_csv(args.out + ".csv", ("x", "h", "h1", "h2"), rows)
    else:
        _write_json(args.out + "_samples.json",
                    [dict(zip(("x", "h", "h1", "h2"), row)) for row in rows])
    _write_json(args.out + ".json", _metadata(args, wave, a=wave.a, b=wave.b,
                                               ode_residual=residual))
    return 0


def cmd_spectrum(args) -> int:
    report = full_report(args.L, args.c, args.N)
    _write_json(args.out + ".json", report)
    return 0


def cmd_evolve(args) -> int:
    wave = solve_modulus(args.L, args.c)
    perturbation = None
    if args.eps > 0.0:
        perturbation = perturbation_random(wave.L, args.N, args.seed)
    nsteps = int(round(args.T / args.dt))
    sample_every = max(1, nsteps // 500)
    trace = run_experiment(
        wave, perturbation, args.eps, args.T, args.dt, sample_every,
        N=args.N, projected=args.projected,
    )
    _write_csv(args.out + ".csv", TRACE_COLUMNS, trace.samples)
    extra = {"sample_every": sample_every}
    if args.command == "stability":
        if args.eps <= 0.0:
            raise OutOfRangeError("stability runs need a positive --eps")
        max_dist = float(np.max(trace.column("orbit_distance")))
        extra["max_orbit_distance"] = max_dist
        extra["stability_ratio"] = max_dist / args.eps
    _write_json(args.out + ".json", _metadata(args, wave, **extra))
    return 0


def _parse_sweep_config(path: str) -> list[dict]:
    """key = value lines; comma-separated values expand to a cartesian product."""
    scalars: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            scalars[key] = value
    if "command" not in scalars:
        raise ValueError(f"{path}: sweep config needs a 'command' entry")
    if scalars["command"] not in ("wave", "spectrum", "evolve", "stability"):
        raise ValueError(f"{path}: cannot sweep command {scalars['command']!r}")
    lists = {k: [v.strip() for v in val.split(",")] for k, val in scalars.items()}
    keys = sorted(lists)
    jobs = []
    for combo in itertools.product(*(lists[k] for k in keys)):
        jobs.append(dict(zip(keys, combo)))
    return jobs


def _run_sweep_job(payload: tuple[int, dict, str]) -> tuple[int, int, str]:
    idx, job, out_prefix = payload
    argv = [job["command"]]
    for key, value in job.items():
        if key == "command":
            continue
        if key == "projected":
            argv.append("--projected" if value.lower() in ("1", "true", "yes") else "--unprojected")
        else:
            argv.extend([f"--{key}", value])
    argv.extend(["--out", f"{out_prefix}_{idx:04d}"])
    code = main(argv)
    return idx, code, " ".join(argv)


def cmd_sweep(args) -> int:
    jobs = _parse_sweep_config(args.config)
    payloads = [(i, job, args.out) for i, job in enumerate(jobs)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_sweep_job, payloads))
    else:
        results = [_run_sweep_job(p) for p in payloads]
    worst = 0
    for idx, code, argv in results:
        if code != 0:
            print(f"sweep job {idx} failed with exit {code}: {argv}", file=sys.stderr)
            worst = max(worst, code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snoidal",
        description="Snoidal traveling waves of the phi^4 equation: profiles, "
                    "spectra, and orbital-stability experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_wave_flags(p):
        p.add_argument("--L", type=float, required=True, help="spatial period, in (0, 2*pi)")
        p.add_argument("--c", type=float, required=True, help="wave speed")
        p.add_argument("--N", type=int, default=256, help="grid size (even)")
        p.add_argument("--out", type=str, default=None, help="output path prefix")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p_wave = sub.add_parser("wave", help="construct one snoidal profile")
    add_wave_flags(p_wave)

    p_spec = sub.add_parser("spectrum", help="linearized-operator spectral report")
    add_wave_flags(p_spec)

    for name, help_text in (("evolve", "run the projected flow"),
                            ("stability", "evolve and report max distance / eps")):
        p = sub.add_parser(name, help=help_text)
        add_wave_flags(p)
        p.add_argument("--dt", type=float, default=1e-3, help="time step")
        p.add_argument("--T", type=float, default=100.0, help="time horizon")
        p.add_argument("--eps", type=float, default=0.0, help="perturbation amplitude")
        p.add_argument("--seed", type=int, default=0, help="perturbation RNG seed (PCG64)")
        p.add_argument("--projected", dest="projected", action="store_true", default=True,
                       help="evolve the zero-mean projected flow (default)")
        p.add_argument("--unprojected", dest="projected", action="store_false",
                       help="evolve the plain flow (contrast mode)")

    p_sweep = sub.add_parser("sweep", help="fan a config file over a worker pool")
    p_sweep.add_argument("config", type=str, help="key = value file; comma lists sweep")
    p_sweep.add_argument("--out", type=str, default=None, help="output path prefix")
    p_sweep.add_argument("--workers", type=int, default=1, help="worker pool size")
    return parser


_DISPATCH = {
    "wave": cmd_wave,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "stability": cmd_evolve,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) is None:
        args.out = f"snoidal_{args.command}"
    try:
        return _DISPATCH[args.command](args)
    except BlowUpError as exc:
        print(f"blow-up at t = {_fmt(exc.time)}: {exc}", file=sys.stderr)
        return 4
    except (IndexMismatchError, SingularSystemError, EigenSolveError) as exc:
        print(f"internal consistency violation: {exc}", file=sys.stderr)
        return 3
    except (OutOfRangeError, ModulusBoundaryError, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
