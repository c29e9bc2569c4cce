"""Command-line front end: figure data as CSV plus a JSON summary per run.

Every command takes ``--config FILE`` (INI-style, one section per command,
plus an optional ``[common]`` section); explicit flags override file values.
Exit codes: 0 success, 2 bad arguments, 3 numerical contract violation.
"""

import argparse
import configparser
import io
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ContractViolation, DomainError
from .modes import CACHE_ENV, ModeCache, check_nodeless, decompose, set_default_cache, singular_value_sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONTRACT = 3


class UsageError(Exception):
    pass


def default_cache_dir():
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "raman_qmem"


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(columns, data):
    """CSV with one header line and 17-significant-digit values."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    buf = io.StringIO()
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(columns), comments="")
    return buf.getvalue()


def json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"{type(x).__name__} is not JSON serializable")


def _write_outputs(args, files, summary):
    out = Path(args.out)
    written = []
    for name, text in files.items():
        atomic_write(out / name, text)
        written.append(name)
    summary = dict(summary, command=args.command, version=__version__, config=effective_config(args),
                   files=sorted(written) + [f"{args.command}_summary.json"])
    atomic_write(out / f"{args.command}_summary.json", json_text(summary))
    print(json_text(summary), end="")


_INTERNAL = {"command", "config", "func", "out", "cache_dir", "no_cache"}


def effective_config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _INTERNAL}


# commands ------------------------------------------------------------------------------------


def cmd_modes(args):
    if args.coupling is None:
        raise UsageError("--coupling is required")
    d = decompose(args.coupling, args.grid, args.modes, args.rule)
    k = d.num_modes
    idx = np.arange(1, k + 1)
    files = {
        "modes_lambda.csv": csv_text(["mode[1]", "lambda[1]", "signed_lambda[1]", "mu[1]"],
                                     np.column_stack([idx, d.lambdas, d.signed_lambdas, d.mus])),
        "modes_phi.csv": csv_text(["x[1]", "weight[1]"] + [f"phi_{i}[1]" for i in idx],
                                  np.column_stack([d.rule.nodes, d.rule.weights, d.phi])),
    }
    summary = {"lambdas": d.lambdas, "mus": d.mus, "signs": d.signs}
    if args.check_nodeless:
        check_nodeless(d)
        summary["nodeless"] = True
    _write_outputs(args, files, summary)


def cmd_sweep(args):
    if not 0 < args.cmin <= args.cmax:
        raise UsageError("need 0 < cmin <= cmax")
    C = np.linspace(args.cmin, args.cmax, args.steps)
    table = singular_value_sweep(C, args.grid, args.modes, args.rule)
    cols = ["C[1]"] + [f"lambda_{i}[1]" for i in range(1, args.modes + 1)]
    monotone = bool(np.all(np.diff(table.lambdas, axis=0) >= -1e-12))
    _write_outputs(args, {"sweep.csv": csv_text(cols, np.column_stack([C, table.lambdas]))},
                   {"monotone": monotone, "lambda_at_cmax": table.lambdas[-1]})


def cmd_store(args):
    from .physical import gaussian_wavepacket, resample_scaled
    from .readin import readin_by_scattering
    from .shaping import intensity_distance, shape_analytic, shape_optimize
    from .transport import excitation_budget, field_map

    xi = gaussian_wavepacket(args.sigma * args.T, args.tau0 * args.T, args.T, args.samples)
    d = decompose(args.coupling, args.grid, args.modes)
    analytic = shape_analytic(xi, d, args.omega_T, None, args.modes)
    if args.method == "analytic":
        res = analytic
    else:
        res = shape_optimize(xi, args.coupling, None, args.init, args.budget, args.seed, args.omega_T, d,
                             num_modes=args.modes)
    pulse = res.pulse
    eps = args.coupling * pulse.cumulative / pulse.omega_T
    pulse_csv = csv_text(
        ["tau[T]", "signal_intensity[1/T]", "control_intensity[omega_T/T]", "control_phase[rad]", "eps[1]"],
        np.column_stack([xi.tau, xi.intensity, pulse.intensity / args.omega_T * args.T,
                         np.angle(pulse.omega_rabi), eps]),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        field = resample_scaled(None, pulse, xi.xi, args.coupling, max(args.grid, 64), strict=False)
        stored, transmitted = readin_by_scattering(xi, d, pulse, None, max(args.grid, 64), strict=False)
    fmap = field_map(field, args.map_points, args.map_points)
    E, Z = np.meshgrid(fmap.eps, fmap.zeta, indexing="ij")
    a2, b2 = fmap.intensity()
    field_csv = csv_text(["eps[1]", "zeta[1]", "alpha_intensity[1]", "beta_intensity[1]"],
                         np.column_stack([E.ravel(), Z.ravel(), a2.ravel(), b2.ravel()]))
    summary = {
        "method": res.method,
        "efficiency": res.achieved_efficiency,
        "lambda_1_squared": float(d.lambdas[0] ** 2),
        "mode_residual": res.residual,
        "evaluations": res.evaluations,
        "converged": res.converged,
        "profile_distance_to_analytic": intensity_distance(pulse.intensity, analytic.pulse.intensity, xi.tau),
        "scattering": {"stored": stored, "transmitted": transmitted},
        "map_budget_defect": excitation_budget(fmap).relative_defect,
    }
    _write_outputs(args, {"store_pulse.csv": pulse_csv, "store_field.csv": field_csv}, summary)


def cmd_retrieval_map(args):
    from .readout import retrieval_map

    C = np.linspace(args.cmin, args.cmax, args.csteps)
    Cr = np.linspace(args.crmin, args.crmax, args.crsteps)
    if np.any(C <= 0) or np.any(Cr <= 0):
        raise UsageError("coupling ranges must be positive")
    m = retrieval_map(C, Cr, args.modes, args.grid, workers=args.workers)
    CC, RR = np.meshgrid(C, Cr, indexing="ij")
    text = csv_text(["C[1]", "C_r[1]", "N[1]", "truncation_bound[1]"],
                    np.column_stack([CC.ravel(), RR.ravel(), m.N_values.ravel(), m.truncation.ravel()]))
    ref = float(C[np.argmin(np.abs(C - args.crossing_at))])
    summary = {
        "max_N": float(m.N_values.max()),
        "max_truncation_bound": float(m.truncation.max()),
        "argmax_C": dict(zip(map(repr, Cr.tolist()), m.argmax_C().tolist())),
        "crossing": {"C": ref, "level": args.level, "C_r": m.first_crossing(ref, args.level)},
    }
    _write_outputs(args, {"retrieval_map.csv": text}, summary)


def cmd_physical(args):
    from .physical import (coupling_from_ensemble, coupling_from_fields, desk_scenario, ensemble_omega_T,
                           phasematch_report)

    p = desk_scenario(density=args.density, L=args.length, f=args.f, pulse_energy=args.pulse_energy,
                      duration=args.duration, wavelength=args.wavelength,
                      detuning_factor=args.detuning_factor, gamma=args.gamma)
    omega_T = ensemble_omega_T(p.f, p.N_c, p.area)
    C_ens = float(coupling_from_ensemble(p))
    C_fields = float(coupling_from_fields(p, omega_T))
    rows = [
        ("C_ensemble", C_ens), ("C_fields", C_fields), ("delta", p.delta), ("gamma", p.gamma),
        ("kappa", p.kappa), ("omega_T", omega_T), ("area", p.area), ("N_a", p.N_a), ("N_c", p.N_c),
        ("L", p.L), ("T", p.T),
    ]
    units = ["1", "1", "rad/s", "rad/s", "1/(m^0.5 s^0.5)", "1/s", "m^2", "1", "1", "m", "s"]
    buf = io.StringIO()
    buf.write("quantity,value[unit column],unit\n")
    for (name, value), unit in zip(rows, units):
        buf.write(f"{name},{value:.17g},{unit}\n")
    summary = {"C_ensemble": C_ens, "C_fields": C_fields, "params": p.to_dict(),
               "dispersive_ok": p.dispersive_ok}
    if args.delta_r is not None:
        summary["phasematch"] = phasematch_report(p, args.delta_r * p.delta, args.N_c_r)
    _write_outputs(args, {"physical.csv": buf.getvalue()}, summary)


def cmd_cache(args):
    d = Path(args.cache_dir) if args.cache_dir else default_cache_dir()
    files = sorted(d.glob("modes_v*.bin")) if d.is_dir() else []
    if args.clear:
        for f in files:
            f.unlink()
    print(json_text({"directory": str(d), "entries": len(files), "cleared": bool(args.clear)}), end="")


# parser --------------------------------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="INI file with a section per command; flags override it")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--cache-dir", help=f"decomposition cache directory (env {CACHE_ENV})")
    p.add_argument("--no-cache", action="store_true", help="keep decompositions in memory only")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="raman-qmem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("modes", parents=[common], help="singular values and mode functions at one C")
    p.add_argument("--coupling", type=float, default=None, help="required (flag or config)")
    p.add_argument("--grid", type=int, default=500)
    p.add_argument("--modes", type=int, default=5)
    p.add_argument("--rule", default="gauss", choices=["gauss", "lobatto", "midpoint", "trapezoid", "simpson"])
    p.add_argument("--check-nodeless", action="store_true", help="fail with exit 3 if phi_1 changes sign")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("sweep", parents=[common], help="leading singular values against C")
    p.add_argument("--cmin", type=float, default=0.2)
    p.add_argument("--cmax", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--grid", type=int, default=500)
    p.add_argument("--modes", type=int, default=5)
    p.add_argument("--rule", default="gauss", choices=["gauss", "lobatto", "midpoint", "trapezoid", "simpson"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("store", parents=[common], help="shaped storage of a Gaussian wavepacket")
    p.add_argument("--coupling", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=0.125, help="intensity FWHM in units of T")
    p.add_argument("--tau0", type=float, default=2.0 / 3.0, help="centre in units of T")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--omega-T", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--method", default="analytic", choices=["analytic", "optimize"])
    p.add_argument("--init", default="flat", choices=["flat", "random"])
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--modes", type=int, default=5)
    p.add_argument("--map-points", type=int, default=129)
    p.set_defaults(func=cmd_store)

    p = sub.add_parser("retrieval-map", parents=[common], help="forward retrieval probability over (C, C_r)")
    p.add_argument("--cmin", type=float, default=0.25)
    p.add_argument("--cmax", type=float, default=4.0)
    p.add_argument("--csteps", type=int, default=16)
    p.add_argument("--crmin", type=float, default=0.5)
    p.add_argument("--crmax", type=float, default=15.0)
    p.add_argument("--crsteps", type=int, default=30)
    p.add_argument("--modes", type=int, default=15)
    p.add_argument("--grid", type=int, default=500)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--crossing-at", type=float, default=2.0)
    p.set_defaults(func=cmd_retrieval_map)

    p = sub.add_parser("physical", parents=[common], help="coupling of a vapour-cell scenario, both formulas")
    p.add_argument("--density", type=float, default=1e20, help="atoms per m^3")
    p.add_argument("--length", type=float, default=0.02, help="m")
    p.add_argument("--f", type=float, default=1.0, help="oscillator strength")
    p.add_argument("--pulse-energy", type=float, default=100e-9, help="J")
    p.add_argument("--duration", type=float, default=1e-12, help="signal duration, s")
    p.add_argument("--wavelength", type=float, default=852e-9, help="m")
    p.add_argument("--detuning-factor", type=float, default=10.0, help="detuning over signal bandwidth")
    p.add_argument("--gamma", type=float, default=2 * np.pi * 5.2e6, help="excited-state linewidth, rad/s")
    p.add_argument("--delta-r", type=float, default=None, help="read-out detuning in units of delta")
    p.add_argument("--N-c-r", dest="N_c_r", type=float, default=None, help="read-out control photons")
    p.set_defaults(func=cmd_physical)

    p = sub.add_parser("cache", parents=[common], help="inspect or clear the decomposition cache")
    p.add_argument("--clear", action="store_true")
    p.set_defaults(func=cmd_cache)
    return parser


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def _apply_config(parser, argv):
    """Re-parse with the config file's values installed as subcommand defaults."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cp = configparser.ConfigParser()
    try:
        with open(args.config, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    sub = _subparser(parser, args.command)
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    values = {}
    for section in ("common", args.command):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            dest = key.replace("-", "_")
            if dest not in actions:
                if section == "common":
                    continue
                raise UsageError(f"unknown key {key!r} in [{section}]")
            a = actions[dest]
            if isinstance(a, argparse._StoreTrueAction):
                val = cp.getboolean(section, key)
            else:
                val = a.type(raw) if a.type else raw
                if a.choices and val not in a.choices:
                    raise UsageError(f"{key} must be one of {list(a.choices)}")
            values[dest] = val
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as err:
        print(f"raman-qmem: error: {err}", file=sys.stderr)
        return EXIT_USAGE

    cache_dir = args.cache_dir or default_cache_dir()
    set_default_cache(ModeCache(None if args.no_cache else cache_dir))
    try:
        args.func(args)
    except (UsageError, DomainError) as err:
        print(f"raman-qmem: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ContractViolation as err:
        print(f"raman-qmem: numerical contract violated: {err}", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK
