"""Command-line front end.

Every command writes one table. CSV output starts with a single ``#`` line
holding the JSON provenance record, followed by a header row. JSON output
holds the same record under ``provenance`` next to ``columns`` and ``rows``.
Exit status: 0 success, 1 invalid input, 2 numerical failure (including a
failed check in ``verify-all``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np
import scipy

from . import __version__, coherent, model, pathint, verify
from .exceptions import NumericalError, RelsoscError, ValidationError
from .model import ModelParams

SEED_ENV = "RELSOSC_SEED"
COMMANDS = (
    "spectrum",
    "eigenfunction",
    "alpha-nu-sweep",
    "coherent-state",
    "overlap",
    "propagator",
    "partition",
    "path-integral",
    "trajectory",
    "bohr-sommerfeld",
    "verify-all",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega0", type=float, default=0.5, help="hbar omega / mc^2")
    p.add_argument("--g0", type=float, default=1.0, help="coupling m g / hbar")
    p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", help="flat key = value file supplying defaults")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relsosc", description="Relativistic linear singular oscillator toolkit.")
    parser.add_argument("--version", action="version", version=f"relsosc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="energy levels in mc^2 and hbar omega units")
    p.add_argument("--n-max", type=int, default=10)

    p = sub.add_parser("eigenfunction", help="psi_n on a real rho grid")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--rho-min", type=float, default=0.0)
    p.add_argument("--rho-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=101)

    p = sub.add_parser("alpha-nu-sweep", help="alpha and nu over a g0 grid")
    p.add_argument("--g0-min", type=float, default=0.0)
    p.add_argument("--g0-max", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=100)

    p = sub.add_parser("coherent-state", help="coherent state in position space, series and closed form")
    p.add_argument("--zeta", type=_complex, default=0.3 + 0.2j)
    p.add_argument("--rho-min", type=float, default=0.1)
    p.add_argument("--rho-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=50)

    p = sub.add_parser("overlap", help="<zeta'|zeta>, closed form and coefficient sum")
    p.add_argument("--bra", type=_complex, default=0.3 + 0.1j)
    p.add_argument("--ket", type=_complex, default=-0.2 + 0.25j)

    p = sub.add_parser("propagator", help="<zeta'|exp(-iTH)|zeta> at several omega0*T")
    p.add_argument("--bra", type=_complex, default=0.3 + 0.1j)
    p.add_argument("--ket", type=_complex, default=-0.2 + 0.25j)
    p.add_argument("--omega-t", type=_floats, default=[0.1, 1.0, 5.0], help="comma-separated omega0*T values")
    p.add_argument("--paper-form", action="store_true", help="also report the alternative closed form and its difference")

    p = sub.add_parser("partition", help="partition function at several omega0*beta")
    p.add_argument("--omega-beta", type=_floats, default=[0.5, 1.0, 2.0], help="comma-separated omega0*beta values")
    p.add_argument("--paper-form", action="store_true", help="also report the alternative closed form and its difference")

    p = sub.add_parser("path-integral", help="time-sliced propagator against the exact one")
    p.add_argument("--bra", type=_complex, default=verify.PATH_LABELS[0])
    p.add_argument("--ket", type=_complex, default=verify.PATH_LABELS[1])
    p.add_argument("--omega-t", type=float, default=0.2)
    p.add_argument("--slices", type=_ints, default=[1, 2, 3], help="comma-separated slice counts")
    p.add_argument("--scheme", choices=pathint.SCHEMES, default="deterministic")
    p.add_argument("--chains", type=int, default=24)
    p.add_argument("--samples", type=int, default=384)
    p.add_argument("--cutoff", type=float, default=pathint.DEFAULT_CUTOFF)

    p = sub.add_parser("trajectory", help="classical orbit in (tau, phi)")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--periods", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=500)

    p = sub.add_parser("bohr-sommerfeld", help="quantised-action energies against the spectrum")
    p.add_argument("--n-max", type=int, default=20)

    p = sub.add_parser("verify-all", help="run the acceptance checks")
    p.add_argument("--checks", type=_ints, default=None, help="comma-separated check numbers (default all)")

    for name in COMMANDS:
        _common(sub.choices[name])
    return parser


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"config {path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(sub: argparse.ArgumentParser, cfg: dict[str, str], path: str) -> None:
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, value in cfg.items():
        action = actions.get(key)
        if action is None:
            raise ValidationError(f"config {path}: unknown key {key!r} for this command")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValidationError(f"config {path}: {key} must be a boolean, got {value!r}")
            defaults[key] = value.lower() in ("true", "1", "yes")
        elif action.choices is not None and value not in action.choices:
            raise ValidationError(f"config {path}: {key} must be one of {list(action.choices)}, got {value!r}")
        else:
            defaults[key] = value  # argparse converts string defaults with the action's type
    sub.set_defaults(**defaults)


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(sub, _read_config(args.config), args.config)
        args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    return args


# ---------------------------------------------------------------------------
# Commands; each returns (columns, rows, tolerances, extra provenance)
# ---------------------------------------------------------------------------

def _energy_pair(E: float, omega0: float) -> tuple[float, float]:
    return E, (E - 1.0) / omega0


def _cmd_spectrum(args, params):
    if args.n_max < 0:
        raise ValidationError("spectrum: --n-max must be >= 0")
    rows = [(n, *_energy_pair(float(model.energy(n, params)), params.omega0)) for n in range(args.n_max + 1)]
    return ["n", "E_mc2", "E_minus_mc2_hbar_omega"], rows, {}, {}


def _cmd_eigenfunction(args, params):
    if args.points < 2 or args.n < 0:
        raise ValidationError("eigenfunction: need --points >= 2 and --n >= 0")
    rho = np.linspace(args.rho_min, args.rho_max, args.points)
    psi = model.eigenfunction(args.n, rho, params)
    rows = [(r, v.real, v.imag, abs(v)) for r, v in zip(rho, psi)]
    energy = _energy_pair(float(model.energy(args.n, params)), params.omega0)
    return ["rho", "re_psi", "im_psi", "abs_psi"], rows, {}, {"E_mc2": energy[0], "E_minus_mc2_hbar_omega": energy[1]}


def _cmd_alpha_nu_sweep(args, params):
    sweep = model.alpha_nu_sweep(params.omega0, args.g0_min, args.g0_max, args.steps)
    rows = [
        (g, a.real, n.real, a.imag, n.imag, reg)
        for g, a, n, reg in zip(sweep.g0, sweep.alpha, sweep.nu, sweep.regime)
    ]
    extra = {"g0_critical": 1 / (8 * params.omega0**2)}
    return ["g0", "re_alpha", "re_nu", "im_alpha", "im_nu", "regime"], rows, {}, extra


def _cmd_coherent_state(args, params):
    if args.points < 1:
        raise ValidationError("coherent-state: --points must be >= 1")
    label = coherent.CSLabel(args.zeta)
    closed_ok = params.regime != "subcritical"
    rows = []
    for r in np.linspace(args.rho_min, args.rho_max, args.points):
        s = coherent.cs_position_series(label, r, params)
        c = coherent.cs_position_closed(label, r, params) if closed_ok else complex("nan")
        rows.append((r, s.real, s.imag, c.real, c.imag, abs(s - c)))
    cols = ["rho", "re_series", "im_series", "re_closed", "im_closed", "abs_difference"]
    return cols, rows, {"series_tail": 1e-30}, {"zeta": [label.zeta.real, label.zeta.imag], "closed_form": closed_ok}


def _cmd_overlap(args, params):
    a = coherent.overlap(args.bra, args.ket, params)
    b = coherent.overlap_spectral(args.bra, args.ket, params)
    cols = ["re_closed", "im_closed", "re_spectral", "im_spectral", "abs_difference"]
    return cols, [(a.real, a.imag, b.real, b.imag, abs(a - b))], {"tail": coherent.TAIL_TOL}, _labels(args)


def _labels(args) -> dict:
    return {"bra": [args.bra.real, args.bra.imag], "ket": [args.ket.real, args.ket.imag]}


def _cmd_propagator(args, params):
    rows = []
    for wt in args.omega_t:
        T = wt / params.omega0
        a = coherent.propagator_closed(args.bra, args.ket, T, params)
        b = coherent.propagator_spectral(args.bra, args.ket, T, params)
        row = [wt, T, a.real, a.imag, b.real, b.imag, abs(a - b)]
        if args.paper_form:
            c = coherent.propagator_closed(args.bra, args.ket, T, params, paper_form=True)
            row += [c.real, c.imag, abs(c - a)]
        rows.append(tuple(row))
    cols = ["omega_t", "t", "re_closed", "im_closed", "re_spectral", "im_spectral", "abs_difference"]
    if args.paper_form:
        cols += ["re_paper", "im_paper", "paper_difference"]
    return cols, rows, {"tail": coherent.TAIL_TOL}, _labels(args)


def _cmd_partition(args, params):
    rows = []
    for wb in args.omega_beta:
        beta = wb / params.omega0
        res = coherent.partition_function(beta, params)
        direct = coherent.partition_direct_sum(beta, params, 200)
        row = [wb, beta, res.z, direct, res.z_nonrel, res.ratio]
        if args.paper_form:
            row += [res.z_paper, res.ratio_paper, res.paper_discrepancy]
        rows.append(tuple(row))
    cols = ["omega_beta", "beta", "z", "z_direct_sum", "z_nonrel", "ratio"]
    if args.paper_form:
        cols += ["z_paper", "ratio_paper", "paper_difference"]
    return cols, rows, {"direct_sum_terms": 200}, {}


def _cmd_path_integral(args, params):
    T = args.omega_t / params.omega0
    exact = coherent.propagator_closed(args.bra, args.ket, T, params)
    rows = []
    for n in args.slices:
        cfg = pathint.SlicingConfig(
            n, T, args.scheme, seed=args.seed, chains=args.chains, samples=args.samples, cutoff=args.cutoff
        )
        r = pathint.compose_slices(args.bra, args.ket, cfg, params)
        rows.append((n, r.value.real, r.value.imag, r.error, exact.real, exact.imag, abs(r.value - exact)))
    cols = ["n_slices", "re_value", "im_value", "error", "re_exact", "im_exact", "deviation"]
    extra = {**_labels(args), "scheme": args.scheme, "cutoff": args.cutoff, "chains": args.chains, "samples": args.samples}
    return cols, rows, {"cutoff": args.cutoff}, extra


def _cmd_trajectory(args, params):
    start = pathint.PhasePoint(args.tau, args.phi)
    traj = pathint.integrate_trajectory(start, args.periods * pathint.orbit_period(params), args.steps, params)
    rows = [
        (t, tau, phi, z.real, z.imag, *_energy_pair(e, params.omega0))
        for t, tau, phi, z, e in zip(traj.t, traj.tau, traj.phi, traj.zeta, traj.energy)
    ]
    cols = ["t", "tau", "phi", "re_zeta", "im_zeta", "H_mc2", "H_minus_mc2_hbar_omega"]
    return cols, rows, {"rtol": pathint.ODE_RTOL, "atol": pathint.ODE_ATOL}, {}


def _cmd_bohr_sommerfeld(args, params):
    if args.n_max < 0:
        raise ValidationError("bohr-sommerfeld: --n-max must be >= 0")
    rows = []
    for n in range(args.n_max + 1):
        e_bs = pathint.bohr_sommerfeld_energy(n, params)
        e = float(model.energy(n, params))
        rows.append((n, *_energy_pair(e_bs, params.omega0), e, abs(e_bs / e - 1)))
    return ["n", "E_bs_mc2", "E_bs_minus_mc2_hbar_omega", "E_spectrum_mc2", "relative_difference"], rows, {}, {}


def _cmd_verify_all(args, params):
    wanted = args.checks or list(range(1, len(verify.CHECKS) + 1))
    if any(not 1 <= c <= len(verify.CHECKS) for c in wanted):
        raise ValidationError(f"verify-all: check numbers must lie in 1..{len(verify.CHECKS)}")
    rows = []
    for c in wanted:
        check = verify.CHECKS[c - 1]
        kwargs = {"seed": args.seed} if check is verify.check_path_integral else {}
        res = verify.timed(check, params, **kwargs)
        print(res.line(), file=sys.stderr)
        rows.append((res.number, res.name, "PASS" if res.passed else "FAIL", res.measured, res.tol))
    return ["check", "name", "status", "measured", "tolerance"], rows, {}, {}


HANDLERS = {
    "spectrum": _cmd_spectrum,
    "eigenfunction": _cmd_eigenfunction,
    "alpha-nu-sweep": _cmd_alpha_nu_sweep,
    "coherent-state": _cmd_coherent_state,
    "overlap": _cmd_overlap,
    "propagator": _cmd_propagator,
    "partition": _cmd_partition,
    "path-integral": _cmd_path_integral,
    "trajectory": _cmd_trajectory,
    "bohr-sommerfeld": _cmd_bohr_sommerfeld,
    "verify-all": _cmd_verify_all,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _clean(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if math.isnan(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    return x


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def provenance(args, params, tolerances: dict, extra: dict) -> dict:
    options = {
        k: (v.real, v.imag) if isinstance(v, complex) else v
        for k, v in sorted(vars(args).items())
        if k not in ("command", "output", "format", "config", "omega0", "g0", "seed")
    }
    return _clean(
        {
            "command": args.command,
            "params": {"omega0": params.omega0, "g0": params.g0, "regime": params.regime},
            "options": options,
            "seed": args.seed,
            "tolerances": tolerances,
            "versions": {"relsosc": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
            "units": "hbar = m = c = 1; energies in mc^2, time in hbar/mc^2",
            "results": extra,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
    )


def render(fmt: str, header: dict, columns: list[str], rows: list) -> str:
    if fmt == "json":
        doc = {"provenance": header, "columns": columns, "rows": _clean([list(r) for r in rows])}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(x) for x in r])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".relsosc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(args) -> int:
    params = ModelParams(args.omega0, args.g0)
    columns, rows, tolerances, extra = HANDLERS[args.command](args, params)
    text = render(args.format, provenance(args, params, tolerances, extra), columns, rows)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        write_atomic(args.output, text)
    if args.command == "verify-all" and any(r[2] == "FAIL" for r in rows):
        return 2
    return 0


def main(argv=None) -> int:
    try:
        return run(parse_args(argv))
    except ValidationError as exc:
        print(f"relsosc: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"relsosc: numerical failure: {exc}", file=sys.stderr)
        return 2
    except RelsoscError as exc:  # pragma: no cover - every subclass is one of the two above
        print(f"relsosc: error: {exc}", file=sys.stderr)
        return 2
