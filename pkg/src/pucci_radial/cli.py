"""Command-line front end.

Every subcommand takes the problem from flags and/or a JSON file given with
``--config`` (flags win), writes its artifacts into ``--out`` and prints a
one-line JSON status on stdout. Exit codes: 0 success, 1 failed
verification or internal error, 2 no root / no bracket, 3 invalid
configuration, 4 undetermined shot.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bvp import (BVP_CONTROLS, solve_ball, solve_mixed_dn, solve_mixed_nd, solve_nodal_annulus)
from .diagnostics import (CheckReport, check_convex_increasing_exclusion, check_energy_monotonicity,
                          check_hopf_bound, check_nodal_count, check_tau_bounds)
from .exceptions import (InvalidArgumentError, NoBracketError, NoKthZeroError, NoRootInComponentError,
                         PucciRadialError)
from .io import read_profile_csv, write_json, write_profile_csv
from .ode import SolverControls
from .operators import PucciKind, PucciParams, dual_operator, exponents
from .problem import Annulus, Ball, ProblemSpec, Sign
from .shooting import Classification, energy_trace, shoot_annulus, shoot_ball, shoot_neumann

EXIT_OK, EXIT_FAILED, EXIT_NO_ROOT, EXIT_CONFIG, EXIT_UNDETERMINED = 0, 1, 2, 3, 4

COMMANDS = ("solve-annulus", "solve-annulus-nodal", "solve-ball", "solve-mixed-dn", "solve-mixed-nd",
            "shoot", "exponents", "verify", "sweep")

CONFIG_KEYS = {"operator", "lambda", "Lambda", "n", "p", "a", "b", "R", "sign", "k", "controls", "out",
               "formats", "samples", "start", "parameter", "values", "max_zeros", "from"}

CONTROL_FLAGS = {
    "rel_tol": float, "abs_tol": float, "h_init": float, "h_min": float, "r_max": float,
    "blowup_threshold": float, "decay_threshold": float, "event_tol": float, "max_steps": int,
}

PROFILE_NAME, SUMMARY_NAME, SWEEP_NAME, REPORT_NAME = "profile.csv", "summary.json", "sweep.csv", "verify.json"


class ConfigError(InvalidArgumentError):
    """Bad flags or config file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(parser):
    S = argparse.SUPPRESS
    parser.add_argument("--config", default=S, help="JSON file with run settings; flags override it")
    parser.add_argument("--op", dest="operator", default=S, help="pucci+ or pucci-")
    parser.add_argument("--lambda", dest="lambda", type=float, default=S)
    parser.add_argument("--Lambda", dest="Lambda", type=float, default=S)
    parser.add_argument("--n", type=int, default=S, help="space dimension")
    parser.add_argument("--p", type=float, default=S, help="exponent p > 1")
    parser.add_argument("--a", type=float, default=S, help="inner radius")
    parser.add_argument("--b", type=float, default=S, help="outer radius")
    parser.add_argument("--R", type=float, default=S, help="ball radius")
    parser.add_argument("--sign", default=S, help="+ or -, sign on the first nodal region")
    parser.add_argument("--k", type=int, default=S, help="number of nodal regions")
    parser.add_argument("--out", default=S, help="output directory (default: out)")
    parser.add_argument("--formats", default=S, help="comma list from csv,json")
    parser.add_argument("--samples", type=int, default=S, help="profile rows in the CSV")
    for name, typ in CONTROL_FLAGS.items():
        parser.add_argument("--" + name.replace("_", "-"), dest="ctl_" + name, type=typ, default=S)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pucci-radial", allow_abbrev=False,
                     description="Radial solutions of -F(D^2u) = |u|^(p-1) u for Pucci operators.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, allow_abbrev=False)
        _common(sp)
        if name in ("shoot", "sweep"):
            sp.add_argument("--start", choices=("annulus", "ball", "neumann"), default=argparse.SUPPRESS)
        if name == "shoot":
            sp.add_argument("--parameter", "--alpha", "--gamma", dest="parameter", type=float,
                            default=argparse.SUPPRESS, help="initial slope or start value")
            sp.add_argument("--max-zeros", dest="max_zeros", type=int, default=argparse.SUPPRESS)
        if name == "sweep":
            sp.add_argument("--values", default=argparse.SUPPRESS, help="comma separated parameters")
            sp.add_argument("--max-zeros", dest="max_zeros", type=int, default=argparse.SUPPRESS)
        if name == "verify":
            sp.add_argument("--from", dest="from", default=argparse.SUPPRESS,
                            help="directory written by an earlier run")
    return parser


def load_config(args: dict) -> dict:
    """Merge ``--config`` file values with flags."""
    cfg = {}
    path = args.pop("config", None)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(data) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(data)
    controls = dict(cfg.get("controls") or {})
    bad = sorted(set(controls) - set(CONTROL_FLAGS))
    if bad:
        raise ConfigError(f"unknown control keys: {', '.join(bad)}")
    for key, value in args.items():
        if key.startswith("ctl_"):
            controls[key[4:]] = value
        elif key != "command":
            cfg[key] = value
    if controls:
        cfg["controls"] = controls
    return cfg


def _operator(name) -> PucciKind:
    key = str(name).strip().lower().replace("−", "-")
    table = {"pucci+": PucciKind.PLUS, "plus": PucciKind.PLUS, "pucci-": PucciKind.MINUS,
             "minus": PucciKind.MINUS}
    if key not in table:
        raise ConfigError(f"unknown operator {name!r}; use pucci+ or pucci-")
    return table[key]


def _need(cfg, key):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"missing required setting {key!r}")
    return cfg[key]


def _params(cfg) -> PucciParams:
    return PucciParams(float(_need(cfg, "lambda")), float(_need(cfg, "Lambda")), int(_need(cfg, "n")))


def _spec(cfg, domain=None) -> ProblemSpec:
    return ProblemSpec(_operator(cfg.get("operator", "pucci+")), _params(cfg), float(_need(cfg, "p")),
                       domain, Sign.parse(cfg.get("sign", "+")), int(cfg.get("k", 1)))


def _controls(cfg, base=BVP_CONTROLS) -> SolverControls:
    try:
        return base.with_(**{k: CONTROL_FLAGS[k](v) for k, v in (cfg.get("controls") or {}).items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad control value: {exc}") from None


def _annulus(cfg):
    return Annulus(float(_need(cfg, "a")), float(_need(cfg, "b")))


def _formats(cfg):
    fm = cfg.get("formats", "csv,json")
    items = fm.split(",") if isinstance(fm, str) else list(fm)
    items = [s.strip() for s in items if s.strip()]
    if not set(items) <= {"csv", "json"}:
        raise ConfigError(f"formats must be drawn from csv,json, got {fm!r}")
    return items


def _checks_list(reports):
    return [r.to_dict() for r in reports]


def _first_arch_checks(shot, spec, a, alpha):
    """Energy, maximum and boundary-slope certificates on a shot from ``u(a) = 0``."""
    if not shot.critical_points:
        return []
    out = [check_tau_bounds(shot, spec.params, spec.p, a, alpha), check_hopf_bound(shot, spec.params, a, alpha)]
    out.insert(0, check_energy_monotonicity(energy_trace(shot, spec.params, spec.p)))
    return out


def _class_for(shot, k):
    """A solve only needs the first ``k`` zeros; the horizon after them is irrelevant."""
    return Classification.FINITE.value if len(shot.zeros) >= k else shot.classification.value


def _summary(cfg, command, spec, controls, **fields):
    steps = fields.pop("steps", {})
    base = {"command": command, "spec": {k: v for k, v in sorted(cfg.items()) if k != "out"}}
    base.update(fields)
    base["exponents"] = spec.exponents.as_dict()
    base.setdefault("warnings", [])
    base["solver"] = {"controls": controls.as_dict(), "steps": steps}
    return base


def _emit(cfg, profile, summary):
    out = Path(cfg.get("out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    formats = _formats(cfg)
    files = []
    if profile is not None and "csv" in formats:
        r, u, du = profile.sample(int(cfg.get("samples", 2001)))
        write_profile_csv(out / PROFILE_NAME, r, u, du)
        files.append(str(out / PROFILE_NAME))
    if "json" in formats:
        write_json(out / SUMMARY_NAME, summary)
        files.append(str(out / SUMMARY_NAME))
    return files


def _solve(command, cfg):
    controls = _controls(cfg)
    if command == "solve-ball":
        spec = _spec(cfg, Ball(float(_need(cfg, "R"))))
        with warnings.catch_warnings():
            # recorded in the summary instead
            warnings.simplefilter("ignore")
            sol = solve_ball(spec, controls)
        shot = sol.shot
        checks = [sol.residual_report, check_convex_increasing_exclusion(sol.profile, spec),
                  check_nodal_count(sol.profile, sol.k, sol.first_sign)]
        summary = _summary(cfg, command, spec, controls, gamma=sol.shot_parameter,
                           center_value=float(sol.profile.u(0.0)),
                           rescale_factor=sol.rescale_factor, zeros=list(sol.radii[1:]),
                           critical_points=list(sol.critical_points), nodal_radii=list(sol.radii),
                           boundary_defect=sol.boundary_defect, residual=sol.residual,
                           classification=_class_for(shot, sol.k), checks=_checks_list(checks),
                           warnings=list(sol.warnings), steps=shot.trajectory.stats)
        return sol.profile, summary, checks

    domain = _annulus(cfg)
    spec = _spec(cfg, domain)
    a = domain.a
    work = spec if spec.sign is Sign.POSITIVE else ProblemSpec(dual_operator(spec.kind), spec.params, spec.p,
                                                               domain, Sign.POSITIVE, spec.nodal_k)
    if command in ("solve-annulus", "solve-annulus-nodal"):
        k = 1 if command == "solve-annulus" else int(cfg.get("k", 1))
        sol = solve_nodal_annulus(spec, controls, k=k)
        shot = sol.shot
        checks = [sol.residual_report, check_convex_increasing_exclusion(sol.profile, spec),
                  check_nodal_count(sol.profile, k, sol.first_sign)]
        checks += _first_arch_checks(shot, work, a, abs(sol.shot_parameter))
        summary = _summary(cfg, command, spec, controls, alpha=sol.shot_parameter, k=k,
                           zeros=list(sol.radii[1:]), critical_points=list(sol.critical_points),
                           nodal_radii=list(sol.radii), boundary_defect=sol.boundary_defect,
                           residual=sol.residual, classification=_class_for(shot, k),
                           bracket=list(sol.bracket), checks=_checks_list(checks), steps=shot.trajectory.stats)
        return sol.profile, summary, checks

    solver = solve_mixed_dn if command == "solve-mixed-dn" else solve_mixed_nd
    sol = solver(spec, controls)
    shot = sol.shot
    checks = [sol.residual_report, check_convex_increasing_exclusion(sol.profile, spec)]
    b = domain.b
    key = "alpha" if command == "solve-mixed-dn" else "gamma"
    if command == "solve-mixed-dn":
        checks += _first_arch_checks(shot, work, a, abs(sol.shot_parameter))
        zeros, crit = [a], [b]
    else:
        zeros, crit = [b], [a]
    summary = _summary(cfg, command, spec, controls, **{key: sol.shot_parameter}, boundary=sol.boundary,
                       zeros=zeros, critical_points=crit, nodal_radii=[a, b],
                       boundary_defect=max(sol.dirichlet_defect, sol.neumann_defect),
                       dirichlet_defect=sol.dirichlet_defect, neumann_defect=sol.neumann_defect,
                       residual=sol.residual, classification=_class_for(shot, 0 if key == "alpha" else 1),
                       bracket=list(sol.bracket), checks=_checks_list(checks), steps=shot.trajectory.stats)
    return sol.profile, summary, checks


def _shoot_one(cfg, parameter):
    """Run one shot described by ``cfg``; returns ``(spec, shot)``."""
    start = cfg.get("start", "annulus")
    spec = _spec(cfg)
    max_zeros = int(cfg.get("max_zeros", cfg.get("k", 1)))
    controls = _controls(cfg, SolverControls()).with_(max_zeros=max_zeros)
    if start == "annulus":
        return spec, shoot_annulus(spec, float(_need(cfg, "a")), parameter, controls)
    if start == "neumann":
        return spec, shoot_neumann(spec, float(_need(cfg, "a")), parameter, controls)
    if start == "ball":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return spec, shoot_ball(spec, parameter, controls)
    raise ConfigError(f"unknown start {start!r}")


def _shoot(cfg):
    parameter = float(_need(cfg, "parameter"))
    spec, shot = _shoot_one(cfg, parameter)
    controls = _controls(cfg, SolverControls()).with_(max_zeros=int(cfg.get("max_zeros", cfg.get("k", 1))))
    checks = [check_convex_increasing_exclusion(shot.profile, spec)]
    if cfg.get("start", "annulus") == "annulus" and parameter > 0:
        checks += _first_arch_checks(shot, spec, float(cfg["a"]), parameter)
    key = "alpha" if cfg.get("start", "annulus") == "annulus" else "gamma"
    summary = _summary(cfg, "shoot", spec, controls, **{key: parameter}, zeros=list(shot.zeros),
                       critical_points=list(shot.critical_points), slopes_at_zeros=list(shot.slopes_at_zeros),
                       values_at_critical=list(shot.values_at_critical),
                       classification=shot.classification.value, checks=_checks_list(checks),
                       warnings=list(shot.warnings), steps=shot.trajectory.stats)
    return shot.profile, summary, shot.classification


def _sweep_row(cfg, parameter):
    try:
        _, shot = _shoot_one(cfg, parameter)
    except PucciRadialError as exc:
        return (parameter, math.nan, math.nan, math.nan, math.nan, type(exc).__name__)
    tau = shot.critical_points[0] if shot.critical_points else math.inf
    u_tau = shot.values_at_critical[0] if shot.critical_points else math.nan
    du_rho = shot.slopes_at_zeros[0] if shot.zeros else math.nan
    return (parameter, tau, shot.rho, u_tau, du_rho, shot.classification.value)


def _threads():
    raw = os.environ.get("PUCCI_RADIAL_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"PUCCI_RADIAL_THREADS must be an integer, got {raw!r}") from None


def _sweep(cfg):
    raw = _need(cfg, "values")
    try:
        values = [float(v) for v in (raw.split(",") if isinstance(raw, str) else raw)]
    except ValueError:
        raise ConfigError(f"bad sweep values {raw!r}") from None
    if not values:
        raise ConfigError("sweep needs at least one value")
    values = sorted(set(values))
    spec = _spec(cfg)
    workers = min(_threads(), len(values))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, [cfg] * len(values), values))
    else:
        rows = [_sweep_row(cfg, v) for v in values]
    rows.sort(key=lambda row: row[0])

    out = Path(cfg.get("out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    lines = ["parameter,tau,rho,u_tau,du_rho,classification"]
    for row in rows:
        lines.append(",".join([f"{x:.16e}" for x in row[:5]] + [row[5]]))
    (out / SWEEP_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    controls = _controls(cfg, SolverControls())
    summary = _summary(cfg, "sweep", spec, controls, table=SWEEP_NAME,
                       parameters=[r[0] for r in rows], tau=[r[1] for r in rows], rho=[r[2] for r in rows],
                       u_tau=[r[3] for r in rows], classification="Finite" if all(
                           r[5] == "Finite" for r in rows) else "Undetermined",
                       row_classifications=[r[5] for r in rows], checks=[])
    if "json" in _formats(cfg):
        write_json(out / SUMMARY_NAME, summary)
    return summary


def _verify(cfg):
    src = Path(_need(cfg, "from"))
    try:
        summary = json.loads((src / SUMMARY_NAME).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {src / SUMMARY_NAME}: {exc}") from None
    command = summary.get("command")
    if command not in COMMANDS[:5]:
        raise ConfigError(f"verify supports solver outputs only, got command {command!r}")
    prior = dict(summary["spec"])
    prior["out"] = str(src)
    profile, fresh, checks = _solve(command, prior)

    reports = list(checks)
    csv_path = src / PROFILE_NAME
    if csv_path.exists():
        r, u, du = read_profile_csv(csv_path)
        u2, du2 = profile(r)
        scale = max(float(np.max(np.abs(u2))), 1e-300)
        dscale = max(float(np.max(np.abs(du2))), 1e-300)
        dev = max(float(np.max(np.abs(u - u2))) / scale, float(np.max(np.abs(du - du2))) / dscale)
        reports.append(CheckReport.from_margin("profile_reproduction", -dev, None, 1e-12, rows=int(r.size)))
    key = "alpha" if "alpha" in summary else "gamma"
    same = fresh.get(key) == summary.get(key)
    reports.append(CheckReport("shooting_parameter_reproduction", bool(same), 0.0 if same else -1.0, None, 0.0,
                               {"recorded": summary.get(key), "recomputed": fresh.get(key)}))
    report = {"command": "verify", "source": str(src), "verified_command": command,
              "passed": all(r.passed for r in reports), "checks": _checks_list(reports)}
    out = Path(cfg.get("out", src))
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / REPORT_NAME, report)
    return report


def _fail(code, exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def run(argv=None) -> int:
    """Parse ``argv`` and execute; returns the process exit code."""
    try:
        args = vars(build_parser().parse_args(argv))
        command = args.get("command")
        if command is None:
            raise ConfigError("a subcommand is required: " + ", ".join(COMMANDS))
        cfg = load_config(args)

        if command == "exponents":
            ex = exponents(_params(cfg)).as_dict()
            sys.stdout.write(json.dumps(ex) + "\n")
            if "out" in cfg:
                out = Path(cfg["out"])
                out.mkdir(parents=True, exist_ok=True)
                write_json(out / SUMMARY_NAME, {"command": command, "spec": cfg, "exponents": ex})
            return EXIT_OK
        if command == "verify":
            report = _verify(cfg)
            sys.stdout.write(json.dumps({"status": "ok" if report["passed"] else "failed",
                                         "report": str(Path(cfg.get("out", cfg["from"])) / REPORT_NAME)}) + "\n")
            return EXIT_OK if report["passed"] else EXIT_FAILED
        if command == "sweep":
            _sweep(cfg)
            sys.stdout.write(json.dumps({"status": "ok", "out": str(cfg.get("out", "out"))}) + "\n")
            return EXIT_OK
        if command == "shoot":
            profile, summary, cls = _shoot(cfg)
            files = _emit(cfg, profile, summary)
            if cls is Classification.UNDETERMINED:
                return _fail(EXIT_UNDETERMINED, PucciRadialError(
                    f"shot classification Undetermined; artifacts in {files}"))
            sys.stdout.write(json.dumps({"status": "ok", "classification": cls.value, "files": files}) + "\n")
            return EXIT_OK

        profile, summary, _ = _solve(command, cfg)
        files = _emit(cfg, profile, summary)
        sys.stdout.write(json.dumps({"status": "ok", "files": files}) + "\n")
        return EXIT_OK
    except (NoBracketError, NoRootInComponentError, NoKthZeroError) as exc:
        return _fail(EXIT_NO_ROOT, exc)
    except (InvalidArgumentError, ValueError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except PucciRadialError as exc:
        return _fail(EXIT_FAILED, exc)


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
