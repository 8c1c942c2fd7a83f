"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 the point under
``assess``/``simulate`` lies in the failure zone, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import io as pio
from .errors import ConfigError, PushSafeError
from .model import ALPHA_TOL_DEG, OperationPoint, contact_force, sweep_curves
from .planner import build_plan, execute_plan, reference_grid, simulator_evaluator
from .safety import PHI_U_MODES, PUBLISHED_ZONES, Zone, classify, risk, upper_roll_bound, zone_table
from .sim import decimated_trace, run_to_equilibrium

EXIT_OK, EXIT_USAGE, EXIT_FAILURE_ZONE, EXIT_NUMERICAL = 0, 1, 2, 3

PHI_U_CHOICES = ("auto",) + PHI_U_MODES


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _phi_u_mode(mode: str, beta0: float) -> str:
    # auto: the tabulated boundary where one exists, else the computed root
    if mode == "auto":
        return "published" if float(beta0) in PUBLISHED_ZONES else "continuous"
    return mode


def _run_config(args) -> pio.RunConfig:
    cfg = pio.load_config(args.config)
    overrides: dict = {}
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if "." in key:
            section, sub = key.split(".", 1)
            overrides.setdefault(section, {})[sub] = value
        else:
            overrides[key] = value
    if args.C_h is not None:
        overrides.setdefault("limits", {})["C_h"] = args.C_h
    if args.eta is not None:
        overrides.setdefault("limits", {})["eta"] = args.eta
    return pio.config_from_mapping(overrides, cfg) if overrides else cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_assess(args, cfg) -> int:
    op = OperationPoint(args.beta0, args.phi0)
    a = classify(op.beta0, op.phi0, cfg.vehicle, cfg.limits, _phi_u_mode(args.phi_u, op.beta0))
    print(str(a))
    if args.verbose:
        print(f"T_out_N={a.T_out!r} T_safe_N={cfg.limits.T_safe!r} T_max_N={cfg.limits.T_max!r}", file=sys.stderr)
    return EXIT_FAILURE_ZONE if a.zone is Zone.FAILURE else EXIT_OK


def cmd_zones(args, cfg) -> int:
    betas = args.beta0 or list(cfg.betas)
    table = zone_table(betas, cfg.vehicle, cfg.limits)
    _emit(pio.csv_text(pio.ZONE_COLUMNS, pio.zone_rows(table)), args.out)
    for line in pio.zone_deviations(table):
        print(line, file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    rows = sweep_curves(args.beta0 or list(cfg.betas), args.step, cfg.vehicle)
    _emit(pio.csv_text(pio.SWEEP_COLUMNS, pio.sweep_rows(rows, cfg.limits)), args.out)
    return EXIT_OK


def cmd_risk(args, cfg) -> int:
    op = OperationPoint(args.beta0, args.phi0)
    mode = _phi_u_mode(args.phi_u, op.beta0)
    phi_u = upper_roll_bound(op.beta0, cfg.vehicle, cfg.limits, mode)
    lam = risk(op.phi0, phi_u)
    print(f"λ={lam:.2f} phi_u_deg={phi_u:.2f} mode={mode}")
    return EXIT_OK


def cmd_plan(args, cfg) -> int:
    if args.cases:
        try:
            cases = pio.read_cases_csv(Path(args.cases).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read {args.cases}: {exc}") from exc
    else:
        cases = list(cfg.cases) or reference_grid()
    mode = args.phi_u
    if mode == "auto":
        mode = "published" if all(float(b) in PUBLISHED_ZONES for b, _ in cases) else "continuous"
    plan = build_plan(cases, cfg.vehicle, cfg.limits, mode)
    report = None
    if args.execute:
        report = execute_plan(plan, simulator_evaluator(cfg.vehicle, cfg.limits, cfg.sim))
    if args.format == "json":
        _emit(pio.plan_to_json(plan, report), args.out)
    else:
        _emit(pio.plan_to_csv(plan), args.out)
    return EXIT_OK


def cmd_simulate(args, cfg) -> int:
    op = OperationPoint(args.beta0, args.phi0)
    sim_cfg = cfg.sim
    changes = {k: v for k, v in (("seed", args.seed), ("disturbance", args.disturbance),
                                 ("t_max_sim", args.horizon), ("trace_every", args.every)) if v is not None}
    if changes:
        sim_cfg = pio.config_from_mapping({"sim": changes}, cfg).sim
    assessment = classify(op.beta0, op.phi0, cfg.vehicle, cfg.limits, _phi_u_mode(args.phi_u, op.beta0))
    result = run_to_equilibrium(op, cfg.vehicle, cfg.limits, sim_cfg)
    if args.trace:
        trace = decimated_trace(result, sim_cfg.trace_every)
        _emit(pio.trace_csv(trace, op.beta0, op.phi0), args.trace)
    predicted = contact_force(op, cfg.vehicle) if op.alpha0 >= ALPHA_TOL_DEG else math.nan
    summary = {
        "assessment": str(assessment),
        "status": result.status,
        "converged": result.converged,
        "time_s": result.time_s,
        "phi_final_deg": result.phi_final,
        "f_n_N": result.f_n,
        "f_e_pred_N": predicted,
        "f_s_N": result.f_s,
        "T_in_N": result.T_in,
        "T_out_N": result.T_out,
        "saturation_events": result.saturation_events,
    }
    for k, v in summary.items():
        print(f"{k}={pio._fmt(v)}")
    return EXIT_FAILURE_ZONE if assessment.zone is Zone.FAILURE else EXIT_OK


def cmd_validate(args, cfg) -> int:
    log = pio.load_flight_log(args.log, beta0=args.beta0, phi_ref=args.phi_ref)
    report = pio.validate_log(log, cfg.vehicle, args.window)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        for k, v in report.as_dict().items():
            print(f"{k}={pio._fmt(v)}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"config file (JSON or flat key = value); default ${pio.CONFIG_ENV}")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config entry, e.g. vehicle.m_b=2.0 (repeatable)")
    common.add_argument("--C-h", dest="C_h", type=float, help="hover thrust ratio")
    common.add_argument("--eta", type=float, help="safety factor")

    parser = _Parser(prog="pushsafe", description="Contact-force, thrust-saturation and risk analysis "
                                                  "for an aerial manipulator pushing on tilted surfaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def point(p):
        p.add_argument("beta0", type=float, help="surface orientation [deg]")
        p.add_argument("phi0", type=float, help="vehicle roll [deg]")

    def phi_u(p):
        p.add_argument("--phi-u", dest="phi_u", choices=PHI_U_CHOICES, default="auto",
                       help="risk denominator: auto uses the tabulated boundary when available")

    p = sub.add_parser("assess", parents=[common], help="classify an operation point")
    point(p)
    phi_u(p)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("zones", parents=[common], help="zone boundary table (CSV)")
    p.add_argument("beta0", type=float, nargs="*")
    p.add_argument("--out")
    p.set_defaults(func=cmd_zones)

    p = sub.add_parser("sweep", parents=[common], help="force/thrust curves (CSV)")
    p.add_argument("--beta0", type=float, nargs="+")
    p.add_argument("--step", type=float, default=1.0, help="roll step [deg]")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("risk", parents=[common], help="risk level of a critical point")
    point(p)
    phi_u(p)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("plan", parents=[common], help="risk-ordered campaign")
    p.add_argument("cases", nargs="?", help="CSV with beta0_deg,phi0_deg columns")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--execute", action="store_true", help="fly the plan in the simulator (stop on failure)")
    phi_u(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", parents=[common], help="contact simulation to equilibrium")
    point(p)
    phi_u(p)
    p.add_argument("--trace", help="write trace CSV here")
    p.add_argument("--seed", type=int)
    p.add_argument("--disturbance", type=float, help="uniform force/torque noise amplitude [N]")
    p.add_argument("--horizon", type=float, help="simulated time [s]")
    p.add_argument("--every", type=int, help="keep every n-th trace row")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[common], help="compare a flight log with predictions")
    p.add_argument("log")
    p.add_argument("--window", type=float, default=1.0, help="trailing steady-state window [s]")
    p.add_argument("--beta0", type=float, help="override log metadata")
    p.add_argument("--phi-ref", dest="phi_ref", type=float, help="override log metadata")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _run_config(args)
        return args.func(args, cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PushSafeError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
