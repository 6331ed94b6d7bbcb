"""Command-line front end: ``rtd-swipt <subcommand> [flags]``.

Powers accept W, mW, uW, nW or dBm suffixes (bare numbers are watts);
amplitudes are volts. Exit codes: 0 success (an infeasible request is a valid
answer), 1 numeric failure, 2 input error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from .channel import LinkBudget, effective_amplitude_cap, large_scale_gain
from .distributions import DEFAULT_GRID
from .eh_fitting import detect_breakpoints, fit_model, read_transfer_csv
from .eh_model import load_model, save_model, table_i_model
from .errors import BracketError, FitError, InconsistencyError, ResolutionError
from .rate_power import (
    BASELINE_HEADER,
    MONTE_CARLO_HEADER,
    REGION_HEADER,
    ProblemInstance,
    check_feasibility,
    feasibility_witness,
    monte_carlo_region,
    solve_rate,
    sweep_baseline,
    sweep_region,
)
from .units import parse_frequency, parse_gain, parse_length, parse_power, parse_voltage

NUMERIC_FAILURES = (BracketError, InconsistencyError, ResolutionError, FitError, FloatingPointError)


class InputError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else repr(x))
    return str(x)


def _unit_arg(parser):
    def conv(text):
        try:
            return parser(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    conv.__name__ = parser.__name__.replace("parse_", "")
    return conv


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


power = _unit_arg(parse_power)
voltage = _unit_arg(parse_voltage)


def _power_list(text):
    return [power(t) for t in text.split(",") if t.strip()]


# shared flag groups -------------------------------------------------------


def _common_parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--model", type=Path, help="EH model JSON (default: built-in Table I RTD model)")
    g.add_argument("--output", type=Path, help="output file (default: stdout)")
    g.add_argument("--seed", type=_seed, default=0, help="unsigned integer seed (default 0)")
    g.add_argument("--grid-size", type=_positive_int, default=DEFAULT_GRID, help="pdf grid cells (default 4001)")
    return p


def _channel_parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("channel")
    amp = g.add_mutually_exclusive_group()
    amp.add_argument("--abar", type=voltage, help="amplitude cap A_bar in V, used as given")
    amp.add_argument("--A", dest="A", type=voltage, default=1.0, help="peak amplitude A in V, capped at sqrt(rho_max)/|h| (default 1 V)")
    g.add_argument("--h-mag", type=float, help="channel amplitude gain |h|; overrides the link budget")
    g.add_argument("--gain-tx", type=_unit_arg(parse_gain), default=100.0, help="TX antenna gain, linear or dB (default 100)")
    g.add_argument("--gain-rx", type=_unit_arg(parse_gain), default=100.0, help="RX antenna gain, linear or dB (default 100)")
    g.add_argument("--fc", type=_unit_arg(parse_frequency), default=100e9, help="carrier frequency, Hz/GHz/THz (default 100GHz)")
    g.add_argument("--distance", type=_unit_arg(parse_length), default=0.3, help="link distance, m/cm/mm (default 0.3 m)")
    g.add_argument("--sigma2", type=power, default=parse_power("-50dBm"), help="noise variance at the output, W/mW/dBm (default -50dBm)")
    return p


def _link_budget(args, rician_k=1.0):
    return LinkBudget(args.gain_tx, args.gain_rx, args.fc, args.distance, rician_k=rician_k)


def _resolve_channel(args, model):
    """(a_bar, |h|) from the channel flags."""
    h = args.h_mag if args.h_mag is not None else large_scale_gain(_link_budget(args))
    if not h > 0:
        raise InputError("--h-mag must be positive")
    if args.abar is not None:
        if (h * args.abar) ** 2 > model.rho_max_w:
            raise InputError(f"--abar {args.abar} V drives the receiver beyond rho_max; use --A to cap it")
        return args.abar, h
    return effective_amplitude_cap(args.A, h, model.rho_max_w), h


def _load(args):
    return load_model(args.model) if args.model is not None else table_i_model()


def _emit(args, text: str):
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)


def _csv(header, rows) -> str:
    return header + "\n" + "".join(",".join(_fmt(v) for v in r) + "\n" for r in rows)


# subcommands -------------------------------------------------------------


def cmd_ehfit(args) -> int:
    if args.output is None:
        raise InputError("ehfit needs --output for the model file")
    rho, p = read_transfer_csv(args.input)
    if rho.size == 0:
        raise InputError(f"{args.input}: no data rows")
    rho_max = args.rho_max if args.rho_max is not None else float(rho.max())
    if args.breakpoints == "auto":
        bps = [b for b in detect_breakpoints(rho, p) if 0 < b < rho_max]
    else:
        bps = _power_list(args.breakpoints)
    try:
        report = fit_model(rho, bps, rho_max, p_h=p, rho_unit=args.rho_unit, seed=args.seed, restarts=args.restarts)
    except FitError as exc:
        if exc.best is not None:
            print(f"rmse_W={_fmt(exc.best.rmse)}", file=sys.stderr)
        raise
    save_model(report.model, args.output)
    if args.report is not None:
        report.to_csv(args.report)
    print(f"segments={report.model.n_segments}")
    print("breakpoints_W=" + ",".join(_fmt(b) for b in bps))
    print(f"rmse_W={_fmt(report.rmse)}")
    print(f"evaluations={report.iterations}")
    return 0


def cmd_eheval(args) -> int:
    model = _load(args)
    if args.rho is not None:
        rho = np.asarray(_power_list(args.rho))
    else:
        rho = np.linspace(0.0, model.rho_max_w, args.points)
    _emit(args, _csv("rho_W,psi_W", zip(rho.tolist(), model.psi(rho).tolist())))
    return 0


def _instance(args, model):
    a_bar, h = _resolve_channel(args, model)
    return ProblemInstance(a_bar, h, args.sigma2, args.preq, model)


def cmd_feasible(args) -> int:
    model = _load(args)
    inst = _instance(args, model)
    feas = check_feasibility(inst)
    lines = {
        "feasible": str(feas.feasible).lower(),
        "p_max_bar": feas.p_max_bar,
        "p_req_bar": inst.p_req_bar,
        "a_bar": inst.a_bar,
        "h_mag": inst.h_mag,
    }
    if feas.feasible:
        lines["witness_s0"] = feasibility_witness(inst)
    _emit(args, "".join(f"{k}={_fmt(v)}\n" for k, v in lines.items()))
    return 0


def cmd_rate(args) -> int:
    model = _load(args)
    inst = _instance(args, model)
    sol = solve_rate(inst, args.grid_size, with_pdfs=not args.no_pdfs)
    d = {**sol.as_dict(), "a_bar": inst.a_bar, "h_mag": inst.h_mag, "sigma2": inst.sigma2}
    _emit(args, "".join(f"{k}={_fmt(v)}\n" for k, v in d.items()))
    return 0


def cmd_region(args) -> int:
    model = _load(args)
    a_bar, h = _resolve_channel(args, model)
    rows = sweep_region(a_bar, h, args.sigma2, model, args.points, args.grid_size, with_mi=not args.no_mi)
    _emit(args, _csv(REGION_HEADER, ((r.p_req, r.j_star, r.i_exact, r.mu2, r.regime) for r in rows)))
    return 0


def cmd_baseline(args) -> int:
    model = _load(args)
    a_bar, h = _resolve_channel(args, model)
    if args.sigma_s is not None:
        sig = [voltage(t) for t in args.sigma_s.split(",") if t.strip()]
    else:
        sig = np.geomspace(args.sigma_min * a_bar, args.sigma_max * a_bar, args.n_sigma).tolist()
    rows = sweep_baseline(a_bar, h, args.sigma2, model, sig, args.grid_size, args.samples)
    _emit(args, _csv(BASELINE_HEADER, ((r.sigma_s, r.p_harv, r.i_exact, r.j_epi) for r in rows)))
    return 0


def cmd_montecarlo(args) -> int:
    model = _load(args)
    if args.abar is not None and args.mode != "fixed-abar":
        raise InputError("--abar is only meaningful with --mode fixed-abar; use --A")
    lb = _link_budget(args, args.rician_k)
    A = args.abar if args.abar is not None else args.A
    rows = monte_carlo_region(
        lb,
        A,
        args.sigma2,
        model,
        n_real=args.n_real,
        seed=args.seed,
        mode=args.mode,
        n_points=args.points,
        grid_size=args.grid_size,
        with_mi=not args.no_mi,
        workers=args.workers,
    )
    body = ((r.p_req, r.j_star, r.i_exact, r.mu2, r.regime, r.n_realizations, r.seed) for r in rows)
    _emit(args, _csv(MONTE_CARLO_HEADER, body))
    return 0


def cmd_export_pdf(args) -> int:
    model = _load(args)
    inst = _instance(args, model)
    sol = solve_rate(inst, args.grid_size)
    if sol.regime == "infeasible":
        print("regime=infeasible", file=sys.stderr)
        return 0
    pdf = sol.fx if args.which == "x" else sol.fs
    _emit(args, _csv(f"{args.which}_V,density", zip(pdf.centers.tolist(), pdf.density.tolist())))
    return 0


# parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common, channel = _common_parent(), _channel_parent()
    top = argparse.ArgumentParser(prog="rtd-swipt", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True, metavar="subcommand")

    p = sub.add_parser("ehfit", parents=[common], help="fit the piecewise logistic EH model to rho,p_h CSV data (W)")
    p.add_argument("input", type=Path, help="CSV with header rho,p_h (both in W)")
    p.add_argument("--breakpoints", default="auto", help="'auto' or comma list of powers, e.g. 1.8mW")
    p.add_argument("--rho-max", type=power, help="breakdown power rho_max (default: largest rho in the data)")
    p.add_argument("--rho-unit", choices=("W", "mW"), default="mW", help="unit the fitted parameters refer to")
    p.add_argument("--restarts", type=_positive_int, default=16, help="Nelder-Mead restarts per segment")
    p.add_argument("--report", type=Path, help="write per-segment RMSE (W) CSV here")
    p.set_defaults(func=cmd_ehfit)

    p = sub.add_parser("eheval", parents=[common], help="evaluate psi(rho); CSV rho_W,psi_W")
    p.add_argument("--rho", help="comma list of received powers (W/mW/dBm)")
    p.add_argument("--points", type=_positive_int, default=201, help="uniform grid on [0, rho_max] if --rho is absent")
    p.set_defaults(func=cmd_eheval)

    p = sub.add_parser("feasible", parents=[common, channel], help="check P_req <= P_max; prints key=value")
    p.add_argument("--preq", type=power, required=True, help="required average harvested power (W/mW/dBm)")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("rate", parents=[common, channel], help="achievable rate J* (nats); prints key=value")
    p.add_argument("--preq", type=power, required=True, help="required average harvested power (W/mW/dBm)")
    p.add_argument("--no-pdfs", action="store_true", help="skip building pdfs (no p_harv_realized)")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("region", parents=[common, channel], help="rate-power boundary CSV (powers in W, rates in nats)")
    p.add_argument("--points", type=_positive_int, default=50, help="P_req levels on [0, P_max)")
    p.add_argument("--no-mi", action="store_true", help="skip the exact mutual information column")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("baseline", parents=[common, channel], help="truncated-Gaussian baseline CSV")
    p.add_argument("--sigma-s", help="comma list of symbol standard deviations in V")
    p.add_argument("--n-sigma", type=_positive_int, default=20, help="number of sigma_s values if --sigma-s is absent")
    p.add_argument("--sigma-min", type=float, default=0.01, help="smallest sigma_s as a fraction of A_bar")
    p.add_argument("--sigma-max", type=float, default=2.0, help="largest sigma_s as a fraction of A_bar")
    p.add_argument("--samples", type=_positive_int, default=200_000, help="pushforward samples")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("montecarlo", parents=[common, channel], help="fading-averaged region CSV")
    p.add_argument("--n-real", type=_positive_int, default=1000, help="channel realizations")
    p.add_argument("--mode", choices=("relative", "fixed-abar"), default="relative")
    p.add_argument("--rician-k", type=float, default=1.0, help="Rician factor K (linear)")
    p.add_argument("--points", type=_positive_int, default=20, help="relative power levels")
    p.add_argument("--workers", type=_positive_int, default=1, help="worker processes")
    p.add_argument("--no-mi", action="store_true", help="skip the exact mutual information column")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("export-pdf", parents=[common, channel], help="optimal output (x) or transmit (s) pdf CSV")
    p.add_argument("--preq", type=power, required=True, help="required average harvested power (W/mW/dBm)")
    p.add_argument("--which", choices=("x", "s"), default="x")
    p.set_defaults(func=cmd_export_pdf)
    return top


_NEGATIVE_VALUE = re.compile(r"-(\d|\.\d)")


def _attach_negative_values(argv):
    """Rewrite '--sigma2 -50dBm' as '--sigma2=-50dBm'; argparse would read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NUMERIC_FAILURES as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
