"""Command line front end.

Every subcommand reads a JSON config, runs one analysis, and writes CSV
(default) or JSON to stdout or --out. Exit codes: 0 success, 2 invalid
configuration or model, 3 unreadable or unparseable input, 4 numerical
failure during analysis.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import analysis, economics
from .config import ConfigError, load_config
from .mmap import EVENT_FAMILIES, assemble
from .optimize import optimize_vacation, write_trace_csv
from .simulate import simulate


def _fmt(x):
    return repr(float(x))


def _parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("--t-grid expects start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ConfigError("--t-grid step must be positive")
    if stop < start:
        raise ConfigError("--t-grid stop must not precede start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _times_from(args):
    if args.t_grid is not None:
        return _parse_grid(args.t_grid)
    if args.times is not None:
        try:
            times = [float(t) for t in args.times.split(",") if t.strip()]
        except ValueError:
            raise ConfigError("--times expects comma-separated numbers")
        if not times:
            raise ConfigError("--times is empty")
        return times
    raise ConfigError("need --t-grid or --times")


def _emit(args, header, rows, jdata):
    if args.format == "json":
        text = json.dumps(jdata, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _need_economics(bundle):
    if bundle.economics is None:
        raise ConfigError("config has no economics section")
    return bundle.economics


def _cmd_validate(args):
    bundle = load_config(args.config)
    model = assemble(bundle.spec)
    sys.stdout.write(f"valid: variant={bundle.spec.variant} "
                     f"states={model.dim} "
                     f"macro_states={len(model.layout.macro_states)}\n")
    return 0


def _cmd_stationary(args):
    bundle = load_config(args.config)
    model = assemble(bundle.spec)
    res = analysis.stationary(model)
    rows = [["mass_" + lab, _fmt(res.macro_masses[lab])]
            for lab in model.layout.labels]
    rows.append(["availability", _fmt(res.availability)])
    jdata = {"masses": {lab: res.macro_masses[lab]
                        for lab in model.layout.labels},
             "availability": res.availability, "rates": {}}
    for fam in sorted(EVENT_FAMILIES):
        if fam == "PM" and "PM" not in model.by_event:
            continue
        rate = res.intensity(model, fam)
        rows.append(["rate_" + fam, _fmt(rate)])
        jdata["rates"][fam] = rate
    if bundle.economics is not None:
        value = economics.stationary_net_reward(model, bundle.economics, res)
        rows.append(["net_reward", _fmt(value)])
        jdata["net_reward"] = value
    return _emit(args, ["quantity", "value"], rows, jdata)


def _cmd_transient(args):
    bundle = load_config(args.config)
    model = assemble(bundle.spec)
    sw = analysis.sweep(model, _times_from(args))
    labels = model.layout.labels
    header = ["t", "availability"] + ["mass_" + lab for lab in labels]
    rows, jlist = [], []
    for t, dist in zip(sw.times, sw.dists):
        masses = model.layout.masses(dist)
        avail = analysis.availability(model, dist)
        rows.append([_fmt(t), _fmt(avail)] + [_fmt(m) for m in masses])
        jlist.append({"t": float(t), "availability": avail,
                      "masses": {lab: float(m)
                                 for lab, m in zip(labels, masses)}})
    return _emit(args, header, rows, jlist)


def _events_from(args, model):
    if args.events is None:
        return [f for f in EVENT_FAMILIES
                if f != "PM" or "PM" in model.by_event]
    tokens = [tok for tok in args.events.split("+") if tok]
    if not tokens:
        raise ConfigError("--events is empty")
    for tok in tokens:
        if tok not in EVENT_FAMILIES and tok not in model.by_event:
            raise ConfigError(f"unknown event or family {tok!r}")
    return tokens


def _cmd_measures(args):
    bundle = load_config(args.config)
    model = assemble(bundle.spec)
    tokens = _events_from(args, model)
    times = np.asarray(_times_from(args), float)
    sw = analysis.sweep(model, times)
    avail = sw.availability()
    surv = analysis.reliability(model, times)
    rocof_rf = sw.intensity("RF")
    rocof_nrf = sw.intensity("NRF")
    counts = {tok: sw.mean_counts(tok) for tok in tokens}
    header = (["t", "availability", "reliability", "rocof_rf", "rocof_nrf"]
              + [f"mn_{tok.lower()}" for tok in tokens])
    rows, jlist = [], []
    for i, t in enumerate(sw.times):
        rows.append([_fmt(t), _fmt(avail[i]), _fmt(surv[i]),
                     _fmt(rocof_rf[i]), _fmt(rocof_nrf[i])]
                    + [_fmt(counts[tok][i]) for tok in tokens])
        jlist.append({"t": float(t), "availability": float(avail[i]),
                      "reliability": float(surv[i]),
                      "rocof_rf": float(rocof_rf[i]),
                      "rocof_nrf": float(rocof_nrf[i]),
                      "mean_counts": {tok: float(counts[tok][i])
                                      for tok in tokens}})
    return _emit(args, header, rows, jlist)


def _cmd_profit_curve(args):
    bundle = load_config(args.config)
    econ = _need_economics(bundle)
    model = assemble(bundle.spec)
    times, gross, totals, averages = economics.profit_curve(
        model, econ, _times_from(args))
    rows, jlist = [], []
    for t, phi, psi, gamma in zip(times, gross, totals, averages):
        rows.append([_fmt(t), _fmt(phi), _fmt(psi),
                     "" if np.isnan(gamma) else _fmt(gamma)])
        jlist.append({"t": float(t), "phi": float(phi), "psi": float(psi),
                      "gamma": None if np.isnan(gamma) else float(gamma)})
    return _emit(args, ["t", "phi", "psi", "gamma"], rows, jlist)


def _cmd_optimize(args):
    bundle = load_config(args.config)
    econ = _need_economics(bundle)
    lo, hi = (float(p) for p in args.bounds.split(":"))
    res = optimize_vacation(bundle.spec, econ, bounds=(lo, hi),
                            grid_size=args.grid)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            write_trace_csv(res, fh)
    rows = [["rate1", _fmt(res.rates[0])],
            ["rate2", _fmt(res.rates[1])],
            ["value", _fmt(res.value)],
            ["evaluations", str(res.evaluations)],
            ["converged", str(res.converged).lower()]]
    jdata = {"rates": [res.rates[0], res.rates[1]], "value": res.value,
             "evaluations": res.evaluations, "converged": res.converged}
    return _emit(args, ["quantity", "value"], rows, jdata)


def _cmd_simulate(args):
    bundle = load_config(args.config)
    est = simulate(bundle.spec, args.horizon, warmup=args.warmup,
                   batches=args.batches, replications=args.replications,
                   seed=args.seed)
    rows = [["availability", _fmt(est.availability[0]),
             _fmt(est.availability[1])]]
    jdata = {"availability": {"estimate": est.availability[0],
                              "std_error": est.availability[1]},
             "occupancy": {}, "rates": {}}
    for lab, (mean, se) in est.occupancy.items():
        rows.append(["occupancy_" + lab, _fmt(mean), _fmt(se)])
        jdata["occupancy"][lab] = {"estimate": mean, "std_error": se}
    for fam in sorted(est.rates):
        mean, se = est.rates[fam]
        rows.append(["rate_" + fam.lower(), _fmt(mean), _fmt(se)])
        jdata["rates"][fam] = {"estimate": mean, "std_error": se}
    return _emit(args, ["quantity", "estimate", "std_error"], rows, jdata)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vacrel",
        description="Reliability and profit analysis of a maintained "
                    "degrading unit attended by a vacationing repairperson.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, times=False):
        p.add_argument("config", help="path to a JSON system config")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if times:
            p.add_argument("--t-grid", dest="t_grid", metavar="START:STOP:STEP")
            p.add_argument("--times", help="comma-separated time points")

    p = sub.add_parser("validate", help="check a config and assemble it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("stationary", help="long-run masses, availability, "
                                          "event rates")
    common(p)
    p.set_defaults(func=_cmd_stationary)

    p = sub.add_parser("transient", help="distribution over a time grid")
    common(p, times=True)
    p.set_defaults(func=_cmd_transient)

    p = sub.add_parser("measures", help="event intensities and mean counts "
                                        "over a time grid")
    common(p, times=True)
    p.add_argument("--events", help="families or labels joined by +, e.g. "
                                    "RF+CR (default: all families)")
    p.set_defaults(func=_cmd_measures)

    p = sub.add_parser("profit-curve", help="accumulated and time-averaged "
                                            "net reward over a grid")
    common(p, times=True)
    p.set_defaults(func=_cmd_profit_curve)

    p = sub.add_parser("optimize", help="search vacation stage rates for "
                                        "best long-run net reward")
    common(p)
    p.add_argument("--bounds", default="0.5:50", metavar="LO:HI")
    p.add_argument("--grid", type=int, default=3,
                   help="multistart grid points per axis")
    p.add_argument("--trace-out", dest="trace_out",
                   help="also write the evaluation trace as CSV here")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("simulate", help="discrete-event estimates with "
                                        "standard errors")
    common(p)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--warmup", type=float, default=1000.0)
    p.add_argument("--batches", type=int, default=50)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except np.linalg.LinAlgError as exc:
        sys.stderr.write(f"error: numerical failure: {exc}\n")
        return 4
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except RuntimeError as exc:
        sys.stderr.write(f"error: numerical failure: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
