"""Command line entry point: ``vlpc <command> [options]``.

Exit status is 0 on success, 2 when an allocation is infeasible and 1 on
any other error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex
from .errors import ConfigError, VlpcError

log = logging.getLogger("vlpc")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2
_PARAM_ALIASES = {"pout": "p_out", "pt": "p_total", "rbar": "rbar"}


def _values(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    common.add_argument("--out", help="CSV output path (default: stdout)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="vlpc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("position-sweep", parents=[common],
                        help="positioning RMSE and root CRLB over a sweep")
    ps.add_argument("--param", choices=ex.POSITIONING_PARAMS)
    ps.add_argument("--values", type=_values)
    ps.add_argument("--trials", type=int)

    al = sub.add_parser("allocate", parents=[common],
                        help="robust allocation with non-robust and equal-power baselines")
    al.add_argument("--pt", type=float, help="total power budget [W]")
    al.add_argument("--rbar", type=float, help="rate target [bit/s]")
    al.add_argument("--pout", type=float, help="outage probability")

    sw = sub.add_parser("sweep", parents=[common], help="robust allocation over a sweep")
    sw.add_argument("--param", choices=sorted(_PARAM_ALIASES))
    sw.add_argument("--values", type=_values)
    sw.add_argument("--pt", type=float)
    sw.add_argument("--rbar", type=float)
    sw.add_argument("--pout", type=float)
    sw.add_argument("--baselines", action="store_true", help="add baseline rows")

    cm = sub.add_parser("crlb-map", parents=[common], help="CRLB over the room floor plan")
    cm.add_argument("--grid", type=int)
    cm.add_argument("--pp", type=float, help="positioning power [W] (default: the cap)")
    return p


def _overrides(args, cfg):
    kw = {}
    for attr, key in (("seed", "seed"), ("trials", "trials"), ("grid", "grid"),
                      ("pt", "p_total"), ("rbar", "rbar"), ("pout", "p_out"), ("pp", "p_p")):
        v = getattr(args, attr, None)
        if v is not None:
            kw[key] = v
    param = getattr(args, "param", None)
    if param is not None:
        kw["sweep_param"] = _PARAM_ALIASES.get(param, param)
    if getattr(args, "values", None) is not None:
        kw["values"] = tuple(args.values)
    cfg = cfg.replace(**kw)
    # re-run validation on the merged settings
    probs = []
    doc = {"trials": cfg.trials, "grid": cfg.grid, "seed": cfg.seed, "p_total": cfg.p_total,
           "rbar": cfg.rbar, "p_out": cfg.p_out}
    if cfg.p_p is not None:
        doc["p_p"] = cfg.p_p
    if cfg.values:
        ex._check_values(list(cfg.values), "experiment.sweep.values", probs)
    ex.experiment_from_dict(doc, probs)
    if probs:
        raise ConfigError(probs)
    return cfg


def _run(args):
    if args.config:
        cfg, scenario = ex.load_config(args.config)
    else:
        cfg, scenario = ex.config_from_dict({})
    cfg = _overrides(args, cfg.replace(kind=args.command))
    out = args.out or cfg.output

    if args.command == "position-sweep":
        rows, cols = ex.run_positioning_sweep(cfg, scenario), ex.POSITIONING_COLUMNS
    elif args.command == "crlb-map":
        rows, cols = ex.run_crlb_map(cfg, scenario), ex.CRLB_MAP_COLUMNS
    elif args.command == "allocate":
        rows = ex.allocate_point(scenario, cfg, cfg.p_total, cfg.rbar, cfg.p_out,
                                 baselines=True)
        cols = ex.ALLOCATION_COLUMNS
    else:
        if cfg.sweep_param not in ex.ALLOCATION_PARAMS:
            raise ConfigError([("experiment.sweep.param", "sweep needs --param pout, pt or rbar")])
        if not cfg.values:
            raise ConfigError([("experiment.sweep.values", "sweep needs --values")])
        rows = ex.run_allocation_sweep(cfg, scenario, baselines=args.baselines)
        cols = ex.ALLOCATION_COLUMNS

    ex.emit_csv(rows, out if out else sys.stdout, cols)
    infeasible = any(r.get("status") == "infeasible" and r.get("design", "robust") == "robust"
                     for r in rows)
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="vlpc: %(message)s")
    logging.captureWarnings(True)
    try:
        return _run(args)
    except ConfigError as exc:
        for path, msg in exc.problems:
            print(f"vlpc: config error: {path or '<root>'}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    except (VlpcError, OSError) as exc:
        print(f"vlpc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
