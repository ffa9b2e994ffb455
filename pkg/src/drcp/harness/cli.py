"""
Command line entry point.

    drcp run CONFIG.json [--out DIR] [--quiet]
    drcp preset NAME [--desk] [--out DIR] [--quiet]
    drcp validate CONFIG.json

Exit codes: 0 success, 2 invalid configuration, 3 run stopped at its
iteration cap or time budget.
"""

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .presets import PRESET_NAMES, get_preset
from .runner import run_config, run_preset

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="drcp", description="Distributed robust convex programming runs.")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run a JSON config")
    r.add_argument("config")
    pr = sub.add_parser("preset", help="run a named preset")
    pr.add_argument("name", choices=PRESET_NAMES)
    pr.add_argument("--desk", action="store_true", help="loosened inner tolerances (minutes, not hours)")
    v = sub.add_parser("validate", help="check a JSON config without running it")
    v.add_argument("config")
    for sp in (r, pr, v):
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--quiet", action="store_true", help="only print errors")
    return p


def _print_result(res, quiet):
    if quiet:
        return
    s = res.summary
    print(", ".join(f"{k}={v}" for k, v in s.items()))
    for f in res.files:
        print(f"  wrote {f}")
    if res.aborted is not None:
        print(f"  stopped: {res.aborted}")


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "validate":
            cfg = load_config(args.config)
            if not args.quiet:
                print(f"{args.config}: ok" + "".join(f"\n  warning: {w}" for w in cfg.warnings))
            return EXIT_OK
        if args.cmd == "run":
            cfg = load_config(args.config)
            results = [run_config(cfg, args.out)]
        else:
            preset = get_preset(args.name, "desk" if args.desk else "paper")
            results = run_preset(preset, args.out or "out")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for res in results:
        _print_result(res, args.quiet)
    if any(r.aborted is not None for r in results):
        return EXIT_CAP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
