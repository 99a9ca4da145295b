# Command-line front end for the cat-state teleportation simulator.
#
#   python app.py figures --out out/
#   python app.py validate --grid grid.json
#   python app.py branch-table --alpha-sq 10 --theta 1.5708
#   python app.py sweep --alpha-sq 5 10 --theta 0 1.5708 --format json
#
# Exit codes: 0 ok, 1 invariant violation, 2 bad input, 3 io error.

import argparse
import collections
import logging
import math
import os
import sys

import pandas as pd

from catport import (
    CatportError,
    ConfigError,
    SweepConfig,
    branch_table,
    run_sweep,
    run_validation,
    write_figures,
    write_table,
)

CATPORT_OUT = os.environ.get("CATPORT_OUT", "./out")
CATPORT_TAIL = os.environ.get("CATPORT_TAIL", "1e-12")

logger = logging.getLogger("teleport_app")

# most recent records only; worker-process records arrive through the sweep's log queue
MAX_MESSAGES = 10000
messages = collections.deque(maxlen=MAX_MESSAGES)


def log_handler(thread, component, level, message):
    messages.append((thread, component, level, message))


class MessageBuffer(logging.Handler):
    """Forwards every record to log_handler."""

    def emit(self, record):
        log_handler(record.threadName, record.name, record.levelname, record.getMessage())


def configure_logging(verbose=False):
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(isinstance(handler, MessageBuffer) for handler in root.handlers):
        root.addHandler(MessageBuffer())
    if verbose and not any(getattr(handler, "name", None) == "teleport_app.stderr" for handler in root.handlers):
        stream = logging.StreamHandler(sys.stderr)
        stream.set_name("teleport_app.stderr")
        stream.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(stream)


def parse_args(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", "--config", dest="grid", help="JSON file with the sweep config fields")
    common.add_argument("--alpha-sq", dest="alpha_sq", type=float, nargs="+")
    common.add_argument("--theta", type=float, nargs="+")
    common.add_argument("--phi", type=float, nargs="+")
    common.add_argument("--tail", type=float, help="truncation tail bound per mode")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--workers", type=int)
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(description="Teleportation of cat-state information through an unequal-amplitude channel")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("figures", parents=[common], help="write one table per figure")
    commands.add_parser("validate", parents=[common], help="run the invariant checks and the formula comparison")
    commands.add_parser("branch-table", parents=[common], help="photon-counting branches at one point")
    commands.add_parser("sweep", parents=[common], help="write the full sweep table")
    return parser.parse_args(argv)


def environment_defaults():
    try:
        tail = float(CATPORT_TAIL)
    except ValueError as e:
        raise ConfigError(f"CATPORT_TAIL={CATPORT_TAIL!r} is not a number", e)
    return {"outputs": CATPORT_OUT, "truncation_tail": tail}


def build_config(args):
    """Flags override the grid file, which overrides the environment and field defaults."""
    defaults = environment_defaults()
    config = SweepConfig.load(args.grid, defaults) if args.grid else SweepConfig(**defaults)
    config = config.with_overrides(
        alpha_sq_grid=args.alpha_sq,
        theta_grid=args.theta,
        phi_grid=args.phi,
        truncation_tail=args.tail,
        outputs=args.out,
        format=args.format,
        workers=args.workers,
    )
    return config.validate()


def cmd_figures(args, config):
    frame, ledger = run_sweep(config)
    paths = write_figures(frame, config.outputs, config.format)
    print(f"wrote {len(paths)} figure tables to {config.outputs} ({len(ledger.keys())} formula flags)")
    return 0


def cmd_sweep(args, config):
    frame, ledger = run_sweep(config)
    write_table(frame, config.outputs, "sweep", config.format)
    records = ledger.to_records()
    if records:
        write_table(pd.DataFrame(records), config.outputs, "formula_flags", config.format)
    print(f"wrote {len(frame)} rows to {config.outputs}")
    return 0


def cmd_validate(args, config):
    report = run_validation(config)
    for check in report.checks:
        print(f"{'ok    ' if check.passed else 'FAILED'} {check.name:<32} {check.worst:.3e} (tolerance {check.tolerance:.1e})")
    print(f"{len(report.flags)} formula flags; exact average fidelity {report.headline}")
    return 0


def _point(args, config):
    """First grid value when given by flag or grid file, otherwise |alpha|^2 = 10, theta = pi/2, phi = 0."""
    explicit = bool(args.grid)
    alpha_sq = config.alpha_sq_grid[0] if explicit or args.alpha_sq else 10.0
    theta = config.theta_grid[0] if explicit or args.theta else math.pi / 2.0
    phi = config.phi_grid[0] if explicit or args.phi else 0.0
    return alpha_sq, theta, phi


def cmd_branch_table(args, config):
    alpha_sq, theta, phi = _point(args, config)
    table = branch_table(alpha_sq, theta, phi)
    print(table.to_string(index=False))
    write_table(table, config.outputs, "branch_table", config.format)
    return 0


COMMANDS = {
    "figures": cmd_figures,
    "validate": cmd_validate,
    "branch-table": cmd_branch_table,
    "sweep": cmd_sweep,
}


def main(argv=None):
    args = parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = build_config(args)
        return COMMANDS[args.command](args, config)
    except CatportError as e:
        logger.error(e.message)
        print(e.message, file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    try:
        status = main()
    except Exception:
        print("---- LOG MESSAGES ---")
        print(*messages, sep="\n")
        print("----")
        raise
    sys.exit(status)
