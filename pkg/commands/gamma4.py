# commands/gamma4.py
import argparse

from commands.common import cli_config, engine_options, load_knot, write_output
from services.geography import build_report


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "gamma4",
        parents=[engine_options()],
        help="certified bounds on the nonorientable 4-genus",
    )
    parser.add_argument("expr")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = cli_config(args)
    registry, knot = load_knot(args.expr, config)
    _, report = build_report(knot, config.flags, registry)
    bounds = report.gamma4
    write_output(
        f"gamma4: {bounds.lower} ≤ γ₄ ≤ {bounds.upper}\n"
        f"lower: {bounds.lower_certificate}\n"
        f"upper: {bounds.upper_certificate}\n",
        None,
    )
    return 0
