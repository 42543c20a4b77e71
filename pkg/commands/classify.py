# commands/classify.py
import argparse

from commands.common import (
    add_box_option,
    add_output_options,
    cli_config,
    engine_options,
    load_knot,
    resolve_box,
    write_output,
)
from services import reporting
from services.geography import build_report


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "classify",
        parents=[engine_options()],
        help="classify every (e,h) point of a box",
    )
    parser.add_argument("expr")
    add_box_option(parser)
    add_output_options(parser, ("json", "ascii", "svg"), default="json")
    parser.set_defaults(handler=handle)


def render(args: argparse.Namespace):
    """Shared by `classify` and `plot`: build the report and emit it in the requested format."""
    config = cli_config(args)
    registry, knot = load_knot(args.expr, config)
    bundle, report = build_report(knot, config.flags, registry)
    box = resolve_box(bundle, config)
    if config.format == "ascii":
        data = reporting.emit_ascii(bundle, report, box)
    elif config.format == "svg":
        data = reporting.emit_svg(bundle, report, box)
    else:
        data = reporting.emit_json(bundle, report, box, registry.digest)
    write_output(data, config.output)
    return 0


def handle(args: argparse.Namespace) -> int:
    return render(args)
