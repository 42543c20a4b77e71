# commands/plot.py
import argparse

from commands.classify import render
from commands.common import add_box_option, add_output_options, engine_options


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "plot",
        parents=[engine_options()],
        help="draw the (e,h)-graph as SVG or as an ASCII grid",
    )
    parser.add_argument("expr")
    add_box_option(parser)
    add_output_options(parser, ("svg", "ascii"), default="svg")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    return render(args)
