# commands/invariants.py
import argparse
import json

from commands.common import cli_config, engine_options, load_knot, write_output
from schemas.registry_schema import render_rational
from services import invariants
from services.knot_expr import to_text


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "invariants",
        parents=[engine_options()],
        help="print sigma, Upsilon(1), Arf, det, delta and genus bounds",
    )
    parser.add_argument("expr", help='knot expression, e.g. "2*T(5,9) # -3*T(5,13)"')
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = cli_config(args)
    registry, knot = load_knot(args.expr, config)
    bundle = invariants.bundle(knot, config.flags, registry)

    delta = "unknown" if bundle.delta is None else render_rational(bundle.delta)
    if config.format == "json":
        payload = {
            "knot": to_text(bundle.knot),
            "sigma": bundle.sigma,
            "upsilon1": render_rational(bundle.upsilon1),
            "arf": bundle.arf,
            "det": bundle.det,
            "delta": None if bundle.delta is None else render_rational(bundle.delta),
            "g4_upper": bundle.g4_upper,
            "gamma4_upper": bundle.gamma4_upper,
            "extrapolated": bundle.extrapolated,
        }
        write_output(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n", None)
        return 0

    lines = [
        f"sigma: {bundle.sigma}, upsilon1: {render_rational(bundle.upsilon1)}, "
        f"arf: {bundle.arf}, det: {bundle.det}",
        f"knot: {to_text(bundle.knot)}",
        f"delta: {delta}",
        f"g4_upper: {bundle.g4_upper}",
        f"gamma4_upper: {bundle.gamma4_upper} ({bundle.gamma4_upper_certificate})",
        "apexes: " + " ".join(str(apex.point) for apex in bundle.apexes),
    ]
    if bundle.extrapolated:
        lines.append("extrapolated: yes (Upsilon base beyond the anchored range)")
    write_output("\n".join(lines) + "\n", None)
    return 0
