# commands/verify.py
import argparse

from commands.common import add_box_option, cli_config, engine_options, write_output
from core.exceptions import VerificationFailed
from core.registry import get_registry
from models.models import VerificationRecord
from services.geography import verify_torus_theorem

FAMILIES = {"t2": 2, "t3": 3}


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "verify",
        parents=[engine_options()],
        help="reproduce the T(2,n) / T(3,n) classification theorems",
    )
    parser.add_argument("family", choices=sorted(FAMILIES))
    parser.add_argument("n", type=int)
    add_box_option(parser)
    parser.set_defaults(handler=handle)


def describe(record: VerificationRecord) -> str:
    name = f"T({record.family},{record.n})"
    box = record.box
    lines = [
        f"{name}: {'verified' if record.verified else 'MISMATCH'} "
        f"over e={box.e_min}..{box.e_max}, h<={box.h_max}",
        f"unknown points: {record.unknown_count}",
        f"unknown points in box: {record.box_unknown_count}",
    ]
    if record.expected_unknown_count is not None:
        lines.append(f"expected unknown points: {record.expected_unknown_count}")
    for ray in record.rays:
        lines.append(f"unknown ray: {ray.start} + k*({ray.direction[0]},{ray.direction[1]})")
    if record.family == 2:
        lines.append(f"literal-reading differences: {len(record.literal_diff)}")
    for diff in record.diff:
        lines.append(f"diff {diff.point}: theorem {diff.theorem.value}, engine {diff.engine.value}")
    return "\n".join(lines) + "\n"


def handle(args: argparse.Namespace) -> int:
    config = cli_config(args)
    record = verify_torus_theorem(
        FAMILIES[args.family],
        args.n,
        box=config.box,
        flags=config.flags,
        registry=get_registry(config.registry_path),
    )
    write_output(describe(record), None)
    if not record.verified:
        raise VerificationFailed(
            f"T({record.family},{record.n}): {len(record.diff)} differences from the theorem"
        )
    return 0
