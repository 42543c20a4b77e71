import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv

from commands import SUBCOMMANDS
from core.exceptions import KnotGeoError, UsageError
from core.log_config import configure_logging

load_dotenv()


# =========================================
# 🏁 Parser
# =========================================
class KnotGeoParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so `run` owns every exit code."""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> KnotGeoParser:
    parser = KnotGeoParser(
        prog="knotgeo",
        description="Exact (e,h)-geography of nonorientable surfaces bounded by knots.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in SUBCOMMANDS:
        command.register(subparsers)
    return parser


# =========================================
#  ✅ Entry point
# =========================================
def run(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            configure_logging(args.log_level)
        return args.handler(args)
    except KnotGeoError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0


if __name__ == "__main__":
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    sys.exit(run())
