# commands/common.py
import argparse
import sys
from pathlib import Path
from typing import Optional, Tuple, Union

from loguru import logger

from core.config import settings
from core.exceptions import UsageError
from core.registry import KnotRegistry, get_registry
from models.models import Box, EngineFlags, FrozenModel, InvariantBundle, KnotExpr
from services.geography import standard_box
from services.knot_expr import parse


class CliConfig(FrozenModel):
    """Everything a subcommand needs besides its positional arguments."""

    registry_path: Optional[Path] = None
    box: Optional[Box] = None
    format: str = "json"
    output: Optional[Path] = None
    flags: EngineFlags = EngineFlags()


# =========================================
# 🧰 Shared options
# =========================================
def engine_options() -> argparse.ArgumentParser:
    options = argparse.ArgumentParser(add_help=False)
    options.add_argument("--registry", type=Path, help="registry file merged over the shipped one")
    options.add_argument(
        "--no-mirror-delta",
        action="store_true",
        help="disable the mirrored (left-arm) delta-line rule",
    )
    options.add_argument(
        "--allow-extrapolated-upsilon-base",
        action="store_true",
        help="allow Upsilon(1) of T(a,a+1) for a >= 6 (marks results as extrapolated)",
    )
    options.add_argument("--log-level", default=None, help="loguru level for diagnostics on stderr")
    return options


def add_box_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--box",
        nargs=3,
        type=int,
        metavar=("E_MIN", "E_MAX", "H_MAX"),
        help="classification window (default: derived from the knot)",
    )


def add_output_options(parser: argparse.ArgumentParser, formats: Tuple[str, ...], default: str) -> None:
    parser.add_argument("--format", choices=formats, default=default)
    parser.add_argument("-o", "--output", type=Path, help="write to a file instead of stdout")


def cli_config(args: argparse.Namespace) -> CliConfig:
    box = None
    if getattr(args, "box", None):
        e_min, e_max, h_max = args.box
        box = Box(e_min=e_min, e_max=e_max, h_max=h_max)
        if box.is_empty:
            raise UsageError(f"--box {e_min} {e_max} {h_max} is empty; need E_MIN <= E_MAX and H_MAX >= 1")
    return CliConfig(
        registry_path=args.registry,
        box=box,
        format=getattr(args, "format", None) or "text",
        output=getattr(args, "output", None),
        flags=EngineFlags(
            mirror_delta=settings.MIRROR_DELTA and not args.no_mirror_delta,
            allow_extrapolated_upsilon=(
                settings.ALLOW_EXTRAPOLATED_UPSILON or args.allow_extrapolated_upsilon_base
            ),
        ),
    )


def load_knot(text: str, config: CliConfig) -> Tuple[KnotRegistry, KnotExpr]:
    registry = get_registry(config.registry_path)
    return registry, parse(text, registry)


# =========================================
# 📐 Default windows
# =========================================
def resolve_box(bundle: InvariantBundle, config: CliConfig) -> Box:
    """The explicit --box, else the standard box shrunk in h to fit the output format."""
    if config.box is not None:
        return config.box
    box = standard_box(bundle)
    h_max = box.h_max
    if config.format == "ascii":
        h_max = min(h_max, settings.ASCII_MAX_ROWS)
    elif config.format == "svg":
        while h_max > 1 and box.model_copy(update={"h_max": h_max}).parity_count > settings.SVG_POINT_LIMIT:
            h_max -= 1
    if h_max != box.h_max:
        logger.warning(f"⚠️ Default box clipped to h <= {h_max} for {config.format} output")
    return box.model_copy(update={"h_max": h_max})


def write_output(data: Union[str, bytes], output: Optional[Path]) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if output is not None:
        try:
            output.write_bytes(data)
        except OSError as e:
            raise UsageError(f"cannot write {output}: {e.strerror}") from None
        logger.info(f"✅ Wrote {len(data)} bytes to {output}")
        return
    sys.stdout.write(data.decode("utf-8"))
    sys.stdout.flush()
