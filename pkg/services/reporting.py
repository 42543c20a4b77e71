# ================================================================
# services/reporting.py: JSON / ASCII / SVG emitters
# ================================================================
import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

from jinja2 import Environment, FileSystemLoader, select_autoescape
from loguru import logger
from pydantic import ValidationError

from core.config import settings
from core.exceptions import BoxTooLargeError, UsageError
from models.models import (
    SPECIAL_OBSTRUCTIONS,
    Arm,
    Box,
    GeographyReport,
    InvariantBundle,
    LatticePoint,
    Status,
    Verdict,
    Wedge,
)
from schemas.registry_schema import render_rational
from schemas.report_schema import (
    ApexDoc,
    BoxDoc,
    DeltaLineDoc,
    ForbiddenDoc,
    Gamma4Doc,
    InvariantsDoc,
    MetaDoc,
    PointDoc,
    PointRecord,
    RayDoc,
    ReportDocument,
    SummaryDoc,
)
from services.geography import classify_box
from services.knot_expr import to_text

TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"

GLYPHS = {
    Status.REALIZABLE: "#",
    Status.UNKNOWN: "?",
}
SPECIAL_GLYPH = "x"
RULED_OUT_GLYPH = "."

# SVG geometry, in user units
MARGIN = 40
E_STEP = 10
H_STEP = 20
LEGEND_WIDTH = 180
POINT_RADIUS = 3
STATUS_COLORS = {
    Status.REALIZABLE: "#2f9e44",
    Status.NOT_REALIZABLE: "#adb5bd",
    Status.UNKNOWN: "#f08c00",
}
SPECIAL_COLOR = "#c92a2a"


def _verdicts(bundle: InvariantBundle, report: GeographyReport, box: Box) -> Dict[LatticePoint, Verdict]:
    return classify_box(bundle, box.e_min, box.e_max, box.h_max, report.flags)


def _is_special(verdict: Verdict) -> bool:
    return (
        verdict.status is Status.NOT_REALIZABLE
        and verdict.certificate is not None
        and verdict.certificate.kind in SPECIAL_OBSTRUCTIONS
    )


def glyph(verdict: Optional[Verdict]) -> str:
    """ASCII cell for a verdict; parity-invalid cells have no verdict and print as '.'."""
    if verdict is None:
        return RULED_OUT_GLYPH
    if _is_special(verdict):
        return SPECIAL_GLYPH
    return GLYPHS.get(verdict.status, RULED_OUT_GLYPH)


# ================================================================
# ✅ JSON
# ================================================================
def _record(verdict: Verdict) -> PointRecord:
    return PointRecord(
        e=verdict.point.e,
        h=verdict.point.h,
        status=verdict.status,
        certificate=None if verdict.certificate is None else verdict.certificate.describe(),
    )


def _point(point: LatticePoint) -> PointDoc:
    return PointDoc(e=point.e, h=point.h)


def build_document(
    bundle: InvariantBundle,
    report: GeographyReport,
    box: Box,
    registry_hash: str = "",
) -> ReportDocument:
    verdicts = list(_verdicts(bundle, report, box).values())
    unknown = report.unknown
    gamma4 = report.gamma4
    return ReportDocument(
        knot=to_text(report.knot),
        invariants=InvariantsDoc(
            sigma=bundle.sigma,
            upsilon1=render_rational(bundle.upsilon1),
            arf=bundle.arf,
            det=bundle.det,
            delta=None if bundle.delta is None else render_rational(bundle.delta),
            g4_upper=bundle.g4_upper,
            gamma4_upper=bundle.gamma4_upper,
            extrapolated=bundle.extrapolated,
        ),
        gamma4=Gamma4Doc(
            lower=gamma4.lower,
            upper=gamma4.upper,
            lower_certificate=gamma4.lower_certificate,
            upper_certificate=gamma4.upper_certificate,
        ),
        box=BoxDoc(e_min=box.e_min, e_max=box.e_max, h_max=box.h_max),
        points=[_record(v) for v in verdicts],
        unknown=[_point(v.point) for v in verdicts if v.status is Status.UNKNOWN],
        summary=SummaryDoc(
            apexes=[
                ApexDoc(e=apex.point.e, h=apex.point.h, certificate=apex.certificate.describe())
                for apex in report.realizable
            ],
            r1_center=render_rational(report.r1.center),
            r2_center=render_rational(report.r2.center),
            delta_line=(
                None
                if report.delta_line is None
                else DeltaLineDoc(arm=report.delta_line.arm, offset=report.delta_line.offset)
            ),
            klein_points=[_record(v) for v in report.klein_points],
            forbidden=[
                ForbiddenDoc(kind=f.kind, h=f.h, e=f.e, provenance=f.provenance) for f in report.forbidden
            ],
            unknown_rays=[RayDoc(start=_point(ray.start), direction=ray.direction) for ray in unknown.rays],
            unknown_points=[_point(p) for p in unknown.points],
            unknown_finite_count=unknown.finite_count,
            unknown_truncated=unknown.truncated,
            sweep_h_max=unknown.sweep_h_max,
        ),
        meta=MetaDoc(
            engine_version=settings.ENGINE_VERSION,
            registry_hash=registry_hash,
            flags=report.flags.model_dump(),
            extrapolated=report.extrapolated,
        ),
    )


def dump_document(document: ReportDocument) -> bytes:
    """Canonical bytes: sorted keys, two-space indent, UTF-8, trailing newline."""
    text = json.dumps(document.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def parse_document(data: Union[bytes, str]) -> ReportDocument:
    try:
        return ReportDocument.model_validate_json(data)
    except ValidationError as e:
        raise UsageError(f"not a knotgeo report: {e.errors()[0]['msg']}") from None


def emit_json(
    bundle: InvariantBundle, report: GeographyReport, box: Box, registry_hash: str = ""
) -> bytes:
    return dump_document(build_document(bundle, report, box, registry_hash))


# ================================================================
# ✅ ASCII grid
# ================================================================
def _columns(box: Box) -> List[int]:
    first = box.e_min + box.e_min % 2
    return list(range(first, box.e_max + 1, 2))


def emit_ascii(bundle: InvariantBundle, report: GeographyReport, box: Box) -> str:
    """One row per h (top row h_max), one cell per even e."""
    if box.is_empty:
        return ""
    columns = _columns(box)
    if len(columns) > settings.ASCII_MAX_COLUMNS or box.h_max > settings.ASCII_MAX_ROWS:
        raise BoxTooLargeError(
            f"ASCII grid of {len(columns)}x{box.h_max} cells exceeds "
            f"{settings.ASCII_MAX_COLUMNS}x{settings.ASCII_MAX_ROWS}"
        )
    if not columns:
        return ""

    verdicts = _verdicts(bundle, report, box)
    lines = [f"{to_text(report.knot)}  e={box.e_min}..{box.e_max}  h<={box.h_max}"]
    for h in range(box.h_max, 0, -1):
        cells = [glyph(verdicts.get(LatticePoint(e=e, h=h))) for e in columns]
        lines.append(f"{h:>4} | " + " ".join(cells))
    lines.append("     +" + "-" * (2 * len(columns)))

    # labels sit under every fourth column
    labels = [" "] * (7 + 2 * len(columns) + 8)
    for index in range(0, len(columns), 4):
        text = str(columns[index])
        start = 7 + 2 * index
        labels[start : start + len(text)] = text
    lines.append("".join(labels).rstrip())
    return "\n".join(lines) + "\n"


# ================================================================
# ✅ SVG plot
# ================================================================
def _fmt(value) -> str:
    return f"{float(value):.2f}"


class _Canvas:
    def __init__(self, box: Box):
        self.box = box
        self.plot_width = (box.e_max - box.e_min) * E_STEP
        self.plot_height = box.h_max * H_STEP
        self.width = 2 * MARGIN + self.plot_width + LEGEND_WIDTH
        self.height = 2 * MARGIN + self.plot_height

    def x(self, e) -> str:
        return _fmt(MARGIN + (e - self.box.e_min) * E_STEP)

    def y(self, h) -> str:
        return _fmt(MARGIN + (self.box.h_max - h) * H_STEP)

    def polyline(self, points) -> str:
        return " ".join(f"{self.x(e)},{self.y(h)}" for e, h in points)

    def wedge(self, wedge: Wedge) -> str:
        rise = self.box.h_max - wedge.base
        return self.polyline(
            [
                (wedge.center - 2 * rise, self.box.h_max),
                (wedge.center, wedge.base),
                (wedge.center + 2 * rise, self.box.h_max),
            ]
        )


def _tick_step(span: int, target: int) -> int:
    return max(1, math.ceil(span / target))


def emit_svg(bundle: InvariantBundle, report: GeographyReport, box: Box) -> str:
    if box.is_empty:
        raise UsageError("cannot plot an empty box")
    if box.parity_count > settings.SVG_POINT_LIMIT:
        raise BoxTooLargeError(
            f"SVG plot of {box.parity_count} points exceeds the limit {settings.SVG_POINT_LIMIT}"
        )
    canvas = _Canvas(box)
    verdicts = _verdicts(bundle, report, box)

    markers = []
    for verdict in verdicts.values():
        point = verdict.point
        markers.append(
            {
                "e": point.e,
                "h": point.h,
                "x": canvas.x(point.e),
                "y": canvas.y(point.h),
                "status": verdict.status.value,
                "special": _is_special(verdict),
                "color": SPECIAL_COLOR if _is_special(verdict) else STATUS_COLORS[verdict.status],
                "certificate": "" if verdict.certificate is None else verdict.certificate.describe(),
            }
        )

    delta_line = None
    if report.delta_line is not None:
        line = report.delta_line
        sign = 1 if line.arm is Arm.RIGHT else -1
        delta_line = {
            "arm": line.arm.value,
            "points": canvas.polyline(
                [(2 * line.offset + sign * 2 * h, h) for h in (0, box.h_max)]
            ),
        }

    e_step = 4 * _tick_step(box.e_max - box.e_min, 160)
    first_tick = box.e_min + (-box.e_min) % e_step
    h_step = _tick_step(box.h_max, 20)
    context = {
        "title": to_text(report.knot),
        "width": canvas.width,
        "height": canvas.height,
        "margin": MARGIN,
        "plot_width": canvas.plot_width,
        "plot_height": canvas.plot_height,
        "radius": POINT_RADIUS,
        "baseline": canvas.y(0),
        "e_ticks": [
            {"label": e, "x": canvas.x(e)} for e in range(first_tick, box.e_max + 1, e_step)
        ],
        "h_ticks": [{"label": h, "y": canvas.y(h)} for h in range(h_step, box.h_max + 1, h_step)],
        "regions": [
            {"name": "R1", "points": canvas.wedge(report.r1)},
            {"name": "R2", "points": canvas.wedge(report.r2)},
        ],
        "apexes": [
            {"e": apex.point.e, "h": apex.point.h, "points": canvas.wedge(apex.wedge)}
            for apex in report.realizable
        ],
        "delta_line": delta_line,
        "markers": markers,
        "legend_x": MARGIN + canvas.plot_width + 20,
        "legend": [
            {"label": "realizable", "color": STATUS_COLORS[Status.REALIZABLE], "special": False},
            {"label": "not realizable", "color": STATUS_COLORS[Status.NOT_REALIZABLE], "special": False},
            {"label": "special obstruction", "color": SPECIAL_COLOR, "special": True},
            {"label": "unknown", "color": STATUS_COLORS[Status.UNKNOWN], "special": False},
        ],
    }
    logger.debug(f"🖼️ SVG for {context['title']}: {len(markers)} points, {len(context['apexes'])} apex wedges")
    return _environment().get_template("plot.svg.j2").render(**context)


def _environment() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(TEMPLATES_DIR)),
        autoescape=select_autoescape(["svg", "xml", "j2"]),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
