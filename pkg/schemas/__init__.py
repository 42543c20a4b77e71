from .registry_schema import (
    DeltaEntry, Gamma4Entry, PointEntry, ForbiddenEntry, NamedEntry, RegistryFile,
    RationalText, parse_rational, render_rational,
)
from .report_schema import (
    PointDoc, PointRecord, ApexDoc, DeltaLineDoc, ForbiddenDoc, RayDoc,
    InvariantsDoc, Gamma4Doc, BoxDoc, SummaryDoc, MetaDoc, ReportDocument,
)

__all__ = [
    # Registry file
    "DeltaEntry", "Gamma4Entry", "PointEntry", "ForbiddenEntry", "NamedEntry", "RegistryFile",
    "RationalText", "parse_rational", "render_rational",

    # Report document
    "PointDoc", "PointRecord", "ApexDoc", "DeltaLineDoc", "ForbiddenDoc", "RayDoc",
    "InvariantsDoc", "Gamma4Doc", "BoxDoc", "SummaryDoc", "MetaDoc", "ReportDocument",
]
