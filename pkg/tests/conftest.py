# tests/conftest.py
import os
import sys
from pathlib import Path

import pytest

# Ensure root path for relative imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.registry import get_registry  # noqa: E402
from models.models import EngineFlags, LatticePoint  # noqa: E402
from services import invariants  # noqa: E402
from services.geography import build_report, classify_box  # noqa: E402
from services.knot_expr import parse  # noqa: E402


@pytest.fixture(scope="session")
def registry():
    return get_registry(None)


@pytest.fixture(scope="session")
def flags():
    return EngineFlags(mirror_delta=True, allow_extrapolated_upsilon=False)


@pytest.fixture(scope="session")
def engine(registry, flags):
    """Small facade: expression text in, bundle / report / verdicts out."""

    class Engine:
        def knot(self, text):
            return parse(text, registry)

        def bundle(self, text):
            return invariants.bundle(self.knot(text), flags, registry)

        def report(self, text):
            return build_report(self.knot(text), flags, registry)

        def box(self, text, e_min, e_max, h_max):
            bundle = self.bundle(text)
            return classify_box(bundle, e_min, e_max, h_max, flags)

        def status(self, text, e, h):
            verdicts = self.box(text, e, e, h)
            return verdicts[LatticePoint(e=e, h=h)].status

    return Engine()


@pytest.fixture
def registry_file(tmp_path: Path):
    """Write a registry JSON document and return its path."""

    def write(text: str) -> Path:
        path = tmp_path / "registry.json"
        path.write_text(text, encoding="utf-8")
        return path

    return write
