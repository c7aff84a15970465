"""The two large knots shipped with the package, and their stored results."""
from __future__ import annotations

import json
from importlib import resources

from .codec import PlanarDiagram, dt_to_diagram, mirror, parse_dt
from .homology import BNDecomposition


def _text(name: str) -> str:
    return (resources.files("bnkh") / "data" / name).read_text(encoding="utf-8")


def minus_k_code() -> str:
    """46-crossing DT code; it decodes directly to -K."""
    return _text("minus_k.dt").strip()


def k1_code() -> str:
    """64-crossing DT code of K1 (mirror it for -K1)."""
    return _text("k1.dt").strip()


def minus_k() -> PlanarDiagram:
    return dt_to_diagram(parse_dt(minus_k_code()))


def minus_k1() -> PlanarDiagram:
    return mirror(dt_to_diagram(parse_dt(k1_code())))


def stored_decomposition(name: str) -> BNDecomposition:
    """A decomposition computed earlier by this package (``minus_k``...)."""
    return BNDecomposition.from_json(json.loads(_text(f"{name}_decomposition.json")))
