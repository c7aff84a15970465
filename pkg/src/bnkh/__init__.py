"""Reduced Khovanov and Bar-Natan homology over F2[H].

Diagram codecs, a scanning reducer, normal-form decompositions,
cobordism maps from movies and Laurent-polynomial intersection forms.
"""

__version__ = "0.1.0"

from .codec import (
    DTCode,
    PlanarDiagram,
    connected_sum,
    dt_to_diagram,
    mirror,
    parse_dt,
    render_dt,
)
from .homology import (
    BNDecomposition,
    SSPage,
    decompose,
    s_invariant,
    ss_page,
    survives_H,
    tensor_decompositions,
    torus_knot_bn,
)
from .cube import LabeledState, build_reduced_complex, state_to_chain
from .laurent import LaurentMatrix, LaurentPoly, bar, cancel_hyperbolic_pairs, congruence, forms_equal
from .movies import Move, Movie, induced_class, movie_chain_map, stabilize_map
from .scan import scan_reduce
from .tqft import verify_complex, verify_frobenius

__all__ = [
    "BNDecomposition",
    "DTCode",
    "LabeledState",
    "LaurentMatrix",
    "LaurentPoly",
    "Move",
    "Movie",
    "PlanarDiagram",
    "SSPage",
    "bar",
    "build_reduced_complex",
    "cancel_hyperbolic_pairs",
    "congruence",
    "connected_sum",
    "decompose",
    "dt_to_diagram",
    "forms_equal",
    "induced_class",
    "mirror",
    "movie_chain_map",
    "parse_dt",
    "render_dt",
    "s_invariant",
    "scan_reduce",
    "ss_page",
    "stabilize_map",
    "state_to_chain",
    "survives_H",
    "tensor_decompositions",
    "torus_knot_bn",
    "verify_complex",
    "verify_frobenius",
]
