"""Command-line entry point: ``bnkh <command> ...``.

Exit codes: 0 success (or a true predicate), 1 false predicate or failed
check, 2 input error, 3 capacity exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .codec import PlanarDiagram, connected_sum, diagram_to_dt, dt_to_diagram, mirror, parse_dt, render_dt
from .cube import DEFAULT_MAX_GENERATORS, build_reduced_complex
from .errors import BNKhError, CapacityExceeded, EmptyBigrading, InputError
from .homology import (
    BNDecomposition,
    decompose,
    render_table,
    ss_page,
    survives_H,
    tensor_decompositions,
    torsion_order,
    torus_knot_bn,
)
from .scan import scan_reduce

SCHEMA = 1
EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3
CACHE_ENV = "BNKH_CACHE_DIR"

log = logging.getLogger("bnkh")


@dataclass
class JobConfig:
    command: str
    sources: list = field(default_factory=list)
    output: str = "json"
    h_min: int = -4
    q_min: int = -12
    h_max: int | None = None
    q_max: int | None = None
    max_generators: int = DEFAULT_MAX_GENERATORS
    cache_dir: Path | None = None
    engine: str = "scan"


# ----------------------------------------------------------------------------
# Inputs


def _source(kind):
    def make(value):
        return (kind, value)
    make.__name__ = kind
    return make


def _read_text(value: str) -> str:
    p = Path(value)
    if p.is_file():
        return p.read_text(encoding="utf-8")
    return value


def load_source(src, basepoint=None, mirrored=False):
    """Turn a ``(kind, value)`` source into a diagram or a decomposition."""
    kind, value = src
    if kind == "dt":
        d = dt_to_diagram(parse_dt(_read_text(value)))
    elif kind == "pd":
        text = _read_text(value).strip()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"PD input is not JSON: {exc}") from None
        if isinstance(data, list):
            data = {"crossings": data}
        d = PlanarDiagram.from_json(data)
    elif kind == "decomposition":
        data = json.loads(_read_text(value))
        return BNDecomposition.from_json(data)
    elif kind == "torus":
        try:
            k = int(value)
        except ValueError:
            raise InputError(f"torus parameter must be an integer, got {value!r}") from None
        return torus_knot_bn(k)
    else:  # pragma: no cover - argparse restricts the kinds
        raise InputError(f"unknown input kind {kind}")
    if mirrored:
        d = mirror(d)
    if basepoint is not None:
        d = d.with_basepoint(basepoint)
    return d


# ----------------------------------------------------------------------------
# Cache


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "bnkh"


def cache_key(d: PlanarDiagram, engine: str) -> str:
    blob = json.dumps({"version": __version__, "engine": engine, "diagram": d.to_json()},
                      sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _cache_get(cache_dir, key):
    if cache_dir is None:
        return None
    path = Path(cache_dir) / f"{key}.json"
    try:
        return BNDecomposition.from_json(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError):
        return None


def _cache_put(cache_dir, key, dec: BNDecomposition):
    if cache_dir is None:
        return
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(dec.to_json(), fh)
    os.replace(tmp, cache_dir / f"{key}.json")


def compute_decomposition(d: PlanarDiagram, engine: str = "scan",
                          max_generators: int = DEFAULT_MAX_GENERATORS, cache_dir=None) -> BNDecomposition:
    key = cache_key(d, engine)
    hit = _cache_get(cache_dir, key)
    if hit is not None:
        log.info("cache hit %s", key[:12])
        return hit
    if engine == "cube":
        cx = build_reduced_complex(d, max_generators=max_generators)
    else:
        cx = scan_reduce(d, max_generators=max_generators)
    dec = decompose(cx)
    _cache_put(cache_dir, key, dec)
    return dec


def _decomposition_of(obj, cfg: JobConfig) -> BNDecomposition:
    if isinstance(obj, BNDecomposition):
        return obj
    return compute_decomposition(obj, cfg.engine, cfg.max_generators, cfg.cache_dir)


# ----------------------------------------------------------------------------
# Output helpers


def _dumps(data) -> str:
    return json.dumps(data, sort_keys=True)


def _page_json(page) -> list:
    return [[h, q, r] for (h, q), r in sorted(page.ranks.items())]


def render_pages(dec: BNDecomposition, pages: int, cfg: JobConfig) -> str:
    blocks = []
    for r in range(1, pages + 1):
        table = render_table(ss_page(dec, r), cfg.h_min, cfg.q_min, tower=(0, dec.s),
                             h_max=cfg.h_max, q_max=cfg.q_max)
        blocks.append(f"Page {r}\n{table}")
    return "\n\n".join(blocks)


# ----------------------------------------------------------------------------
# Commands


def _homology_one(args):
    src, cfg, basepoint, mirrored, pages = args
    obj = load_source(src, basepoint, mirrored)
    dec = _decomposition_of(obj, cfg)
    if cfg.output == "table":
        head = f"s = {dec.s}"
        return head + "\n\n" + render_pages(dec, max(pages, 1), cfg)
    data = {"schema": SCHEMA, "s": dec.s, "torsion": [list(t) for t in dec.torsion]}
    if pages:
        data["pages"] = {str(r): _page_json(ss_page(dec, r)) for r in range(1, pages + 1)}
    return _dumps(data)


def cmd_homology(ns, cfg: JobConfig) -> int:
    if not cfg.sources:
        raise InputError("homology needs at least one --dt, --pd or --decomposition input")
    jobs = [(src, cfg, ns.basepoint, ns.mirror, ns.pages) for src in cfg.sources]
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            outputs = list(pool.map(_homology_one, jobs))
    else:
        outputs = [_homology_one(j) for j in jobs]
    sep = "\n\n" if cfg.output == "table" else "\n"
    print(sep.join(outputs))
    return EXIT_OK


def _single(cfg: JobConfig, ns):
    if len(cfg.sources) != 1:
        raise InputError(f"{cfg.command} takes exactly one input")
    return load_source(cfg.sources[0], ns.basepoint, ns.mirror)


def cmd_survives(ns, cfg: JobConfig) -> int:
    dec = _decomposition_of(_single(cfg, ns), cfg)
    try:
        ok = survives_H(dec, ns.h, ns.q)
    except EmptyBigrading as exc:
        raise InputError(str(exc)) from None
    if cfg.output == "table":
        print("true" if ok else "false")
    else:
        print(_dumps({"schema": SCHEMA, "h": ns.h, "q": ns.q, "survives": ok}))
    return EXIT_OK if ok else EXIT_FALSE


def cmd_kunneth(ns, cfg: JobConfig) -> int:
    if len(cfg.sources) < 2:
        raise InputError("kunneth needs at least two inputs")
    objs = [load_source(s, ns.basepoint, False) for s in cfg.sources]
    decs = [_decomposition_of(o, cfg) for o in objs]
    dec = decs[0]
    for other in decs[1:]:
        dec = tensor_decompositions(dec, other)
    data = {"schema": SCHEMA, "s": dec.s, "torsion": [list(t) for t in dec.torsion]}
    code = EXIT_OK
    if ns.check:
        if not all(isinstance(o, PlanarDiagram) for o in objs):
            raise InputError("--check needs diagram inputs")
        d = objs[0]
        for other in objs[1:]:
            d = connected_sum(d, other)
        direct = compute_decomposition(d, cfg.engine, cfg.max_generators, cfg.cache_dir)
        data["direct_agrees"] = direct == dec
        code = EXIT_OK if direct == dec else EXIT_FALSE
    if cfg.output == "table":
        print(f"s = {dec.s}\n\n" + render_pages(dec, max(ns.pages, 1), cfg))
        if ns.check:
            print("direct computation agrees" if data["direct_agrees"] else "direct computation differs")
    else:
        print(_dumps(data))
    return code


def cmd_torus(ns, cfg: JobConfig) -> int:
    dec = torus_knot_bn(ns.k)
    data = {"schema": SCHEMA, "k": ns.k, "s": dec.s, "torsion": [list(t) for t in dec.torsion]}
    code = EXIT_OK
    if ns.check:
        from .corpus import braid_closure

        d = mirror(braid_closure([1] * ns.k, 2))
        direct = decompose(build_reduced_complex(d, max_generators=cfg.max_generators))
        data["direct_agrees"] = direct == dec
        code = EXIT_OK if direct == dec else EXIT_FALSE
    if cfg.output == "table":
        print(f"s = {dec.s}\n\n" + render_pages(dec, max(ns.pages, 1), cfg))
    else:
        print(_dumps(data))
    return code


def cmd_parse(ns, cfg: JobConfig) -> int:
    d = _single(cfg, ns)
    if not isinstance(d, PlanarDiagram):
        raise InputError("parse takes a diagram input")
    data = {
        "schema": SCHEMA,
        "crossings": d.n,
        "writhe": d.writhe,
        "components": len(d.components()),
        "basepoint": d.basepoint,
        "pd": [list(c) for c in d.crossings],
        "loops": list(d.loops),
    }
    if d.is_knot() and d.n:
        data["dt"] = render_dt(diagram_to_dt(d))
    if cfg.output == "table":
        print(f"crossings {d.n}, writhe {d.writhe}, basepoint edge {d.basepoint}")
        for c in d.crossings:
            print("X[%d,%d,%d,%d] %+d" % c)
        if "dt" in data:
            print("DT " + data["dt"])
    else:
        print(_dumps(data))
    return EXIT_OK


def _class_json(cls, dec, coords) -> dict:
    order = torsion_order(dec, coords)
    return {
        "h": cls.h,
        "q": cls.q,
        "zero": coords.is_zero(),
        "tower": coords.tower,
        "torsion_summands": [list(dec.torsion[i]) for i in sorted(coords.torsion)],
        "torsion_order": "inf" if order == float("inf") else order,
        "chain": cls.to_json()["chain"],
    }


def cmd_movie(ns, cfg: JobConfig) -> int:
    from .movies import InducedClass, Movie, class_coordinates, induced_class, stabilize_map

    def load(path):
        try:
            m = Movie.load(path)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read movie {path}: {exc}") from None
        for _ in range(ns.tube):
            m = m.stabilized()
        return m

    m = load(ns.movie)
    cls = induced_class(m)
    if ns.minus:
        other = load(ns.minus)
        if other.end.to_json() != m.end.to_json():
            raise InputError("the two movies end at different diagrams")
        cls2 = induced_class(other)
        if (cls2.h, cls2.q) != (cls.h, cls.q) and cls2.chain and cls.chain:
            raise InputError("the two induced classes have different bidegrees")
        chain = dict(cls.chain)
        for g, c in cls2.chain.items():
            v = chain.get(g, 0) ^ c
            if v:
                chain[g] = v
            else:
                chain.pop(g, None)
        cls = InducedClass(chain, cls.h, cls.q, cls.complex)
    if ns.stabilize:
        cls = stabilize_map(cls, ns.stabilize)
    dec, coords = class_coordinates(cls.complex, cls.chain)
    coords.h, coords.q = cls.h, cls.q
    # each algebraic stabilization stands for one internal tube
    chi = m.euler_characteristic() - 2 * ns.stabilize
    data = {"schema": SCHEMA, "euler_characteristic": chi,
            "decomposition": dec.to_json(), "class": _class_json(cls, dec, coords)}
    if cfg.output == "table":
        c = data["class"]
        print(f"class in bidegree ({c['h']}, {c['q']}), chi = {data['euler_characteristic']}")
        print("zero" if c["zero"] else
              ("tower component" if c["tower"] else f"torsion summands {c['torsion_summands']}"))
        print(f"torsion order {c['torsion_order']}")
    else:
        print(_dumps(data))
    return EXIT_OK


def cmd_form_check(ns, cfg: JobConfig) -> int:
    from .laurent import cancel_hyperbolic_pairs, congruence, fixture, forms_equal, load_matrix

    def pairs(text):
        out = []
        for item in text.split(","):
            i, j = item.split(":")
            out.append((int(i), int(j)))
        return out

    if ns.q or ns.p:
        if not (ns.q and ns.p):
            raise InputError("form-check needs both --q and --p")
        q, p = load_matrix(ns.q), load_matrix(ns.p)
        res = congruence(q, p)
        data = {"schema": SCHEMA, "transformed": res.to_json()}
        ok = True
        if ns.pairs:
            red = cancel_hyperbolic_pairs(res, pairs(ns.pairs))
            data["reduced"] = red.to_json()
            res = red
        if ns.expect:
            ok = forms_equal(res, load_matrix(ns.expect))
            data["matches_expected"] = ok
    else:
        q0, p, q0p, pp = fixture("q0"), fixture("p"), fixture("q0_prime"), fixture("p_prime")
        a, b = congruence(q0, p), congruence(q0p, pp)
        qa = cancel_hyperbolic_pairs(a, [(0, 5), (1, 2)])
        qb = cancel_hyperbolic_pairs(b, [(0, 5), (1, 2)])
        ok = (forms_equal(a, fixture("q0_after_p"))
              and forms_equal(b, fixture("q0_prime_after_p_prime"))
              and forms_equal(qa, qb) and forms_equal(qa, fixture("q_reduced")))
        data = {"schema": SCHEMA, "Q": qa.to_json(), "Q_prime": qb.to_json(), "forms_equal": ok}
    if cfg.output == "table":
        for key in ("reduced", "transformed", "Q", "Q_prime"):
            if key in data:
                print(f"{key}:")
                print(load_matrix(data[key]))
        print("ok" if ok else "mismatch")
    else:
        print(_dumps(data))
    return EXIT_OK if ok else EXIT_FALSE


# ----------------------------------------------------------------------------
# Parser


def _add_inputs(p, many=False):
    p.add_argument("--dt", dest="sources", action="append", type=_source("dt"), default=[],
                   metavar="CODE|FILE", help="DT code, inline or in a file")
    p.add_argument("--pd", dest="sources", action="append", type=_source("pd"),
                   metavar="FILE", help="signed PD code as JSON")
    p.add_argument("--decomposition", dest="sources", action="append", type=_source("decomposition"),
                   metavar="FILE", help="a precomputed decomposition (JSON)")
    if many:
        p.add_argument("--torus", dest="sources", action="append", type=_source("torus"),
                       metavar="K", help="the closed form for the mirrored T(2,K)")
    p.add_argument("--basepoint", type=int, help="edge carrying the basepoint")
    p.add_argument("--mirror", action="store_true", help="use the mirror image")


def _add_window(p):
    p.add_argument("--pages", type=int, default=0, help="spectral sequence pages to print")
    p.add_argument("--h-min", type=int, default=-4)
    p.add_argument("--q-min", type=int, default=-12)
    p.add_argument("--h-max", type=int)
    p.add_argument("--q-max", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bnkh", description="Reduced Bar-Natan homology over F2[H].")
    parser.add_argument("--version", action="version", version=f"bnkh {__version__}")
    parser.add_argument("--format", choices=("json", "table"), default="json")
    parser.add_argument("--cache-dir", help=f"cache directory (default ${CACHE_ENV} or ~/.cache/bnkh)")
    parser.add_argument("--no-cache", action="store_true")
    parser.add_argument("--max-generators", type=int, default=DEFAULT_MAX_GENERATORS,
                        help="memory budget in generators; exceeding it exits with status 3")
    parser.add_argument("--engine", choices=("scan", "cube"), default="scan")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("homology", help="decomposition and spectral sequence pages")
    _add_inputs(p)
    _add_window(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for several inputs")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("survives", help="does every class in (h, q) survive multiplication by H")
    _add_inputs(p)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_survives)

    p = sub.add_parser("movie-eval", help="class induced by a movie out of the unknot")
    p.add_argument("movie", help="movie JSON file")
    p.add_argument("--minus", metavar="MOVIE", help="subtract the class of a second movie")
    p.add_argument("--stabilize", type=int, default=0, help="multiply the class by H^n")
    p.add_argument("--tube", type=int, default=0, help="insert n tubes into the movie(s) first")
    p.set_defaults(func=cmd_movie)

    p = sub.add_parser("kunneth", help="decomposition of a connected sum from its summands")
    _add_inputs(p, many=True)
    _add_window(p)
    p.add_argument("--check", action="store_true", help="compare with the connected-sum diagram")
    p.set_defaults(func=cmd_kunneth)

    p = sub.add_parser("torus", help="closed form for the mirrored T(2,k)")
    p.add_argument("--k", type=int, required=True)
    _add_window(p)
    p.add_argument("--check", action="store_true", help="compare with the cube computation")
    p.set_defaults(func=cmd_torus)

    p = sub.add_parser("form-check", help="Laurent intersection-form pipeline")
    p.add_argument("--q", help="form matrix JSON")
    p.add_argument("--p", help="basis change JSON")
    p.add_argument("--pairs", help="hyperbolic pairs to cancel, e.g. 0:5,1:2")
    p.add_argument("--expect", help="expected result JSON")
    p.set_defaults(func=cmd_form_check)

    p = sub.add_parser("parse", help="decode a diagram and print its PD code")
    _add_inputs(p)
    p.set_defaults(func=cmd_parse)
    return parser


def config_from(ns) -> JobConfig:
    cache = None if ns.no_cache else Path(ns.cache_dir) if ns.cache_dir else default_cache_dir()
    return JobConfig(
        command=ns.command,
        sources=[s for s in getattr(ns, "sources", None) or [] if s is not None],
        output=ns.format,
        h_min=getattr(ns, "h_min", -4),
        q_min=getattr(ns, "q_min", -12),
        h_max=getattr(ns, "h_max", None),
        q_max=getattr(ns, "q_max", None),
        max_generators=ns.max_generators,
        cache_dir=cache,
        engine=ns.engine,
    )


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    cfg = config_from(ns)
    try:
        return ns.func(ns, cfg)
    except CapacityExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InputError, BNKhError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
