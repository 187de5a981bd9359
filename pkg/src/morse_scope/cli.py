"""``morse-scope`` command line."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .centers import FlipError, cross_ratio_detail, flip_path, paulin_cross_ratio
from .groups import BoundaryPoint, FreeGroupModel, OutOfBallError, as_point, word_geodesic, word_key
from .hhs import builtin_structure, fit_distance_formula, hhs_cross_ratio, morse_characterization_check, random_pairs
from .metric import DisconnectedGraphError, QGParams, gromov_product, read_graph, slim_delta
from .morse import DEFAULT_BUDGET, DEFAULT_GRID, morse_gauge_estimate
from .synthesis import (
    NotAnAutomorphism,
    boundary_map_from_endomorphism,
    induced_boundary_agreement,
    max_displacement,
    qi_distortion,
    synthesize_map,
)

EXIT_OK, EXIT_PRECONDITION, EXIT_INCONCLUSIVE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are precondition failures; 2 is reserved for inconclusive searches
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PRECONDITION, f"{self.prog}: error: {message}\n")


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, BoundaryPoint):
        return str(x)
    if isinstance(x, QGParams):
        return [_jsonable(x.lam), _jsonable(x.eps)]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return [_jsonable(v) for v in sorted(x, key=str)]
    if hasattr(x, "item"):
        return x.item()
    return x


def _cell(x) -> str:
    x = _jsonable(x)
    if isinstance(x, list):
        return " ".join(map(_cell, x))
    if isinstance(x, bool):
        return str(x).lower()
    return "" if x is None else str(x)


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = {"version": __version__, "command": command, **config}
        self.columns: list = []
        self.rows: list = []
        self.results: dict = {}
        self.flags: dict = {}

    def table(self, columns: Sequence[str]):
        self.columns = list(columns)

    def add(self, *values):
        self.rows.append(values)

    def render(self, fmt: str, timestamp: str) -> str:
        if fmt == "text":
            body = {
                "config": _jsonable({**self.config, "timestamp": timestamp}),
                "results": _jsonable({**self.results, **({"table": [dict(zip(self.columns, r)) for r in self.rows]} if self.columns else {})}),
                "flags": _jsonable(self.flags),
            }
            return json.dumps(body, indent=2) + "\n"
        buf = io.StringIO()
        buf.write(f"# timestamp: {timestamp}\n")
        buf.write(f"# morse-scope {__version__} {self.command}\n")
        for k, v in self.config.items():
            if k not in ("version", "command"):
                buf.write(f"# {k}: {_cell(v)}\n")
        extra = {**self.results, **self.flags} if self.columns else self.flags
        for k, v in extra.items():
            buf.write(f"# {k}: {_cell(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        cols = self.columns or ["key", "value"]
        w.writerow(cols)
        rows = self.rows if self.columns else [(k, v) for k, v in self.results.items()]
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------


def _parse_grid(text: str | None) -> tuple:
    if not text:
        return DEFAULT_GRID
    out = []
    for item in text.split(","):
        lam, _, eps = item.partition(":")
        out.append(QGParams(Fraction(lam), Fraction(eps or 0)))
    return tuple(out)


def _parse_triple(text: str) -> tuple:
    pts = [as_point(t) for t in text.split(",")]
    if len(pts) != 3:
        raise ValueError(f"expected three boundary points, got {text!r}")
    return tuple(pts)


def _parse_vertex(text: str, product: bool):
    if product:
        left, sep, right = text.partition(":")
        if not sep:
            raise ValueError(f"product vertices are written w1:w2, got {text!r}")
        return (left, right)
    return text


def _product_geodesic(u: tuple, v: tuple) -> tuple:
    first = [(w, u[1]) for w in word_geodesic(u[0], v[0])]
    second = [(v[0], w) for w in word_geodesic(u[1], v[1])[1:]]
    return tuple(first + second)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_hyperbolicity(args) -> Report:
    g = read_graph(args.graph)
    sample = "all" if args.sample == "all" else ("random", int(args.sample), args.seed)
    rep = Report("hyperbolicity", {"graph": args.graph, "sample": args.sample, "seed": args.seed})
    res = slim_delta(g, sample)
    rep.results = {"delta": res.delta, "triangles": res.triangles}
    if res.witness is not None:
        rep.results["witness"] = list(res.witness[:3])
    rep.flags = {"exhaustive": not res.truncated}
    return rep


def cmd_gromov(args) -> Report:
    g = read_graph(args.graph)
    rep = Report("gromov", {"graph": args.graph, "x": args.x, "y": args.y, "p": args.p})
    rep.results = {"gromov_product": gromov_product(g, args.x, args.y, args.p)}
    return rep


def cmd_morse(args) -> Report:
    grid = _parse_grid(args.grid)
    if args.graph:
        space = read_graph(args.graph)
        path = tuple(int(t) for t in args.path.split(","))
    else:
        space = FreeGroupModel(args.rank, args.radius)
        path = word_geodesic(args.start, args.end)
    rep = Report("morse", {"graph": args.graph, "rank": args.rank, "radius": args.radius, "path": " ".join(_label(v) for v in path), "grid": grid, "maxlen": args.maxlen, "budget": args.budget})
    table = morse_gauge_estimate(space, path, grid, args.maxlen, args.budget)
    rep.table(["lambda", "epsilon", "defect", "exhaustive", "witness"])
    for lam, eps, d, ex, wit in table.rows():
        rep.add(lam, eps, d, ex, " ".join(_label(v) for v in wit))
    rep.flags = {"exhaustive": table.all_exhaustive}
    return rep


def _label(v) -> str:
    if isinstance(v, str):
        return v or "e"
    if isinstance(v, tuple):
        return ":".join(_label(x) for x in v)
    return str(v)


def _centers_out(cs) -> list:
    return [_label(w) for w in sorted(cs.points, key=word_key)]


def cmd_crossratio(args) -> Report:
    pts = [as_point(p) for p in (args.a, args.b, args.c, args.d)]
    model = FreeGroupModel(2, args.model_radius)
    rep = Report("crossratio", {"points": [str(p) for p in pts], "K": args.K, "depth": args.depth, "modified": args.modified, "delta": args.delta})
    kw = {"modified": args.modified, "delta_hat": Fraction(args.delta)}
    value, m1, m2 = cross_ratio_detail(model, *pts, args.K, args.depth, **kw)
    rep.results = {"cross_ratio": value, "centers_abc": _centers_out(m1), "centers_adc": _centers_out(m2)}
    if args.paulin:
        rep.results["paulin"] = paulin_cross_ratio(model, *pts)
    rep.flags = {"exhaustive": m1.exhaustive and m2.exhaustive}
    return rep


def cmd_flips(args) -> Report:
    model = FreeGroupModel(2, args.model_radius)
    start, end = _parse_triple(args.start), _parse_triple(args.end)
    rep = Report("flips", {"start": [str(p) for p in start], "end": [str(p) for p in end], "K": args.K, "C": args.C})
    seq = flip_path(model, start, end, args.K, Fraction(args.C))
    rep.table(["step", "source", "target", "value", "kind"])
    for i, s in enumerate(seq.steps, 1):
        rep.add(i, list(s.source), list(s.target), s.value, s.kind)
    rep.results = {"case": seq.case, "triples": [list(t) for t in seq.triples], "permutation": list(seq.permutation)}
    if seq.bridge_bound is not None:
        rep.results["bridge_bound"] = seq.bridge_bound
    return rep


def _boundary_map(args):
    return boundary_map_from_endomorphism(args.phi, args.phi_inv)


def cmd_synth(args) -> Report:
    h = _boundary_map(args)
    domain = FreeGroupModel(h.rank, args.radius).words
    f = synthesize_map(h, args.K, domain, args.depth, source_radius=args.radius + 2)
    fit = qi_distortion(f, domain)
    disp, arg = max_displacement(f, h.word, domain)
    rep = Report("synth", {"phi": str(h), "phi_inv": ",".join(f"{k}={v}" for k, v in h.phi_inv), "K": args.K, "radius": args.radius, "depth": args.depth})
    rep.table(["x", "image", "phi_x", "displacement"])
    for x in domain:
        y, px = f(x), h.word(x)
        rep.add(x or "e", y or "e", px or "e", f.target.distance(y, px))
    rep.results = {"lambda": fit.lam, "epsilon": fit.eps, "worst_pair": list(fit.worst[0]) if fit.worst else None, "max_displacement": disp}
    return rep


def cmd_agree(args) -> Report:
    h = _boundary_map(args)
    depths = [int(t) for t in args.depths.split(",")]
    n = max(depths)
    f = synthesize_map(h, args.K, source_radius=n + 4)
    r = induced_boundary_agreement(f, args.q, n, args.eta, depths)
    rep = Report("agree", {"phi": str(h), "q": args.q, "K": args.K, "depths": depths, "eta": args.eta})
    rep.table(["depth", "claim1", "claim2", "image", "image_ray_distance"])
    for (k, c1), (_, c2) in zip(r.claim1, r.claim2):
        rep.add(k, c1, c2, r.images[k] or "e", r.image_ray_distance[k])
    rep.results = {"h_q": str(r.hq), "fellow_travel": r.fellow_travel}
    rep.flags = {"claim1_holds": all(c >= 2 for _, c in r.claim1)}
    return rep


def _structure(args):
    kind = {"tree": "tree-trivial", "product": "product-of-trees"}[args.structure]
    if kind == "tree-trivial":
        return builtin_structure(kind, (FreeGroupModel(args.rank, max(args.radius, 64)),))
    return builtin_structure(kind, (FreeGroupModel(args.rank, args.radius), FreeGroupModel(args.rank, args.radius)))


def cmd_hhs(args) -> Report:
    hhs = _structure(args)
    cfg = {"structure": hhs.kind, "rank": args.rank, "radius": args.radius}
    if args.action == "distfit":
        pairs = random_pairs(hhs, args.pairs, args.seed)
        fit = fit_distance_formula(hhs, args.sigma, pairs)
        rep = Report("hhs distfit", {**cfg, "sigma": args.sigma, "pairs": args.pairs, "seed": args.seed})
        rep.table(["domain", "target", "max_projection_distance"])
        for U in hhs.domains:
            rep.add(U, "bounded" if hhs.bounded(U) else "tree", max(hhs.domain_distance(U, x, y) for x, y in pairs))
        rep.results = {"A": fit.lam, "B": fit.eps}
        if fit.worst:
            rep.results["worst_pair"] = [_label(v) for v in fit.worst[0]]
        return rep
    if args.action == "morsecheck":
        product = hhs.kind == "product-of-trees"
        u, v = _parse_vertex(args.start, product), _parse_vertex(args.end, product)
        path = _product_geodesic(u, v) if product else word_geodesic(u, v)
        grid = _parse_grid(args.grid)
        c = morse_characterization_check(hhs, path, grid, args.B_cut, args.L, args.maxlen, args.budget)
        rep = Report("hhs morsecheck", {**cfg, "start": args.start, "end": args.end, "grid": grid, "B_cut": args.B_cut, "L": args.L, "maxlen": args.maxlen, "budget": args.budget})
        rep.table(["domain", "projection_diameter", "bounded"])
        for U in hhs.domains:
            if U != hhs.top:
                rep.add(U, c.projection_diameters[U], c.projection_diameters[U] <= args.B_cut)
        rep.results = {
            "morse": c.morse,
            "bounded_projections": c.bounded_projections,
            "top_quasi_geodesic": c.top_quasi_geodesic,
            "defects": [[q.lam, q.eps, d, ex] for q, d, ex in c.defects],
        }
        rep.flags = {"agree": c.agree, "exhaustive": all(ex for _, _, ex in c.defects)}
        return rep
    pts = [as_point(p) for p in (args.a, args.b, args.c, args.d)]
    x = hhs_cross_ratio(hhs, *pts, args.K)
    rep = Report("hhs xratio", {**cfg, "points": [str(p) for p in pts], "K": args.K})
    rep.results = {"centers": x.centers, "top": x.top, "center_distance": x.center_distance, **{f"gap_{k}": v for k, v in x.gaps.items()}}
    return rep


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="morse-scope", description="Finite experiments on Morse boundaries, centers and cross-ratios.")
    p.add_argument("--version", action="version", version=f"morse-scope {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "text"), default=None)
    common.add_argument("--output", "-o", default=None, help="report file (default: stdout)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("hyperbolicity", parents=[common], help="slim-triangle constant of a graph file")
    s.add_argument("--graph", required=True)
    s.add_argument("--sample", default="all", help="'all' or a number of random triangles")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_hyperbolicity, default_format="text")

    s = sub.add_parser("gromov", parents=[common], help="Gromov product (x|y)_p in a graph file")
    s.add_argument("--graph", required=True)
    s.add_argument("--x", type=int, required=True)
    s.add_argument("--y", type=int, required=True)
    s.add_argument("--p", type=int, required=True)
    s.set_defaults(func=cmd_gromov, default_format="text")

    s = sub.add_parser("morse", parents=[common], help="empirical Morse gauge table of a path")
    s.add_argument("--graph", help="graph file; with --path as comma-separated vertex ids")
    s.add_argument("--path")
    s.add_argument("--rank", type=int, default=2)
    s.add_argument("--radius", type=int, default=32)
    s.add_argument("--start", default="", help="free-group word; the path is the geodesic start..end")
    s.add_argument("--end", default="")
    s.add_argument("--grid", help="comma-separated lambda:epsilon pairs")
    s.add_argument("--maxlen", type=int, default=16)
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_morse, default_format="csv")

    s = sub.add_parser("crossratio", parents=[common], help="center cross-ratio of four boundary points")
    for name in "abcd":
        s.add_argument(f"--{name}", required=True)
    s.add_argument("--K", type=int, default=0)
    s.add_argument("--depth", type=int, default=None)
    s.add_argument("--paulin", action="store_true")
    s.add_argument("--modified", action="store_true")
    s.add_argument("--delta", default="0")
    s.add_argument("--model-radius", type=int, default=64)
    s.set_defaults(func=cmd_crossratio, default_format="text")

    s = sub.add_parser("flips", parents=[common], help="chain of small flips between two triples")
    s.add_argument("--start", required=True, help="three comma-separated boundary points")
    s.add_argument("--end", required=True)
    s.add_argument("--K", type=int, default=0)
    s.add_argument("--C", default="1")
    s.add_argument("--model-radius", type=int, default=64)
    s.set_defaults(func=cmd_flips, default_format="text")

    for name, func, fmt in (("synth", cmd_synth, "csv"), ("agree", cmd_agree, "csv")):
        s = sub.add_parser(name, parents=[common], help="synthesize f_K from an automorphism" if name == "synth" else "convergence counts of tripod vertices along a ray")
        s.add_argument("--phi", required=True, help='e.g. "a=a,b=ab"')
        s.add_argument("--phi-inv", default=None)
        s.add_argument("--K", type=int, default=0)
        if name == "synth":
            s.add_argument("--radius", type=int, default=4)
            s.add_argument("--depth", type=int, default=None)
        else:
            s.add_argument("--q", required=True)
            s.add_argument("--depths", default="4,6,8")
            s.add_argument("--eta", type=int, default=0)
        s.set_defaults(func=func, default_format=fmt)

    s = sub.add_parser("hhs", parents=[common], help="toy hierarchically hyperbolic structures")
    s.add_argument("action", choices=("distfit", "morsecheck", "xratio"))
    s.add_argument("--structure", choices=("tree", "product"), default="tree")
    s.add_argument("--rank", type=int, default=2)
    s.add_argument("--radius", type=int, default=6)
    s.add_argument("--sigma", type=int, default=1)
    s.add_argument("--pairs", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--start", default="", help="path start (product vertices as w1:w2)")
    s.add_argument("--end", default="")
    s.add_argument("--grid")
    s.add_argument("--B-cut", dest="B_cut", type=int, default=2)
    s.add_argument("--L", type=int, default=2)
    s.add_argument("--maxlen", type=int, default=14)
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    for name in "abcd":
        s.add_argument(f"--{name}")
    s.add_argument("--K", type=int, default=0)
    s.set_defaults(func=cmd_hhs, default_format="csv")
    return p


def _inconclusive(rep: Report) -> bool:
    return rep.flags.get("exhaustive") is False or rep.results.get("morse", True) is None and "morse" in rep.results


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "hhs" and args.action == "xratio" and not all(getattr(args, n) for n in "abcd"):
        print("morse-scope: error: hhs xratio needs --a --b --c --d", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.command == "morse" and bool(args.graph) != bool(args.path):
        print("morse-scope: error: --graph and --path go together", file=sys.stderr)
        return EXIT_PRECONDITION
    try:
        rep = args.func(args)
    except (ValueError, OutOfBallError, MemoryError, OSError, FlipError, NotAnAutomorphism, DisconnectedGraphError, RuntimeError) as e:
        print(f"morse-scope: error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    fmt = args.format or args.default_format
    text = rep.render(fmt, _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat())
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_INCONCLUSIVE if _inconclusive(rep) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
