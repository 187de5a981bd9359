"""Gauge tables of a free-group axis segment against product horizontal segments.

The axis plateau should not depend on the segment length, while the
product defect at (3, 0) should track the radius.
"""

from dataclasses import dataclass

from morse_scope.groups import FreeGroupModel, ProductModel, word_geodesic
from morse_scope.metric import QGParams
from morse_scope.morse import DEFAULT_GRID, morse_defect, morse_gauge_estimate

from _config import parse_config, write_rows


@dataclass
class Config:
    lengths: tuple = (1, 2, 3, 4)
    radii: tuple = (2, 3, 4)
    maxlen: int = 14
    product_rank: int = 1


def main(argv=None):
    cfg, out = parse_config(Config, argv)
    rows = []
    for L in cfg.lengths:
        model = FreeGroupModel(2, L + cfg.maxlen)
        table = morse_gauge_estimate(model, word_geodesic("A" * L, "a" * L), DEFAULT_GRID, cfg.maxlen)
        for lam, eps, d, exh, _ in table.rows():
            rows.append(("free-axis", L, lam, eps, d, exh))
    q = QGParams(3, 0)
    for R in cfg.radii:
        lines = (FreeGroupModel(cfg.product_rank, R), FreeGroupModel(cfg.product_rank, R))
        path = [(w, "") for w in word_geodesic("A" * R, "a" * R)]
        rep = morse_defect(ProductModel(*lines), path, q, cfg.maxlen)
        rows.append(("product-horizontal", R, q.lam, q.eps, rep.defect, rep.exhaustive))
    write_rows(("space", "size", "lambda", "epsilon", "defect", "exhaustive"), rows, out, cfg)


if __name__ == "__main__":
    main()
