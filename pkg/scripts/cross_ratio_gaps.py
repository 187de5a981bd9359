"""Distribution of |Paulin| minus center cross-ratio over random quadruples, per K."""

import random
from collections import Counter
from dataclasses import dataclass

from morse_scope.centers import cross_ratio_centers, paulin_cross_ratio
from morse_scope.groups import FreeGroupModel, random_distinct_points

from _config import parse_config, write_rows


@dataclass
class Config:
    quadruples: int = 500
    ks: tuple = (0, 1, 2, 3)
    seed: int = 0
    max_prefix: int = 3
    max_period: int = 2


def main(argv=None):
    cfg, out = parse_config(Config, argv)
    model = FreeGroupModel(2, 96)
    rng = random.Random(cfg.seed)
    hist = {K: Counter() for K in cfg.ks}
    for _ in range(cfg.quadruples):
        q = random_distinct_points(rng, 4, max_prefix=cfg.max_prefix, max_period=cfg.max_period)
        p = abs(paulin_cross_ratio(model, *q))
        for K in cfg.ks:
            hist[K][cross_ratio_centers(model, *q, K) - p] += 1
    rows = [(K, str(g), n, 4 * K + 2) for K in cfg.ks for g, n in sorted(hist[K].items())]
    write_rows(("K", "centers_minus_paulin", "count", "bound"), rows, out, cfg)


if __name__ == "__main__":
    main()
