"""Additive error of the thresholded distance formula as the threshold grows."""

from dataclasses import dataclass

from morse_scope.hhs import builtin_structure, fit_distance_formula, random_pairs

from _config import parse_config, write_rows


@dataclass
class Config:
    sigmas: tuple = (1, 2, 3, 4, 5)
    pairs: int = 1000
    seed: int = 0


def main(argv=None):
    cfg, out = parse_config(Config, argv)
    rows = []
    for kind in ("tree-trivial", "product-of-trees"):
        hhs = builtin_structure(kind)
        samples = random_pairs(hhs, cfg.pairs, cfg.seed)
        for sigma in cfg.sigmas:
            fit = fit_distance_formula(hhs, sigma, samples)
            rows.append((kind, sigma, str(fit.lam), str(fit.eps), fit.worst[0] if fit.worst else ""))
    write_rows(("structure", "sigma", "A", "B", "worst_pair"), rows, out, cfg)


if __name__ == "__main__":
    main()
