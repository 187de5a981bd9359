"""Distortion and displacement of the synthesized f_K as the domain ball grows."""

from dataclasses import dataclass

from morse_scope.groups import FreeGroupModel
from morse_scope.synthesis import boundary_map_from_endomorphism, max_displacement, qi_distortion, synthesize_map

from _config import parse_config, write_rows


@dataclass
class Config:
    phi: str = "a=a,b=ab"
    radii: tuple = (2, 3, 4, 5, 6)
    ks: tuple = (0, 1)


def main(argv=None):
    cfg, out = parse_config(Config, argv)
    h = boundary_map_from_endomorphism(cfg.phi)
    rows = []
    for K in cfg.ks:
        f = synthesize_map(h, K, source_radius=max(cfg.radii) + 2)
        for R in cfg.radii:
            dom = FreeGroupModel(h.rank, R).words
            fit = qi_distortion(f, dom)
            direct = qi_distortion(h.word, dom)
            frontier = " ".join(f"{l}:{e}" for l, e in fit.frontier[::4])
            rows.append((K, R, str(fit.lam), str(fit.eps), str(direct.eps), max_displacement(f, h.word, dom)[0], frontier))
    write_rows(("K", "radius", "lambda", "epsilon", "phi_epsilon", "max_displacement", "frontier"), rows, out, cfg)


if __name__ == "__main__":
    main()
