"""Finite, exact experiments on Morse boundaries, centers of ideal triangles and cross-ratios.

Modules:

* ``metric``: hop-metric graphs, geodesics, Gromov products, slimness, quasi-geodesic checks
* ``groups``: free-group balls, eventually periodic boundary points, products of trees
* ``morse``: branch-and-bound Morse defect tables
* ``centers``: K-center sets, cross-ratios and small-flip chains
* ``synthesis``: quasi-isometries rebuilt from boundary maps
* ``hhs``: toy hierarchically hyperbolic structures
"""

__version__ = "0.1.0"
