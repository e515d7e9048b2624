"""Numerical toolkit for the KdV equation on a Y-junction metric graph.

Subpackages cover the scaled Airy kernel (:mod:`ygraph.specfun`),
Riemann-Liouville fractional integration (:mod:`ygraph.fracops`), the linear
KdV group and Duhamel operators (:mod:`ygraph.linops`), boundary forcing
operator classes (:mod:`ygraph.forcing`), vertex coupling matrices and the
linear solution construction (:mod:`ygraph.vertex`), a direct time-domain
graph solver (:mod:`ygraph.graphsim`), and the command-line front end
(:mod:`ygraph.cli`).
"""

__version__ = "0.1.0"
