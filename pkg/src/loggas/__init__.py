"""loggas: a numerical laboratory for interacting Brownian motions with
logarithmic repulsion and their random-matrix equilibria."""

__version__ = "0.1.0"
