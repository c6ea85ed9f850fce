"""gremdyn: two-level random-energy landscapes and their hopping dynamics.

A desk-scale simulator and statistical verification harness for the
non-cascading two-level model: streaming extraction of the deepest
configurations, event-driven jump dynamics on the hypercube with exact
rates, the limiting point processes, and the truncated uniform-reentry
process the dynamics converges to on ergodic time scales.
"""

__version__ = "0.1.0"

from .env import (  # noqa: F401
    EnergyOracle,
    ModelParams,
    ParameterError,
    derive,
    top_k,
)
