"""Numerical laboratory for perturbed solitons of the focusing cubic NLS in one dimension.

Modules: closed-form sech transforms (kernels), the linearized operator and
its Jost solutions (operator), the distorted Fourier transform (transform),
quadratic and cubic interaction symbols (distributions), the split-step solver
(evolution), modulation tracking (modulation), profile diagnostics
(diagnostics), the end-to-end run (pipeline) and the command line (cli).
"""

from .errors import SolitonLabError
from .grids import FrequencyGrid, SpatialGrid

__all__ = ["FrequencyGrid", "SolitonLabError", "SpatialGrid"]
__version__ = "0.1.0"
