"""Surrogate-assisted shape optimization of hydropower draft tubes.

Pipeline: B-spline geometry parameterization -> Latin hypercube sampling ->
synthetic quasi-physics evaluation -> outlier-filtered dataset -> MLP
surrogate -> single-/multi-objective optimization -> TOPSIS selection.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
