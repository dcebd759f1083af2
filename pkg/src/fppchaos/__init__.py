"""Noise sensitivity and chaos of passage times in dynamical first-passage percolation."""
from .distributions import WeightDistribution, parse_dist
from .field import DynamicalField, Edge, Region, WeightConfig
from .geodesy import analyze, geodesic, passage_time
from .influence import CensoringBudgetExceeded, estimate

__all__ = [
    "WeightDistribution", "parse_dist", "DynamicalField", "Edge", "Region", "WeightConfig",
    "analyze", "geodesic", "passage_time", "CensoringBudgetExceeded", "estimate",
]
__version__ = "0.1.0"
