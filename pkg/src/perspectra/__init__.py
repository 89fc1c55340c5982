"""Perspective functions in convex analysis: values, recession, subdifferentials and calculus."""

from .core import INF, Ball, ConvexFunction, Flags, PerspectraError
from .perspective import Perspective, PerspectivePoint, SubgradientPair
from .catalog import build
from .calculus import (scale_add, precompose_linear, compose_monotone, direct_sum,
                       AffineMap, trex, expectation_perspective, IntervalK, marginal,
                       constrained_perspective, generalized_huber_perspective)
from .divergences import phi_divergence, kl, power_divergence
from .functionals import Grid, fisher_information, total_variation

__version__ = "0.1.0"
