"""Cones, higher-order differences, derivatives along partitions, and Taylor expansion."""
from .derivatives import (DEFAULT_SCHEDULE, BernsteinReport, DerivativeTrace, bernstein_check,
                          derivative, derivative_at_zero, extract_coefficients, remainder,
                          taylor_partial)
from .differences import Difference, PrestabilityVerdict, diff, is_prestable
from .partitions import (Partition, common_refinement, find_grouping, is_refinement, phi,
                         uniform_phi)
from .spaces import (HALF_LINE, MP, BlackBoxFn, ConeSpace, from_callable, from_morphism,
                     orthant, pcs_cone, scalar_fn, to_float)

__all__ = ["DEFAULT_SCHEDULE", "BernsteinReport", "DerivativeTrace", "bernstein_check", "derivative",
           "derivative_at_zero", "extract_coefficients", "remainder", "taylor_partial", "Difference",
           "PrestabilityVerdict", "diff", "is_prestable", "Partition", "common_refinement",
           "find_grouping", "is_refinement", "phi", "uniform_phi", "HALF_LINE", "MP", "BlackBoxFn",
           "ConeSpace", "from_callable", "from_morphism", "orthant", "pcs_cone", "scalar_fn", "to_float"]
