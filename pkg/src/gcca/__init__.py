"""Generalized CCA by intersecting the ranges of the views."""

from .baselines import cca_two_view, maxvar
from .errors import (ConvergenceError, DegenerateSampleError, DimensionError, IllPosedWarning,
                     RankError, SignalPowerError)
from .identifiability import (build_gamma, certificate_factors, certificate_gamma3,
                              check_necessary, check_theorem1, check_theorem2, intersection_dim)
from .linalg import (nullspace_basis, numeric_rank, orth, principal_angles, subspace_angle,
                     truncated_svd)
from .model import GccaModel, ModelDims, ViewSet, add_noise, canonicalize_factors, measure_snr, synthesize
from .racing import RacingConfig, RacingResult, assemble_theta, estimate_common_dim, racing

__version__ = "0.1.0"
