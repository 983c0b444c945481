"""Gaussian adjusted projected (GAP) measures for finite-dimensional density operators."""

from .errors import GapError
from .estimators import (Accumulator, EstimatorReport, accumulate, empirical_char_fn,
                         empirical_covariance, empirical_density_operator, empirical_mean, estimate)
from .measures import (EigenvalueSequence, GaussianMeasureSpec, WeightedSample, char_fn_gaussian,
                       g_density, ga_density, log_g_density, project, sample_complex_gaussian,
                       sample_G, sample_G_batch, sample_GAP_mixture, sample_GAP_mixture_batch,
                       sample_GAP_reweight, sample_GAP_reweight_batch, truncate)
from .spectral import (DensityOperator, SpectralDecomposition, SupportRestriction, eigh,
                       maximally_mixed, pure_state, support_restriction, thermal_state,
                       trace_distance, trace_norm, validate_hermitian)
from .streams import RandomStream

__version__ = "0.1.0"
