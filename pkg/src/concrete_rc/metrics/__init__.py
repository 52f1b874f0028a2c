from .chaos import Estimate, correlation_dimension, dfa, divergence_curve, max_lyapunov
from .entropy import (approximate_entropy, match_counts, ordinal_distribution,
                      permutation_entropy, sample_entropy)
from .features import AnalysisSettings, FeatureVector, feature_vector
from .fractal import derivative_sign_changes, katz_fd, petrosian_fd

__all__ = [
    "AnalysisSettings", "Estimate", "FeatureVector", "approximate_entropy",
    "correlation_dimension", "derivative_sign_changes", "dfa", "divergence_curve",
    "feature_vector", "katz_fd", "match_counts", "max_lyapunov", "ordinal_distribution",
    "permutation_entropy", "petrosian_fd", "sample_entropy",
]
