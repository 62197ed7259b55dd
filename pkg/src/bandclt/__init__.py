"""Linear eigenvalue statistics of non-Hermitian random band matrices.

Simulates band ensembles with variance profiles, computes centered
linear eigenvalue statistics, and checks their Monte Carlo fluctuations
against closed-form limiting variances.
"""

__version__ = "0.1.0"

from .les import TestFunction, les_delta, spectral_norm, spectrum, trace_power
from .matgen import BandMatrix, BandSpec, EntryLaw, Topology, sample
from .profiles import PeriodizedProfile, VarianceProfile
from .theory import (KernelParams, TheoryVariance, kernel,
                     limiting_covariance, monomial_variance)

__all__ = [
    "__version__",
    "VarianceProfile", "PeriodizedProfile",
    "Topology", "BandSpec", "EntryLaw", "BandMatrix", "sample",
    "TestFunction", "trace_power", "les_delta", "spectrum", "spectral_norm",
    "KernelParams", "TheoryVariance", "kernel", "monomial_variance",
    "limiting_covariance",
]
