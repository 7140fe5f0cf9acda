"""H2 and frequency-limited H2 norms of continuous-time LTI models.

Three independent backends are provided: a modal (pole/residue) formula,
frequency-limited Gramians, and adaptive quadrature of the defining
integral.
"""
from .errors import (BackendDisagreementError, BandViolationError,
                     DegenerateSpectrumError, DimensionMismatchError,
                     H2wError, ModelParseError, NonConvergenceError,
                     NonzeroFeedthroughError, PreconditionError,
                     RealificationError, SingularPencilError,
                     SingularShiftError, SolverError, UnstableModelError)
from .model import (FrequencyBand, PoleClassification, SpectralData,
                    StateSpaceModel, classify_poles, eval_transfer,
                    spectral_decompose, validate_band)
from .spectral import (NormResult, SpectralEvaluator, h2_spectral, h2w_band,
                       h2w_limit, h2w_spectral, h2w_spectral_corollary)
from .gramian import (GramianPair, freq_limited_gramians, h2_gramian,
                      h2w_gramian, lyap_solve, s_omega)
from .quadrature import h2w_quadrature, integrand, integrate_band
from .modelio import load_model, random_model, save_model

__version__ = '0.1.0'
