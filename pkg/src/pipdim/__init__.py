"""Dimensionality selection for matrix-factorization word embeddings by PIP loss."""
from .corpus import (
    CooccurrenceCounts,
    TokenStream,
    Vocabulary,
    count_cooccurrences,
    split_corpus,
    tokenize,
)
from .embed import export_embedding, factorize_embedding, import_embedding
from .errors import (
    CorpusError,
    DegenerateSpectrumError,
    FormatError,
    IdentityViolation,
    NoSignalError,
    PipdimError,
)
from .evaluation import (
    AnalogyTestSet,
    RelatednessTestSet,
    analogy_accuracy,
    load_analogy,
    load_relatedness,
    relatedness_correlation,
)
from .estimation import NoiseEstimate, SpectrumEstimate, estimate_noise, estimate_spectrum_usvt
from .perturbation import (
    EmbeddingMatrix,
    SvdFactors,
    pip_loss,
    pip_matrix,
    principal_angles,
    procrustes_align,
    projector_difference_norm,
    sin_theta_bound,
    svd,
    sylvester_direction_bound,
)
from .selection import (
    PipLossCurve,
    SubOptimalIntervals,
    monte_carlo_pip_curve,
    select_dimension,
    suboptimal_intervals,
    theorem1_decomposition,
    theorem2_bound,
    theorem3_bound,
    theorem3_curve,
    variance_growth_profile,
)
from .signal import SignalMatrix, logcount_matrix, pmi_matrix, ppmi_matrix, sppmi_matrix

__version__ = "0.1.0"
