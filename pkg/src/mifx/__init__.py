"""Linear feature extraction driven by one-dimensional mutual-information estimates."""
from .baselines import lda_fit, pca_fit
from .data import (DataError, Dataset, FoldPlan, NormParams, apply_normalizer, fit_normalizer,
                   load_csv, stratified_kfold, write_csv)
from .evaluation import EvaluationReport, accuracy, cross_validate, knn_classify, render_table
from .extraction import (ExtractionConfig, ProjectionMatrix, extract, objective, project,
                         redundancy_penalty, relevance)
from .ga import GaConfig, ga_optimize
from .infotheory import (HistogramConfig, bayes_error_bounds, bin_1d, entropy_binned,
                         entropy_discrete, mi_2d_cd, mi_cc, mi_cd)

__version__ = "0.1.0"
