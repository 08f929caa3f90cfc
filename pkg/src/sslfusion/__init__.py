"""Primary/secondary cue fusion under self-supervised learning."""

from .estimation import FusionModel, KnnRegressor, LinearMap, fit_knn, fit_linear, fuse
from .harness import CaseStudyConfig, analyze_distribution, run_case_study, table1, verify_theory
from .model import Dataset, ModelParams, ParameterError, Sample, draw
from .sensors import SensorLog, SynthConfig, load_log, pressure_to_height, synthesize_log
from .theory import (
    conditional_variance,
    expected_error_fused,
    expected_error_primary,
    fusion_favorable,
    sigma_f2_threshold,
    sigma_yf2_threshold,
    slope,
    theory_report,
)

__version__ = "0.1.0"
