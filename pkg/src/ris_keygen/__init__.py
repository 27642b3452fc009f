"""Simulation and verification of RIS-induced channel randomness for key generation."""

__version__ = "0.1.0"

from .analytic import (
    AnalyticPrediction,
    IndependenceCheck,
    SkrResult,
    independence_condition,
    predict_distribution,
    reference_cdfs,
    skr_closed_form,
)
from .channel import ChannelModel, SampleBatch, cross_angle_channel, observation_pair, reflection_channel, sample_batch
from .errors import ModelError, NoClosedForm, NonSquareGeometry, NotDivisible, ZeroNoiseDegenerate
from .geometry import AnglePair, RisGeometry, SteeringProduct, element_alpha, element_index, steering_product, xi_components
from .stats import empirical_summary, histogram_pdf, ks_test, mi_knn
from .weights import PhaseScheme, WeightVector, mrt_phases, partition_groups, sample_cgps, sample_cips, sample_dips
