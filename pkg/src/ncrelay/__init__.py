"""Toolkit for simulating bidirectional multi-hop amplify-and-forward relay
chains with physical-layer network coding, and for estimating the composite
channel parameters observable at the end nodes.

Subpackages cover the signal-level simulator, LMMSE/ML estimators,
closed-form MSE/CRLB performance bounds and a Monte-Carlo experiment driver.
"""

from .numeric import RngStream, sample_cgauss, projection_onto_columns, invert_hermitian
from .channel import (
    PowerProfile,
    ChannelRealization,
    Gains,
    ThetaStatistics,
    draw_channels,
    compute_gains,
    composite_theta,
    noise_cov_z3,
)
from .training import TrainingSet, build_training, measured_rho
from .simulator import (
    FourHopTrainingObservation,
    DataExchangeRecord,
    MultihopGains,
    run_training_round_4hop,
    run_data_exchange_4hop,
    run_training_2Nhop,
    run_data_exchange_2Nhop,
    MultihopCsi,
    multihop_pilot_csi,
    point_to_point_baseline,
    effective_snr_at_t1,
    aesnr_theoretical,
)
from .estimators import ThetaEstimate, lmmse_estimate, ml_estimate
from .experiments import ExperimentConfig, run_experiment, emit_csv

__all__ = [
    "RngStream",
    "sample_cgauss",
    "projection_onto_columns",
    "invert_hermitian",
    "PowerProfile",
    "ChannelRealization",
    "Gains",
    "ThetaStatistics",
    "draw_channels",
    "compute_gains",
    "composite_theta",
    "noise_cov_z3",
    "TrainingSet",
    "build_training",
    "measured_rho",
    "FourHopTrainingObservation",
    "DataExchangeRecord",
    "MultihopGains",
    "run_training_round_4hop",
    "run_data_exchange_4hop",
    "run_training_2Nhop",
    "run_data_exchange_2Nhop",
    "MultihopCsi",
    "multihop_pilot_csi",
    "point_to_point_baseline",
    "effective_snr_at_t1",
    "aesnr_theoretical",
    "ThetaEstimate",
    "lmmse_estimate",
    "ml_estimate",
    "ExperimentConfig",
    "run_experiment",
    "emit_csv",
]
