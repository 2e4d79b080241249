"""Cascaded spin-optomechanics simulator and conditional-state estimator.

Frequency-domain model of an atomic spin oscillator cascaded with a
cavity-optomechanical system read out by homodyne detection, with
Wiener-filter conditional state estimation, EPR entanglement analysis,
exact synthetic-record generation and MCMC parameter estimation.
"""

from .core import (DUAN_THRESHOLD, INPUT_CHANNELS, OUTPUT_CHANNELS,
                   VACUUM_LIGHT_PSD, FrequencyGrid, hz_to_rad, mix_loss,
                   rad_to_hz, rotation_matrix)
from .params import (ChainParams, OptoMechParams, SpinParams, SystemParams,
                     bath_occupancy, gamma_from_quality, load_config,
                     params_from_dict)
from .chain import (OutputSpectra, SimpleEprParams, default_grid,
                    input_psd_diag, measured_psd, measurement_floor,
                    noise_budget, output_cross_spectrum,
                    simplified_epr_readout, transfer_matrix,
                    unconditional_covariance)
from .wiener import (CorrelationSet, WienerKernel, closed_form_limits,
                     conditional_covariance, conditional_ladder,
                     conditional_trajectory, correlations_from_psd,
                     filter_frequency_response, levinson_solve, solve_wiener)
from .epr import (EprWeights, demodulate_trajectory, epr_basis_covariance,
                  epr_variance, minimize_epr, null_antidiagonal_rotation,
                  rotate_spin_basis)
from .synth import TimeRecord, ensemble_conditional_oracle, synthesize_joint
from .pipeline import ConditionalResult, PipelineSettings, run_conditional

__version__ = "0.1.0"
