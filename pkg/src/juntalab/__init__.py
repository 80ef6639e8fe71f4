# Re-export the stable surface
from .algorithms.conjlearn import agnostic_learn, and_approximator, build_ball_event, l1_regression
from .algorithms.fourier import inverse_wht, junta_corr_exact, spectral_sample, wht
from .algorithms.ninf import estimate_ninf, norm_inf_exact
from .algorithms.reference import exact_dist_junta, exact_junta_corr_k, exact_opt_conjunction
from .algorithms.refine import RefineParams, find_high_level_coordinates, refine_coordinates
from .algorithms.tester import classical_tester, distance_estimate, quantum_sim_tester, run_with_budget
from .errors import (
  BudgetExceeded,
  CapacityError,
  ConfigError,
  DataError,
  DomainError,
  EmptyDistributionError,
  InvariantViolation,
  JuntaLabError,
  UnsupportedModeError,
)
from .models.boolfn import BooleanFunction, FourierSpectrum
from .models.conjunction import BallEvent, Conjunction, EmpiricalSampler, LabeledDataset, StreamSampler
from .models.params import ParamSchedule
from .models.report import RefinePair, TesterReport
from .oracles.coordinate import CoordinateOracleSet
from .oracles.value_oracle import ValueOracle, exact_oracle
from .services import job_log_handling
from .services.config import ExperimentConfig, load_config
from .services.experiments import run_and_report
from .services.instances import InstanceSpec, generate_instance
from .utils.utilities import update_dict

__all__ = [
  'BallEvent',
  'BooleanFunction',
  'BudgetExceeded',
  'CapacityError',
  'ConfigError',
  'Conjunction',
  'CoordinateOracleSet',
  'DataError',
  'DomainError',
  'EmpiricalSampler',
  'EmptyDistributionError',
  'ExperimentConfig',
  'FourierSpectrum',
  'InstanceSpec',
  'InvariantViolation',
  'JuntaLabError',
  'LabeledDataset',
  'ParamSchedule',
  'RefineParams',
  'RefinePair',
  'StreamSampler',
  'TesterReport',
  'UnsupportedModeError',
  'ValueOracle',
  'agnostic_learn',
  'and_approximator',
  'build_ball_event',
  'classical_tester',
  'distance_estimate',
  'estimate_ninf',
  'exact_dist_junta',
  'exact_junta_corr_k',
  'exact_opt_conjunction',
  'exact_oracle',
  'find_high_level_coordinates',
  'generate_instance',
  'inverse_wht',
  'job_log_handling',
  'junta_corr_exact',
  'l1_regression',
  'load_config',
  'norm_inf_exact',
  'quantum_sim_tester',
  'refine_coordinates',
  'run_and_report',
  'run_with_budget',
  'spectral_sample',
  'update_dict',
  'wht',
]
