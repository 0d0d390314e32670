"""Switched step-size filtered-x NLMS simulation for active noise control."""

__version__ = "0.1.0"

from .core import (ControllerState, Plant, ScalingKind, anc_step, controller_output,
                   filtered_reference_step, residual_error, scaling_factor,
                   update_error_power, weight_update)
from .errors import (AllTrialsDiverged, ConfigError, DivergenceError, DomainError,
                     IngestionError, TrendFault)
from .metrics import AnrTracker, anr_step, average_trials, true_msd
from .noise import (NoiseSpec, RngStream, empirical_cf, gen_alpha_stable, gen_ar1,
                    gen_bursty, gen_white, load_noise)
from .paths import DelayLine, FirPath, fir_batch, fir_step, preset_path
from .scenario import Algorithm, Scenario, format_scenario, load_scenario, parse_scenario
from .sss import (FullMsdOracle, SssState, full_matrix_msd_step, msd_trend_step,
                  msd_trend_value, select_step, sss_iteration)
from .theory import (convergence_factor, estimate_mean_bound, ms_stability_bound,
                     optimal_step, theoretical_steady_msd)
from .harness import (BatchResult, RunResult, oracle_agreement, run_experiment, run_trial,
                      simulate, theory_report)
