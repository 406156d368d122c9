"""Matrix-free alternating-direction solvers for l1 minimization.

Two solver families (primal and dual splitting) covering basis pursuit and
its denoising, penalized, and l1-fidelity variants, with nonnegative and
weighted versions; proximal-gradient baselines; and a synthetic-experiment
harness with a command-line front end.
"""

__version__ = "0.1.0"

from .errors import (AdlError, ConfigError, DimensionMismatchError,
                     DivergenceError, FileFormatError, StepSizeError)
from .harness import (ExperimentConfig, ExperimentResult, MODEL_FAMILIES,
                      NoiseSpec, PARAM_GRID, PROTOCOLS, ProblemInstance,
                      RACE_GRID, RACE_GRID_BP, add_noise, gen_spikes,
                      make_instance, model_for_param,
                      run_error_vs_optimality, run_model_choice_sweep,
                      run_protocol, run_solver_race)
from .io import (canonical_json, config_hash, read_matrix, read_matrix_csv,
                 read_vector, read_vector_csv, write_matrix, write_vector,
                 write_vector_csv)
from .models import (Diagnostics, ModelSpec, compute_res, extract_l1l1,
                     l1_norm, objective_value, reformulate_l1l1, relchg,
                     relerr, snr_db)
from .operators import (AugmentedOperator, DenseOperator,
                        PartialDCTOperator, PartialWalshHadamardOperator,
                        SensingOperator, SpectralEstimate, as_complex_vector,
                        build_augmented, estimate_lambda_max, fwht,
                        make_partial_dct, make_partial_wht,
                        orthonormal_gaussian_operator)
from .prox import (project_halfspace, project_l2_ball, project_linf_ball,
                   shrink, shrink_l2)
from .solvers import (DadmParams, DadmState, FistaState, PadmParams,
                      PadmState, RunRecord, SolverOptions, dadm_bp_step,
                      dadm_bpdn_step, dadm_nonorth_step, dadm_qp_step,
                      dadm_solve, fista_solve, fista_step, ist_solve,
                      ist_step, padm_bp_step, padm_bpdn_step, padm_qp_step,
                      padm_solve)
