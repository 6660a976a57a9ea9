"""Nash equilibria of power-allocation games on fading interference channels.

Three information structures are supported: full knowledge of the joint
channel state (``Info.FULL``), each receiver's incident gains
(``Info.INCIDENT``) and the direct gain only (``Info.DIRECT``).
"""

from .bounds import (BoundProfile, BoundReport, bound_floors, lower_bound_maximizer,
                     lower_bound_profile, lower_bound_rate, ne_vs_bound_report)
from .channel import (ChannelSpec, GainDistribution, Info, StateSpace, Visibility,
                      build_gain_distribution, enumerate_states, state_probability,
                      visible_index)
from .errors import (ConfigInvalid, DimensionMismatch, IcnashError, IndexOutOfRange,
                     IoError, LengthMismatch, NegativeValue, NonConvergence,
                     ParseError, ProbSumInvalid, RestartLimitExceeded, SizeOverflow,
                     VisibilityMismatch, ZeroDirectGain)
from .experiments import (PRESETS, ExperimentConfig, Row, StatRow, emit_csv,
                          emit_stats_csv, parse_config, parse_config_text,
                          phase1_stats, preset_channel, random_feasible_profile,
                          read_csv, run_preset, solve_one, solve_point)
from .game import (GameSpec, NeReport, PowerPolicy, StrategyProfile,
                   budgets_from_snr, epsilon_ne_check, expand_policy,
                   expand_profile, is_feasible, rate, rates, sinr, sinr_matrix,
                   sum_rate)
from .kernels import BACKEND
from .operators import (AffineOperator, MonotoneReport, ViMap, build_affine,
                        check_monotone, eval_affine_F, eval_T, grad_rate,
                        grad_rate_direct, grad_rate_incident, merit,
                        stack_profile, unstack_profile)
from .projection import (ProjectionResult, best_response_full,
                         best_response_partial, interference_floor,
                         interference_floors, project_budget)
from .solvers import (SolveResult, SolverConfig, algorithm1, default_initial,
                      fixed_point_solve, gamma_schedule, merit_gradient,
                      steepest_descent_step)

__version__ = "0.1.0"
