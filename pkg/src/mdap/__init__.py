"""Solvers, oracles and benchmarks for random 3-dimensional assignment problems."""

__version__ = "0.1.0"

from .axial import AxialRunReport, axial_greedy, axial_lower_bound, dfm_slice_bound
from .bdts import AltTree, BdtsReport, BdtsSchedule, RetryPolicy, apply_tree, bdts, final_phase, find_tree, greedy_phase, main_phase, make_schedule
from .bench import ExperimentConfig, ExperimentRecord, fit_scaling, run_trials
from .bilinear import BilinearIterate, bilinear_alternate, bilinear_objective, solve_fixed_y, solve_fixed_z
from .errors import (CapacityError, DegenerateFit, Exhausted, Infeasible, InstanceFormatError,
                     InstanceLengthError, InstanceVersionError, MdapError, ScheduleError)
from .exact import exact_axial, exact_planar, exact_planar_by_matching, parisi_value, planar_row_min_lower_bound
from .fileio import load_instance, save_instance
from .matching import MatchMatrix, brute_force_matching, min_cost_matching
from .model import (CostTensor, LatinAssignment, PartialState, PlanarAssignment, is_latin_assignment,
                    is_planar_assignment, mix_seed, sample_tensor)
from .oracle import FixedCosts, RefreshableCosts, oracle_query
