"""Exact tabular laboratory for finite-memory POMDPs and inverse-kinematics objectives."""
from .decodability import Decoder, Verdict, check_future_decodability, check_past_decodability, derive_decoder
from .discovery import (Partition, PartitionVerdict, SeparationMatrix, compare_partitions, discover_partition,
                        ik_row_family, is_bayes_consistent, separation_matrix)
from .envs import (NavSpec, compose, dump_ik_examples, make_exo_cycle, make_fj_counterexample, make_gridworld,
                   make_navigation)
from .errors import AssumptionViolated, BudgetExceeded, DomainMismatch, NotDecodable, OutOfRange, Unreachable
from .inference import (ConditionalActionDist, LatentInverse, bayes_classifier, latent_inverse, verify_decoupling,
                        verify_identity)
from .model import BLANK, NONE, FmPomdp, Policy, diameter, reachable_latents, validate_model
from .objectives import ConditioningKey, Objective, make_key, usable_ks
from .trajectories import Trajectory, Window, enumerate_trajectories, future_window, past_window, simulate

__version__ = "0.1.0"
