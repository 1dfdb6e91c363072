"""Directed Steiner tree and set cover workbench: approximation, exact oracles, hardness reductions."""
from .dst_core import (ApproxRun, BoundedCoverView, DecompositionAudit, DensityPick, PhiCore, TreePiece,
                       aligned_phi_core, assemble, bounded_set_cover, check_phi_core, decomposition_audit,
                       dst_approx, dst_approx_detailed, find_phi_core, greedy_bounded_cover, min_density_set,
                       phi_for)
from .errors import (BadParameters, BudgetExceeded, DegreeMismatch, NoCoverableTerminal, NoFeasibleRoot,
                     ParameterMismatch, ParseError, StalledOracle, UncoverableInstance, UnreachableCoreVertex,
                     UnreachableTerminal, ValidationError, WorkbenchError)
from .exact import (SteinerTable, all_pairs_distances, brute_force_dst, brute_force_set_cover,
                    dreyfus_wagner_directed, min_cost_tree_from_set)
from .greedy import (SubmodularOracle, chvatal_bound, coverage_oracle, greedy_set_cover,
                     greedy_submodular_cover)
from .instances import (ArborescenceSolution, CoverSolution, DstInstance, Labeling, LabelCoverInstance,
                        ListLabeling, SetCoverInstance, leafify, set_cover_as_dst, validate)
from .reductions import (DisperserGraph, PartitionSystem, ReductionParams, agreement_reduction,
                         best_labeling, build_disperser, build_partition_system, check_disperser,
                         lc_to_set_cover, measure_agreement_soundness, run_pipeline, schedule_params,
                         verify_partition_system)

__version__ = "0.1.0"
