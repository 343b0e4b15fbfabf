"""Constructive local lemma: finite and staged infinite resampling, computable prefixes."""

from .core import (BudgetExhausted, ConditionFailed, ConditionReport, ConditionRow,
                   DependencyGraph, Event, FiniteInstance, InstanceError, Variable,
                   build_dependency_graph, check_lll, event_probability)
from .tape import BitTape, RandomTape, TapeExhausted, sample_variable
from .finite import (ExecutionLog, ResampleRecord, WitnessTree, build_witness_tree,
                     first_violated, priority_order, resample_bound, resample_stats,
                     sample_initial, solve_finite, tree_weight)
from .infinite import (EffectiveInstance, ExactDistribution, ExtractedPrefix,
                       ExtractionError, PrefixSnapshot, StabilizationBound, StagedRun,
                       enumerate_exact_distribution, extract_computable_prefix,
                       order_events, reach, run_stage, run_stages, stabilization_bound,
                       stabilization_frequency, verify_prefix)
from .cnf import (ChainCNF, Clause, ClauseFamily, ClauseList, CnfFamilyParams,
                  chain_instance, check_varsize_condition, cnf_instance, min_clause_size,
                  to_finite, trim_clauses, uniform_cnf_instance, varsize_cnf_instance)
from .patterns import (ForbiddenSet, PatternSet, avoid_patterns_2d, avoid_substrings,
                       pattern_params, periodic, rectangle_cnf, spiral_cell, spiral_index,
                       substring_cnf, zero_rectangles, zero_runs, zigzag)

__version__ = "0.1.0"
