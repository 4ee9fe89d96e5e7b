"""Hop-bounded maximum group friending on heterogeneous social graphs."""

from .evaluate import dks_comparator, gen_random, run_experiment, sample_subgraph
from .exact import BallTooLarge, ExactConfig, TimeBudgetExceeded, brute_force_oracle, solve_exact
from .graph import (INF, GraphError, HeteroGraph, ParseError, ball, format_graph, hop_distance,
                    parse_graph, read_graph, write_graph)
from .linkpred import SelectionPolicy, score_pairs, select_edges
from .maxgf import MaxGFConfig, peel_at_least_p, post_process, solve_maxgf
from .objective import (Query, Solution, average_weight, is_feasible, max_pairwise_hop,
                        total_potential_weight)

__version__ = "0.1.0"
