"""Overlapping large-scale benchmarks, DSM decomposition and hybrid cooperative co-evolution."""
from .aob import (
    ProblemInstance,
    ProblemSpec,
    evaluate,
    gamma_preset,
    generate_instance,
    ground_truth_theta,
    load_instance,
    save_instance,
    true_subspaces,
)
from .decomposition import (
    Decomposition,
    DesignStructureMatrix,
    accuracy,
    degree_of_overlap,
    detect_interaction,
    is_ideal_decomposition,
    random_decomposition,
    rddsm,
)
from .hcc import HccConfig, RunTrace, blend_overlap, glo_fes, run_cc, run_hcc, run_nda
from .kernels import BACKEND
from .optimizers import OptimizerConfig, OptimizerRun, Problem, cmaes_optimize, make_subspace_objective, sep_cmaes_optimize
from .stats import wilcoxon_rank_sum

__version__ = "0.1.0"
