"""Damped generalized approximate message passing for analysis sparsity.

The package splits into matrix-free operators (:mod:`grampa.linops`),
scalar denoisers (:mod:`grampa.denoisers`), the generic damped solver
(:mod:`grampa.gamp`), the analysis-problem assembly (:mod:`grampa.analysis`),
problem generators and metrics (:mod:`grampa.problems`), reference solvers
for testing (:mod:`grampa.reference`), and the experiment harness and CLI
(:mod:`grampa.harness`, :mod:`grampa.cli`).
"""

from .analysis import AnalysisProblem, assemble, map_objective, noiseless_floor, solve
from .denoisers import (
    AwgnChannelParams,
    BernoulliGaussianParams,
    DenoiserEval,
    L1Params,
    SnipeParams,
    awgn_output_mmse,
    bernoulli_gaussian_mmse,
    nonneg_map,
    nonneg_mmse,
    quadrature_mmse,
    snipe,
    snipe_from_slab_limit,
    soft_threshold_map,
)
from .gamp import GampConfig, GampDivergedError, GampResult, GampState, gamp_run, gamp_step, map_cost
from .linops import (
    DenseOperator,
    LinearOperator,
    SquaredMode,
    StackedOperator,
    make_fd1d,
    make_fd2d,
    make_partial_fourier_radial,
    stack,
)
from .problems import (
    add_awgn,
    gen_bg_fd_signal,
    gen_cosparse_signal,
    gen_gaussian_matrix,
    gen_tight_frame,
    nsnr,
    nsnr_db,
    shepp_logan,
)

__version__ = "0.1.0"
