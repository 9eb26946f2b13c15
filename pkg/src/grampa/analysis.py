"""Assembly of analysis-sparsity problems into message-passing instances.

An analysis problem couples a measurement operator (quadratic loss on the
observed values), an analysis operator whose output should be sparse, and an
optional pixel-domain constraint.  Stacking the two operators and assigning
the measurement loss to the first block of rows and the analysis regularizer
to the second turns the whole thing into one generic solver instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import denoisers as dn
from .gamp import GampConfig, GampResult, gamp_run
from .linops import LinearOperator, stack

PIXEL_REGS = ("none", "nonneg", "fixed-zero")

AnalysisReg = dn.SnipeParams | dn.L1Params | dn.BernoulliGaussianParams


@dataclass
class AnalysisProblem:
    """Declarative description of one recovery instance.

    ``phi`` maps the N unknowns to M measurements ``y`` observed in AWGN of
    per-row variance ``noise_var``; ``omega`` is the D x N analysis operator.
    ``analysis_reg`` picks the sparsifying penalty on the analysis outputs
    (the absolute-value penalty for the proximal mode; the spike-and-slab
    thresholder or the Bernoulli-Gaussian prior for the posterior-mean
    mode), and ``pixel_reg`` an optional coefficient-domain constraint.
    """

    phi: LinearOperator
    omega: LinearOperator
    y: np.ndarray
    noise_var: float
    analysis_reg: AnalysisReg
    pixel_reg: str = "none"
    mode: str = "mmse"

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.phi.cols != self.omega.cols:
            raise ValueError("phi and omega must share the input dimension")
        if self.y.shape != (self.phi.rows,):
            raise ValueError("y must have one entry per measurement row")
        if not self.noise_var >= 0.0:
            raise ValueError("noise_var must be nonnegative")
        if self.pixel_reg not in PIXEL_REGS:
            raise ValueError(f"pixel_reg must be one of {PIXEL_REGS}")
        if self.mode not in ("map", "mmse"):
            raise ValueError("mode must be 'map' or 'mmse'")
        if self.mode == "map" and not isinstance(self.analysis_reg, dn.L1Params):
            raise ValueError("proximal mode supports only the l1 analysis penalty")
        if self.mode == "mmse" and isinstance(self.analysis_reg, dn.L1Params):
            raise ValueError(
                "posterior-mean mode rejects the l1 penalty; no Laplacian-prior "
                "denoiser is implemented"
            )

    @property
    def n(self) -> int:
        return self.phi.cols

    @property
    def m(self) -> int:
        return self.phi.rows

    @property
    def d(self) -> int:
        return self.omega.rows


def _pixel_denoiser(problem: AnalysisProblem):
    if problem.pixel_reg == "none":
        return dn.IdentityDenoiser()
    if problem.pixel_reg == "fixed-zero":
        return dn.ZeroDenoiser()
    if problem.mode == "map":
        return dn.NonnegMapDenoiser()
    return dn.NonnegMmseDenoiser()


def assemble(problem: AnalysisProblem):
    """Return (stacked operator, output blocks, input blocks).

    Rows 1..M of the stacked operator carry the measurement loss with the
    observed values baked in; rows M+1..M+D carry the analysis regularizer;
    the single input block carries the pixel constraint.
    """
    op = stack(problem.phi, problem.omega)
    loss = dn.AwgnChannelParams(y=problem.y, noise_var=problem.noise_var)
    output_blocks = [(problem.m, loss), (problem.d, problem.analysis_reg)]
    input_blocks = [(problem.n, _pixel_denoiser(problem))]
    return op, output_blocks, input_blocks


def map_penalty_blocks(problem: AnalysisProblem):
    """Penalty blocks matching :func:`assemble`, for objective evaluation."""
    if problem.mode != "map":
        raise ValueError("penalty blocks are defined for the proximal mode only")
    op, output_blocks, input_blocks = assemble(problem)
    out_pens = [(length, den.penalty) for length, den in output_blocks]
    in_pens = [(length, den.penalty) for length, den in input_blocks]
    return op, out_pens, in_pens


def map_objective(problem: AnalysisProblem, x) -> float:
    """Direct evaluation of the proximal-mode objective at x.

    ||y - phi x||^2 / (2 noise_var) + lam * ||omega x||_1, plus the indicator
    of the pixel constraint.
    """
    if problem.mode != "map":
        raise ValueError("objective is defined for the proximal mode only")
    x = np.asarray(x, dtype=float)
    resid = problem.y - problem.phi.forward(x)
    cost = float(resid @ resid) / (2.0 * problem.noise_var)
    cost += problem.analysis_reg.lam * float(np.sum(np.abs(problem.omega.forward(x))))
    if problem.pixel_reg == "nonneg" and np.any(x < 0.0):
        return np.inf
    if problem.pixel_reg == "fixed-zero" and np.any(x != 0.0):
        return np.inf
    return cost


def default_init(problem: AnalysisProblem, op: LinearOperator):
    """Zero estimate plus an energy-matched initial variance.

    None of the supported pixel channels has a finite prior variance, so the
    initial spread comes from the measurement energy:
    ||y||^2 N / (M * sum of squared operator entries), floored at 1 when the
    measurements are identically zero.
    """
    init_x = np.zeros(problem.n)
    frob = op.frobenius_norm_sq()
    energy = float(problem.y @ problem.y)
    nu0 = energy * problem.n / (problem.m * frob) if energy > 0.0 and frob > 0.0 else 1.0
    return init_x, np.full(problem.n, nu0)


def solve(
    problem: AnalysisProblem,
    config: GampConfig,
    init_x=None,
    init_nu_x=None,
) -> GampResult:
    """Assemble and run; the result's estimate has length N."""
    op, output_blocks, input_blocks = assemble(problem)
    if init_x is None or init_nu_x is None:
        default_x, default_nu = default_init(problem, op)
        init_x = default_x if init_x is None else init_x
        init_nu_x = default_nu if init_nu_x is None else init_nu_x
    return gamp_run(op, output_blocks, input_blocks, init_x, init_nu_x, config)


def noiseless_floor(y, rel: float = 1e-12) -> float:
    """Noise-variance stand-in for noiseless data: rel * mean squared y."""
    y = np.asarray(y, dtype=float)
    ms = float(y @ y) / max(len(y), 1)
    return rel * ms if ms > 0.0 else rel
