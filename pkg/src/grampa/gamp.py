"""Damped generalized approximate message passing.

One sweep alternates a linear stage through the operator (with the Onsager
correction decoupling errors across iterations) and elementwise denoising on
the output and input sides.  Damping blends each updated quantity with its
previous value; the first sweep always runs undamped so that no history is
needed.  The proximal (MAP) and posterior-mean (MMSE) variants differ only
in the denoisers injected, never in the sweep itself.

Output and input denoisers are dispatched over contiguous blocks: a block
list ``[(m, f), (d, h)]`` applies ``f`` to the first m rows and ``h`` to the
next d, which is exactly the shape the stacked-operator assembly produces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import LinearOperator

# (block length, denoiser) pairs covering a vector by contiguous slices
Blocks = list


@dataclass
class GampConfig:
    """Solver knobs.

    beta0 is the damping factor used from the second sweep on; t_max caps
    the sweep count; eps is the relative-change stop threshold (0 disables
    early stopping).  The variance clamp bounds default to
    1e-14 / 1e+14 times the largest initial input-side variance.
    """

    beta0: float = 1.0
    t_max: int = 200
    eps: float = 0.0
    mode: str = "mmse"
    variance_floor: float | None = None
    variance_ceiling: float | None = None
    record_trace: bool = False

    def __post_init__(self):
        if not 0.0 < self.beta0 <= 1.0:
            raise ValueError("beta0 must be in (0, 1]")
        if self.t_max < 1:
            raise ValueError("t_max must be at least 1")
        if self.eps < 0.0:
            raise ValueError("eps must be nonnegative")
        if self.mode not in ("map", "mmse"):
            raise ValueError("mode must be 'map' or 'mmse'")
        if self.variance_floor is not None and not self.variance_floor > 0.0:
            raise ValueError("variance_floor must be positive")
        if (
            self.variance_floor is not None
            and self.variance_ceiling is not None
            and not self.variance_floor < self.variance_ceiling
        ):
            raise ValueError("variance_floor must be below variance_ceiling")

    def clamp_bounds(self, init_nu_x) -> tuple[float, float]:
        ref = float(np.max(init_nu_x))
        floor = self.variance_floor if self.variance_floor is not None else 1e-14 * ref
        ceiling = self.variance_ceiling if self.variance_ceiling is not None else 1e14 * ref
        return floor, ceiling


@dataclass
class GampState:
    """Every per-iteration vector of one sweep, plus the sweep counter."""

    x_hat: np.ndarray
    nu_x: np.ndarray
    x_tilde: np.ndarray
    s_hat: np.ndarray
    nu_s: np.ndarray
    p_hat: np.ndarray
    nu_p: np.ndarray
    z_hat: np.ndarray
    nu_z: np.ndarray
    r_hat: np.ndarray
    nu_r: np.ndarray
    t: int = 0


@dataclass
class GampResult:
    x_hat: np.ndarray
    iterations: int
    converged: bool
    # per-sweep (damping used, relative change) when trace recording is on
    trace: list[tuple[float, float]] | None = None


class GampDivergedError(RuntimeError):
    """Raised when an iterate leaves the finite range despite clamping.

    Carries the last all-finite state so callers can score a partial run.
    """

    def __init__(self, state: GampState, message: str = "iterate diverged"):
        super().__init__(f"{message} at sweep {state.t}")
        self.state = state


def _check_blocks(blocks, total, side):
    lengths = [length for length, _ in blocks]
    if any(l < 1 for l in lengths) or sum(lengths) != total:
        raise ValueError(f"{side} denoiser blocks must tile {total} entries, got {lengths}")


def _apply_blocks(blocks, hat, nu):
    values = np.empty_like(hat)
    derivs = np.empty_like(hat)
    k = 0
    for length, den in blocks:
        sl = slice(k, k + length)
        ev = den(hat[sl], nu[sl])
        values[sl] = ev.value
        derivs[sl] = ev.derivative
        k += length
    return values, derivs


def initial_state(op: LinearOperator, init_x, init_nu_x) -> GampState:
    """State before the first sweep: s_hat = 0, history slots zeroed."""
    x = np.array(init_x, dtype=float)
    nu = np.array(init_nu_x, dtype=float)
    if x.shape != (op.cols,) or nu.shape != (op.cols,):
        raise ValueError("init vectors must have length op.cols")
    if not np.all(nu > 0.0):
        raise ValueError("initial variances must be positive")
    rows = np.zeros(op.rows)
    return GampState(
        x_hat=x,
        nu_x=nu,
        x_tilde=x.copy(),
        s_hat=rows.copy(),
        nu_s=rows.copy(),
        p_hat=rows.copy(),
        nu_p=rows.copy(),
        z_hat=rows.copy(),
        nu_z=rows.copy(),
        r_hat=x.copy(),
        nu_r=np.zeros(op.cols),
        t=0,
    )


def gamp_step(
    op: LinearOperator,
    output_blocks: Blocks,
    input_blocks: Blocks,
    state: GampState,
    config: GampConfig,
    floor: float,
    ceiling: float,
) -> GampState:
    """One full sweep; damping is 1 on the first sweep, beta0 afterwards.

    Variances are clamped into [floor, ceiling] after each variance update;
    in particular a negative output-side precision candidate (possible with
    non-log-concave denoisers) lands on the floor instead of propagating.
    """
    t = state.t + 1
    beta = 1.0 if t == 1 else config.beta0

    # Non-finite intermediates are legal here: divergence is detected (and
    # typed) by the caller from the returned state, so IEEE overflow on the
    # way there is not an error condition.
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        nu_p = beta * op.squared_forward(state.nu_x) + (1.0 - beta) * state.nu_p
        nu_p = np.clip(nu_p, floor, ceiling)
        p_hat = op.forward(state.x_hat) - nu_p * state.s_hat

        z_hat, f_prime = _apply_blocks(output_blocks, p_hat, nu_p)
        nu_z = nu_p * f_prime

        nu_s = beta * ((1.0 - nu_z / nu_p) / nu_p) + (1.0 - beta) * state.nu_s
        nu_s = np.clip(nu_s, floor, ceiling)
        s_hat = beta * ((z_hat - p_hat) / nu_p) + (1.0 - beta) * state.s_hat

        x_tilde = beta * state.x_hat + (1.0 - beta) * state.x_tilde
        nu_r = beta * (1.0 / op.squared_adjoint(nu_s)) + (1.0 - beta) * state.nu_r
        nu_r = np.clip(nu_r, floor, ceiling)
        r_hat = x_tilde + nu_r * op.adjoint(s_hat)

        x_hat, g_prime = _apply_blocks(input_blocks, r_hat, nu_r)
        nu_x = np.clip(nu_r * g_prime, floor, ceiling)

    return GampState(
        x_hat=x_hat,
        nu_x=nu_x,
        x_tilde=x_tilde,
        s_hat=s_hat,
        nu_s=nu_s,
        p_hat=p_hat,
        nu_p=nu_p,
        z_hat=z_hat,
        nu_z=nu_z,
        r_hat=r_hat,
        nu_r=nu_r,
        t=t,
    )


def gamp_run(
    op: LinearOperator,
    output_blocks: Blocks,
    input_blocks: Blocks,
    init_x,
    init_nu_x,
    config: GampConfig,
) -> GampResult:
    """Iterate sweeps until the relative change drops below eps or t_max.

    The stop test compares consecutive input estimates in Euclidean norm;
    a zero-norm new estimate never stops the run (it only recurs on exactly
    degenerate problems).  A non-finite iterate raises
    :class:`GampDivergedError` holding the last finite state.
    """
    _check_blocks(output_blocks, op.rows, "output")
    _check_blocks(input_blocks, op.cols, "input")
    floor, ceiling = config.clamp_bounds(init_nu_x)

    state = initial_state(op, init_x, init_nu_x)
    trace: list[tuple[float, float]] | None = [] if config.record_trace else None
    converged = False
    while state.t < config.t_max:
        prev_x = state.x_hat
        new_state = gamp_step(op, output_blocks, input_blocks, state, config, floor, ceiling)
        if not (
            np.all(np.isfinite(new_state.x_hat))
            and np.all(np.isfinite(new_state.z_hat))
            and np.all(np.isfinite(new_state.r_hat))
        ):
            raise GampDivergedError(state)
        state = new_state

        denom = float(np.linalg.norm(state.x_hat))
        change = float(np.linalg.norm(prev_x - state.x_hat))
        rel = change / denom if denom > 0.0 else np.inf
        if trace is not None:
            trace.append((1.0 if state.t == 1 else config.beta0, rel))
        if denom > 0.0 and rel < config.eps:
            converged = True
            break

    return GampResult(
        x_hat=state.x_hat.copy(),
        iterations=state.t,
        converged=converged,
        trace=trace,
    )


def map_cost(op: LinearOperator, output_penalties: Blocks, input_penalties: Blocks, x) -> float:
    """Composite objective sum_i f_i([Ax]_i) + sum_n g_n(x_n).

    Penalty blocks mirror the denoiser blocks: (length, callable) pairs where
    each callable maps a vector of transform outputs (or coefficients) to
    elementwise penalty values.
    """
    x = np.asarray(x, dtype=float)
    _check_blocks(output_penalties, op.rows, "output")
    _check_blocks(input_penalties, op.cols, "input")
    z = op.forward(x)
    total = 0.0
    k = 0
    for length, pen in output_penalties:
        total += float(np.sum(pen(z[k : k + length])))
        k += length
    k = 0
    for length, pen in input_penalties:
        total += float(np.sum(pen(x[k : k + length])))
        k += length
    return total
