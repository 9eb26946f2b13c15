"""Synthetic signals, operators, images, and the recovery metric.

Every generator is a pure function of its arguments plus a 64-bit seed fed
to numpy's PCG64 generator, so repeated calls are bitwise identical on any
platform.  The draw order inside each generator is fixed and part of the
reproducibility contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import DenseOperator, LinearOperator


@dataclass(frozen=True)
class TrialSpec:
    """Declarative description of one synthetic trial.

    Either ``cosparsity`` (exact count of zeroed analysis coefficients) or
    ``sparsity_rate`` (Bernoulli rate of nonzeros) applies, depending on the
    signal family.  The seed fully determines the trial.
    """

    n: int
    m: int
    d: int
    seed: int
    cosparsity: int | None = None
    sparsity_rate: float | None = None
    snr_db: float = np.inf


def gen_bg_fd_signal(n: int, sparsity_rate: float, seed: int) -> np.ndarray:
    """Random-walk signal whose first differences are Bernoulli-Gaussian.

    Draws n-1 jump indicators at ``sparsity_rate``, n-1 standard-normal jump
    sizes, and a standard-normal starting value, then cumulatively sums.
    """
    if not 0.0 < sparsity_rate < 1.0:
        raise ValueError("sparsity_rate must be in (0, 1)")
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    mask = rng.uniform(size=n - 1) < sparsity_rate
    jumps = rng.standard_normal(n - 1) * mask
    x0 = rng.standard_normal()
    return x0 + np.concatenate([[0.0], np.cumsum(jumps)])


def gen_gaussian_matrix(m: int, n: int, seed: int) -> DenseOperator:
    """Dense m x n operator with i.i.d. N(0, 1/m) entries."""
    rng = np.random.default_rng(seed)
    return DenseOperator(rng.standard_normal((m, n)) / np.sqrt(m), kernel="iid-gaussian")


def gen_tight_frame(n: int, d: int, seed: int, rounds: int = 20) -> DenseOperator:
    """Random almost-uniform, almost-tight d x n frame (d >= n).

    Alternates column orthonormalization (scaled so the Gram matrix is
    (d/n) I) with row renormalization to unit norm.  The achieved tightness
    and uniformity are recorded on the returned operator as
    ``frame_metrics`` for auditability.
    """
    if d < n:
        raise ValueError("frame needs d >= n")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((d, n))
    target = np.sqrt(d / n)
    for _ in range(rounds):
        u, _, vt = np.linalg.svd(w, full_matrices=False)
        w = target * (u @ vt)
        norms = np.linalg.norm(w, axis=1, keepdims=True)
        w = w / norms
    op = DenseOperator(w, kernel="frame")
    sv = np.linalg.svd(w, compute_uv=False)
    row_norms = np.linalg.norm(w, axis=1)
    op.frame_metrics = {
        "row_norm_min": float(row_norms.min()),
        "row_norm_max": float(row_norms.max()),
        "singular_value_min": float(sv.min()),
        "singular_value_max": float(sv.max()),
        "tightness_target": float(target),
    }
    return op


def gen_cosparse_signal(omega: LinearOperator, l: int, seed: int, max_retries: int = 100) -> np.ndarray:
    """Unit-norm vector with exactly ``l`` zeroed analysis coefficients.

    A uniformly random cosupport of size l is drawn; a Gaussian vector is
    projected onto the null space of the corresponding rows of ``omega``
    (via SVD) and normalized.  Degenerate draws (trivial null space or a
    vanishing projection) are retried with a fresh cosupport.
    """
    if not 0 <= l <= omega.rows:
        raise ValueError("cosparsity must be between 0 and the analysis dimension")
    rng = np.random.default_rng(seed)
    n = omega.cols

    def row(i):
        e = np.zeros(omega.rows)
        e[i] = 1.0
        return omega.adjoint(e)

    for _ in range(max_retries):
        g = rng.standard_normal(n)
        if l == 0:
            return g / np.linalg.norm(g)
        cosupport = rng.choice(omega.rows, size=l, replace=False)
        block = np.stack([row(i) for i in cosupport])
        _, sv, vt = np.linalg.svd(block)
        tol = max(block.shape) * np.finfo(float).eps * (sv[0] if len(sv) else 0.0)
        rank = int(np.sum(sv > tol))
        if rank >= n:
            continue
        null_basis = vt[rank:]
        x = null_basis.T @ (null_basis @ g)
        norm = np.linalg.norm(x)
        if norm < 1e-8:
            continue
        return x / norm
    raise RuntimeError(f"no nontrivial null space found after {max_retries} cosupport draws")


# canonical head-phantom ellipses: half-axes, center, rotation, additive level
_PHANTOM_ELLIPSES = [
    (0.6900, 0.9200, 0.00, 0.0000, 0.0, 1.00),
    (0.6624, 0.8740, 0.00, -0.0184, 0.0, -0.98),
    (0.1100, 0.3100, 0.22, 0.0000, -18.0, -0.02),
    (0.1600, 0.4100, -0.22, 0.0000, 18.0, -0.02),
    (0.2100, 0.2500, 0.00, 0.3500, 0.0, 0.01),
    (0.0460, 0.0460, 0.00, 0.1000, 0.0, 0.01),
    (0.0460, 0.0460, 0.00, -0.1000, 0.0, 0.01),
    (0.0460, 0.0230, -0.08, -0.6050, 0.0, 0.01),
    (0.0230, 0.0230, 0.00, -0.6060, 0.0, 0.01),
    (0.0230, 0.0460, 0.06, -0.6050, 0.0, 0.01),
]


def shepp_logan(n: int) -> np.ndarray:
    """Classic ten-ellipse head phantom on an n x n grid, row-major in [0, 1].

    Pixel centers sample the square [-1, 1]^2 with image row 0 at the top
    (decreasing y).  Overlapping ellipse levels add; the result is clipped
    to [0, 1].
    """
    if n < 8:
        raise ValueError("phantom grid must be at least 8 x 8")
    coords = (np.arange(n) + 0.5) * 2.0 / n - 1.0
    x = coords[np.newaxis, :]
    y = (-coords)[:, np.newaxis]
    img = np.zeros((n, n))
    for a, b, x0, y0, phi_deg, level in _PHANTOM_ELLIPSES:
        phi = np.deg2rad(phi_deg)
        dx, dy = x - x0, y - y0
        u = dx * np.cos(phi) + dy * np.sin(phi)
        v = -dx * np.sin(phi) + dy * np.cos(phi)
        img += level * ((u / a) ** 2 + (v / b) ** 2 <= 1.0)
    return np.clip(img, 0.0, 1.0).ravel()


def add_awgn(z, snr_db: float, seed: int) -> np.ndarray:
    """Add white Gaussian noise hitting the requested SNR exactly.

    The noise draw is rescaled so that the realized ratio
    ||z||^2 / ||w||^2 equals 10^(snr_db/10); an infinite snr_db returns z
    unchanged.
    """
    z = np.asarray(z, dtype=float)
    energy = float(z @ z)
    if energy == 0.0:
        raise ValueError("cannot set an SNR against an all-zero signal")
    if np.isinf(snr_db):
        return z.copy()
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(len(z))
    w *= np.sqrt(energy / (float(w @ w) * 10.0 ** (snr_db / 10.0)))
    return z + w


def noise_variance_for_snr(z, snr_db: float) -> float:
    """Per-sample noise variance realized by :func:`add_awgn`."""
    z = np.asarray(z, dtype=float)
    if np.isinf(snr_db):
        return 0.0
    return float(z @ z) * 10.0 ** (-snr_db / 10.0) / len(z)


def nsnr(x, x_hat) -> float:
    """Recovery metric ||x||^2 / ||x_hat - x||^2 (inf for exact recovery)."""
    x = np.asarray(x, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    energy = float(x @ x)
    if energy == 0.0:
        raise ValueError("reference signal must be nonzero")
    err = x_hat - x
    with np.errstate(over="ignore"):
        err_energy = float(err @ err)
    if err_energy == 0.0:
        return np.inf
    if not np.isfinite(err_energy):
        return 0.0
    return energy / err_energy


def nsnr_db(x, x_hat) -> float:
    value = nsnr(x, x_hat)
    return np.inf if np.isinf(value) else 10.0 * np.log10(value)
