"""Matrix-free linear operators.

Every operator exposes the three applications the message-passing core
needs: ``forward`` (A v), ``adjoint`` (A^T w), and the entrywise-squared
variants (|A|^2 v and |A|^T^2 w) used for variance propagation.  Operators
are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SquaredMode:
    """How the entrywise-squared applications are evaluated.

    ``exact`` applies the true |a_in|^2 matrix.  ``uniform-scalar`` replaces
    every squared entry by the constant frobenius_norm_sq/(rows*cols), which
    preserves the total sum of squared entries while keeping fast operators
    fast (the squared matrix of an FFT-based operator is dense).
    """

    kind: str = "exact"
    frobenius_norm_sq: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exact", "uniform-scalar"):
            raise ValueError(f"unknown squared mode {self.kind!r}")
        if self.kind == "uniform-scalar" and not self.frobenius_norm_sq >= 0:
            raise ValueError("frobenius_norm_sq must be nonnegative")

    @classmethod
    def exact(cls) -> "SquaredMode":
        return cls("exact")

    @classmethod
    def uniform(cls, frobenius_norm_sq: float) -> "SquaredMode":
        return cls("uniform-scalar", float(frobenius_norm_sq))


class LinearOperator:
    """Base class for matrix-free real linear maps.

    Parameters
    ----------
    rows, cols : int
        Output and input dimensions.
    squared_mode : SquaredMode, optional
        Defaults to exact entrywise-squared application.
    """

    kernel = "abstract"

    def __init__(self, rows: int, cols: int, squared_mode: SquaredMode | None = None):
        if rows < 1 or cols < 1:
            raise ValueError("operator dimensions must be positive")
        self.rows = int(rows)
        self.cols = int(cols)
        self.squared_mode = squared_mode if squared_mode is not None else SquaredMode.exact()

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def _check(self, v, n, what):
        v = np.asarray(v, dtype=float)
        if v.shape != (n,):
            raise ValueError(f"{what} expects length {n}, got shape {v.shape}")
        return v

    def forward(self, v) -> np.ndarray:
        """Return A @ v for a length-``cols`` vector."""
        return self._forward(self._check(v, self.cols, "forward"))

    def adjoint(self, w) -> np.ndarray:
        """Return A.T @ w for a length-``rows`` vector."""
        return self._adjoint(self._check(w, self.rows, "adjoint"))

    def squared_forward(self, v) -> np.ndarray:
        """Return (|A| o |A|) @ v; v is expected entrywise nonnegative."""
        v = self._check(v, self.cols, "squared_forward")
        if self.squared_mode.kind == "uniform-scalar":
            c = self.squared_mode.frobenius_norm_sq / (self.rows * self.cols)
            return np.full(self.rows, c * v.sum())
        return self._squared_forward(v)

    def squared_adjoint(self, w) -> np.ndarray:
        """Transpose of :meth:`squared_forward`."""
        w = self._check(w, self.rows, "squared_adjoint")
        if self.squared_mode.kind == "uniform-scalar":
            c = self.squared_mode.frobenius_norm_sq / (self.rows * self.cols)
            return np.full(self.cols, c * w.sum())
        return self._squared_adjoint(w)

    def frobenius_norm_sq(self) -> float:
        """Sum of squared entries (respects the squared mode)."""
        if self.squared_mode.kind == "uniform-scalar":
            return self.squared_mode.frobenius_norm_sq
        return float(self.squared_forward(np.ones(self.cols)).sum())

    def to_dense(self) -> np.ndarray:
        """Materialize the operator column by column (small sizes only)."""
        basis = np.eye(self.cols)
        return np.column_stack([self.forward(basis[:, j]) for j in range(self.cols)])

    def _forward(self, v):
        raise NotImplementedError

    def _adjoint(self, w):
        raise NotImplementedError

    def _squared_forward(self, v):
        raise NotImplementedError

    def _squared_adjoint(self, w):
        raise NotImplementedError


class DenseOperator(LinearOperator):
    """Operator backed by an explicit matrix."""

    def __init__(self, matrix, kernel: str = "dense", squared_mode: SquaredMode | None = None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        super().__init__(matrix.shape[0], matrix.shape[1], squared_mode)
        self.matrix = matrix
        self.kernel = kernel
        self._sq = None

    def _squared(self):
        if self._sq is None:
            self._sq = self.matrix * self.matrix
        return self._sq

    def _forward(self, v):
        return self.matrix @ v

    def _adjoint(self, w):
        return self.matrix.T @ w

    def _squared_forward(self, v):
        return self._squared() @ v

    def _squared_adjoint(self, w):
        return self._squared().T @ w


class StackedOperator(LinearOperator):
    """Vertical stack [top; bottom]; children keep their own squared modes."""

    kernel = "stacked"

    def __init__(self, top: LinearOperator, bottom: LinearOperator):
        if top.cols != bottom.cols:
            raise ValueError(
                f"column mismatch in stack: {top.cols} vs {bottom.cols}"
            )
        super().__init__(top.rows + bottom.rows, top.cols)
        self.top = top
        self.bottom = bottom

    def _split(self, w):
        return w[: self.top.rows], w[self.top.rows :]

    def _forward(self, v):
        return np.concatenate([self.top.forward(v), self.bottom.forward(v)])

    def _adjoint(self, w):
        wt, wb = self._split(w)
        return self.top.adjoint(wt) + self.bottom.adjoint(wb)

    def _squared_forward(self, v):
        return np.concatenate([self.top.squared_forward(v), self.bottom.squared_forward(v)])

    def _squared_adjoint(self, w):
        wt, wb = self._split(w)
        return self.top.squared_adjoint(wt) + self.bottom.squared_adjoint(wb)


def stack(top: LinearOperator, bottom: LinearOperator) -> StackedOperator:
    """Stack two operators sharing an input dimension."""
    return StackedOperator(top, bottom)


class PairDifferenceOperator(LinearOperator):
    """Rows of the form x[plus] - x[minus]; backs the finite differences."""

    def __init__(self, plus, minus, cols: int, kernel: str = "fd1d"):
        plus = np.asarray(plus, dtype=np.intp)
        minus = np.asarray(minus, dtype=np.intp)
        if plus.shape != minus.shape:
            raise ValueError("plus/minus index arrays must match in length")
        super().__init__(len(plus), cols)
        self.plus = plus
        self.minus = minus
        self.kernel = kernel

    def _forward(self, v):
        return v[self.plus] - v[self.minus]

    def _adjoint(self, w):
        return (
            np.bincount(self.plus, weights=w, minlength=self.cols)
            - np.bincount(self.minus, weights=w, minlength=self.cols)
        )

    def _squared_forward(self, v):
        return v[self.plus] + v[self.minus]

    def _squared_adjoint(self, w):
        return (
            np.bincount(self.plus, weights=w, minlength=self.cols)
            + np.bincount(self.minus, weights=w, minlength=self.cols)
        )


def make_fd1d(n: int) -> PairDifferenceOperator:
    """(n-1) x n first-difference operator, row k = x[k+1] - x[k]."""
    if n < 2:
        raise ValueError("fd1d needs n >= 2")
    idx = np.arange(n - 1)
    return PairDifferenceOperator(idx + 1, idx, n, kernel="fd1d")


FD2D_DIRECTIONS = ("horizontal", "vertical", "diagonal", "antidiagonal")

# (row step, col step) of the "plus" neighbor for each direction
_FD2D_STEPS = {
    "horizontal": (0, 1),
    "vertical": (1, 0),
    "diagonal": (1, 1),
    "antidiagonal": (1, -1),
}


def make_fd2d(h: int, w: int, directions=FD2D_DIRECTIONS) -> PairDifferenceOperator:
    """2D finite differences over a row-major h x w image.

    One block of rows per direction, in the canonical order horizontal,
    vertical, diagonal, antidiagonal (restricted to ``directions``).  Each
    row is x[neighbor] - x[pixel]; neighbor pairs leaving the image are
    omitted, so there is no wraparound.
    """
    if h < 2 or w < 2:
        raise ValueError("fd2d needs h, w >= 2")
    directions = tuple(directions)
    if not directions:
        raise ValueError("fd2d needs at least one direction")
    for d in directions:
        if d not in FD2D_DIRECTIONS:
            raise ValueError(f"unknown direction {d!r}")
    ordered = [d for d in FD2D_DIRECTIONS if d in directions]

    rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    plus_parts, minus_parts = [], []
    for d in ordered:
        dr, dc = _FD2D_STEPS[d]
        keep = (rr + dr >= 0) & (rr + dr < h) & (cc + dc >= 0) & (cc + dc < w)
        minus_parts.append((rr[keep] * w + cc[keep]).ravel())
        plus_parts.append(((rr[keep] + dr) * w + (cc[keep] + dc)).ravel())
    return PairDifferenceOperator(
        np.concatenate(plus_parts), np.concatenate(minus_parts), h * w, kernel="fd2d"
    )


class RealifiedDft2dOperator(LinearOperator):
    """Subsampled 2D DFT of a row-major n x n image, realified.

    The selected complex coefficients (scaled by 1/n, so the full transform
    is unitary) are emitted as real parts followed by imaginary parts.  The
    squared application defaults to uniform-scalar mode: every selected
    frequency contributes exactly 1 to the squared Frobenius norm, spread
    over its two realified rows.
    """

    kernel = "partial-fourier-realified"

    def __init__(self, n: int, mask_flat):
        mask = np.asarray(mask_flat, dtype=np.intp)
        if mask.ndim != 1 or len(mask) == 0:
            raise ValueError("mask must be a nonempty index vector")
        super().__init__(2 * len(mask), n * n, SquaredMode.uniform(float(len(mask))))
        self.n = int(n)
        self.mask = mask

    @property
    def num_frequencies(self) -> int:
        return len(self.mask)

    def _forward(self, v):
        spec = np.fft.fft2(v.reshape(self.n, self.n)) / self.n
        c = spec.ravel()[self.mask]
        return np.concatenate([c.real, c.imag])

    def _adjoint(self, w):
        k = self.num_frequencies
        c = w[:k] + 1j * w[k:]
        spec = np.zeros((self.n, self.n), dtype=complex)
        spec.ravel()[self.mask] = c
        return (np.fft.ifft2(spec) * self.n).real.ravel()


def radial_line_mask(n: int, lines: int, seed: int) -> np.ndarray:
    """Flat frequency indices on ``lines`` equally-angled radial lines.

    Lines pass through the DC origin of the centered n x n spectrum with a
    seed-dependent common rotation; points are taken by nearest-grid-point
    rounding while both coordinates stay within the centered frequency range.
    Duplicate frequencies hit by several lines are included once.
    """
    if n < 2 or n & (n - 1):
        raise ValueError("n must be a power of two >= 2")
    if lines < 1 or lines > 2 * n:
        raise ValueError(f"lines must be in [1, {2 * n}] for an {n} x {n} grid")
    rng = np.random.default_rng(seed)
    offset = rng.uniform(0.0, np.pi / lines)
    half = n // 2
    radii = np.arange(0.0, half * np.sqrt(2.0) + 0.5, 0.5)
    picked = set()
    for line in range(lines):
        theta = offset + np.pi * line / lines
        c, s = np.cos(theta), np.sin(theta)
        for r in radii:
            for sign in (1.0, -1.0):
                kc = int(np.rint(sign * r * c))
                kr = int(np.rint(sign * r * s))
                if -half <= kc <= half and -half <= kr <= half:
                    picked.add(((kr % n) * n) + (kc % n))
    return np.array(sorted(picked), dtype=np.intp)


def make_partial_fourier_radial(n: int, lines: int, seed: int) -> RealifiedDft2dOperator:
    """Realified radial-line 2D Fourier sampling of an n x n image."""
    return RealifiedDft2dOperator(n, radial_line_mask(n, lines, seed))
