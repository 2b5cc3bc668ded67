"""Linear operators with explicit adjoints and operator-norm bounds.

All maps act on plain numpy arrays.  Complex arrays are treated as pairs of
real arrays, so the relevant inner product is ``Re <x, y>`` and adjoints are
taken with respect to it.  Apply/adjoint are pure functions and instances are
immutable after construction, so maps can be shared freely between threads.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .errors import InputError

GRAD2_NORM_BOUND = math.sqrt(8.0)


def real_inner(x: np.ndarray, y: np.ndarray) -> float:
    """Real inner product; complex arrays count as stacked real pairs."""
    return float(np.real(np.sum(np.asarray(x) * np.conj(y))))


class LinearMap(ABC):
    """A forward/adjoint pair with shape metadata and a norm bound.

    ``norm_bound`` is an upper bound on the operator norm with respect to the
    real inner product, used by the solvers to derive admissible step sizes.
    """

    domain_complex = False
    codomain_complex = False

    def __init__(self, domain_shape, codomain_shape, norm_bound: float):
        self.domain_shape = tuple(domain_shape)
        self.codomain_shape = tuple(codomain_shape)
        self.norm_bound = float(norm_bound)

    @abstractmethod
    def apply(self, x: np.ndarray) -> np.ndarray:
        """Forward action."""

    @abstractmethod
    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """Adjoint action with respect to the real inner product."""

    def _check_domain(self, x):
        if np.shape(x) != self.domain_shape:
            raise InputError(
                f"expected domain shape {self.domain_shape}, got {np.shape(x)}")

    def _check_codomain(self, y):
        if np.shape(y) != self.codomain_shape:
            raise InputError(
                f"expected codomain shape {self.codomain_shape}, got {np.shape(y)}")


class MatrixMap(LinearMap):
    """Dense matrix as a LinearMap; adjoint is the transpose."""

    def __init__(self, matrix: np.ndarray, norm_bound: float | None = None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise InputError("MatrixMap needs a 2D matrix")
        self.matrix = matrix
        if norm_bound is None:
            norm_bound = _power_norm_matrix(matrix)
        super().__init__((matrix.shape[1],), (matrix.shape[0],), norm_bound)

    def apply(self, x):
        self._check_domain(x)
        return self.matrix @ x

    def adjoint(self, y):
        self._check_codomain(y)
        return self.matrix.T @ y


class IdentityMap(LinearMap):
    def __init__(self, shape):
        super().__init__(shape, shape, 1.0)

    def apply(self, x):
        self._check_domain(x)
        return np.array(x, copy=True)

    def adjoint(self, y):
        self._check_codomain(y)
        return np.array(y, copy=True)


class SamplingMask:
    """Boolean Cartesian sampling pattern on an ``n_y x n_x`` frequency grid.

    The grid lives in unshifted DFT coordinates (zero frequency at ``[0, 0]``).
    """

    def __init__(self, grid: np.ndarray):
        grid = np.asarray(grid)
        if grid.ndim != 2:
            raise InputError("mask grid must be 2D")
        self.grid = grid.astype(bool)
        self.grid.flags.writeable = False
        self.count = int(np.count_nonzero(self.grid))

    @property
    def shape(self):
        return self.grid.shape

    def __eq__(self, other):
        return isinstance(other, SamplingMask) and np.array_equal(self.grid, other.grid)


def full_mask(shape) -> SamplingMask:
    return SamplingMask(np.ones(shape, dtype=bool))


def _axis_band(n: int, w: int) -> np.ndarray:
    """Boolean selection of ``w`` frequencies centered on zero along one axis."""
    if w > n:
        raise InputError(f"low-pass block of {w} does not fit axis of {n}")
    freqs = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    if w == n:
        return np.ones(n, dtype=bool)
    # Even widths cannot be symmetric; the surplus goes to positive frequencies.
    lo, hi = -((w - 1) // 2), w // 2
    return (freqs >= lo) & (freqs <= hi)


def lowpass_mask(shape, width: int, height: int | None = None) -> SamplingMask:
    """Centered rectangular low-pass block in frequency space."""
    n_y, n_x = shape
    if height is None:
        height = width
    if width < 1 or height < 1:
        raise InputError("low-pass block must be at least 1x1")
    sel_y = _axis_band(n_y, height)
    sel_x = _axis_band(n_x, width)
    return SamplingMask(sel_y[:, None] & sel_x[None, :])


class SamplingMap(LinearMap):
    """Diagonal 0/1 selection of Fourier coefficients; self-adjoint, idempotent."""

    domain_complex = True
    codomain_complex = True

    def __init__(self, mask: SamplingMask):
        self.mask = mask
        bound = 1.0 if mask.count > 0 else 0.0
        super().__init__(mask.shape, mask.shape, bound)

    def apply(self, x):
        self._check_domain(x)
        return np.where(self.mask.grid, x, 0)

    def adjoint(self, y):
        return self.apply(y)


class FourierSamplingMap(LinearMap):
    """Composite map: orthonormal 2D DFT followed by Cartesian sampling.

    Acts on real images.  As a real-linear map its adjoint under the real
    inner product is ``v -> Re(ifft2(mask * v))``.
    """

    codomain_complex = True

    def __init__(self, mask: SamplingMask):
        self.mask = mask
        # The largest singular value of the real-linear composite is governed
        # by the symmetrized mask (frequency k paired with -k).
        peak = float(self.symmetrized().max()) if mask.count > 0 else 0.0
        super().__init__(mask.shape, mask.shape, math.sqrt(peak))

    def symmetrized(self) -> np.ndarray:
        """Average of the mask with its frequency-negated mirror."""
        g = self.mask.grid.astype(float)
        flipped = np.roll(g[::-1, ::-1], (1, 1), axis=(0, 1))
        return 0.5 * (g + flipped)

    def apply(self, x):
        self._check_domain(x)
        return np.where(self.mask.grid, np.fft.fft2(x, norm="ortho"), 0)

    def adjoint(self, y):
        self._check_codomain(y)
        return np.real(np.fft.ifft2(np.where(self.mask.grid, y, 0), norm="ortho"))


class GradientMap(LinearMap):
    """Forward-difference gradient from ``n_y x n_x`` to ``(n_y-1) x (n_x-1) x 2``."""

    def __init__(self, n_y: int, n_x: int):
        if n_y < 2 or n_x < 2:
            raise InputError("gradient needs a grid of at least 2x2")
        super().__init__((n_y, n_x), (n_y - 1, n_x - 1, 2), GRAD2_NORM_BOUND)

    def apply(self, u):
        self._check_domain(u)
        u = np.asarray(u, dtype=float)
        out = np.empty(self.codomain_shape)
        out[:, :, 0] = u[1:, :-1] - u[:-1, :-1]
        out[:, :, 1] = u[:-1, 1:] - u[:-1, :-1]
        return out

    def adjoint(self, q):
        self._check_codomain(q)
        q = np.asarray(q, dtype=float)
        out = np.zeros(self.domain_shape)
        out[1:, :-1] += q[:, :, 0]
        out[:-1, :-1] -= q[:, :, 0]
        out[:-1, 1:] += q[:, :, 1]
        out[:-1, :-1] -= q[:, :, 1]
        return out


def vandermonde(samples: np.ndarray, degree: int) -> MatrixMap:
    """Vandermonde matrix map: entry (i, p) equals ``samples[i] ** p``."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 1:
        raise InputError("samples must be a non-empty 1D vector")
    if not np.all(np.isfinite(samples)):
        raise InputError("samples must be finite")
    if degree < 0:
        raise InputError("degree must be nonnegative")
    matrix = np.vander(samples, degree + 1, increasing=True)
    return MatrixMap(matrix)


def dft2(image: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Orthonormal 2D DFT (or its inverse) of a real or complex grid."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise InputError("dft2 expects a 2D array")
    if direction == "forward":
        return np.fft.fft2(image, norm="ortho")
    if direction == "inverse":
        return np.fft.ifft2(image, norm="ortho")
    raise InputError(f"unknown direction {direction!r}")


def sampling(mask: SamplingMask) -> SamplingMap:
    return SamplingMap(mask)


def fourier_sampling(mask: SamplingMask) -> FourierSamplingMap:
    return FourierSamplingMap(mask)


def grad2(n_y: int, n_x: int) -> GradientMap:
    return GradientMap(n_y, n_x)


def _random_element(shape, want_complex: bool, rng) -> np.ndarray:
    x = rng.standard_normal(shape)
    if want_complex:
        x = x + 1j * rng.standard_normal(shape)
    return x


def power_norm(m: LinearMap, iters: int = 100, tol: float = 1e-10) -> float:
    """Estimate the largest singular value by power iteration on ``m* m``.

    Deterministic: the start vector comes from a fixed seed-0 generator.
    Returns 0 for the zero map.
    """
    if iters < 1:
        raise InputError("iters must be at least 1")
    rng = np.random.default_rng(0)
    x = _random_element(m.domain_shape, m.domain_complex, rng)
    x = x / np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        z = m.adjoint(m.apply(x))
        lam_new = float(np.linalg.norm(z))
        if lam_new == 0.0:
            return 0.0
        x = z / lam_new
        if abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return math.sqrt(lam)


def _power_norm_matrix(matrix: np.ndarray, iters: int = 100, tol: float = 1e-10) -> float:
    rng = np.random.default_rng(0)
    x = rng.standard_normal(matrix.shape[1])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        z = matrix.T @ (matrix @ x)
        lam_new = float(np.linalg.norm(z))
        if lam_new == 0.0:
            return 0.0
        x = z / lam_new
        if abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return math.sqrt(lam)


def adjoint_gap(m: LinearMap, rng, n_pairs: int = 20) -> float:
    """Worst relative adjoint defect over random test pairs."""
    worst = 0.0
    for _ in range(n_pairs):
        x = _random_element(m.domain_shape, m.domain_complex, rng)
        y = _random_element(m.codomain_shape, m.codomain_complex, rng)
        lhs = real_inner(m.apply(x), y)
        rhs = real_inner(x, m.adjoint(y))
        scale = np.linalg.norm(x) * np.linalg.norm(y)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
