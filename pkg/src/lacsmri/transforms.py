"""Linear operators: centered unitary DFT, line-subsampled measurement,
orthonormal wavelet pyramid and the bidiagonal discrete gradient."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import pywt

from .errors import DimensionMismatch, NonPowerOfTwoSize, NonSquareImage
from .model import SamplingMask, as_image

# --------------------------------------------------------------------------
# Fourier
# --------------------------------------------------------------------------


def fft2_centered(img) -> np.ndarray:
    """Unitary 2D DFT with the zero frequency at row/column ``n // 2``.

    The image origin is also taken at the grid center, so the transform of a
    real symmetric image is real.
    """
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise NonSquareImage(f"expected a square image, got shape {img.shape}")
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(img), norm="ortho"))


def ifft2_centered(grid) -> np.ndarray:
    """Inverse of :func:`fft2_centered`; returns a complex array."""
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(grid), norm="ortho"))


def measure(img, mask: SamplingMask) -> np.ndarray:
    """Rows of the centered spectrum at ``mask.lines``, shape ``(len(mask), n)``."""
    img = as_image(img)
    if mask.n != img.shape[0]:
        raise DimensionMismatch(f"mask for n={mask.n} applied to {img.shape} image")
    return fft2_centered(img)[mask.rows]


def zero_fill(measurements, mask: SamplingMask) -> np.ndarray:
    """Embed measured rows into an otherwise-zero spectrum."""
    grid = np.zeros((mask.n, mask.n), dtype=np.complex128)
    if len(mask):
        grid[mask.rows] = measurements
    return grid


def mirror(grid) -> np.ndarray:
    """``conj(K(-ky, -kx))`` on the centered grid."""
    n = grid.shape[0]
    idx = (n - np.arange(n)) % n
    return np.conj(grid[np.ix_(idx, idx)])


def hermitian_closure(measurements, mask: SamplingMask):
    """Measured rows plus the rows they imply for a real image.

    Returns ``(rows, grid)``: a boolean vector of known storage rows and a
    spectrum holding the known values (zero elsewhere). Where a line and its
    mirror were both measured the measured values win.
    """
    grid = zero_fill(measurements, mask)
    known = mask.row_mask()
    mirrored = known[(mask.n - np.arange(mask.n)) % mask.n]
    closed = mirror(grid)
    closed[known] = grid[known]
    return known | mirrored, np.where((known | mirrored)[:, None], closed, 0)


def data_consistency(img, measurements, mask: SamplingMask, closure=None) -> np.ndarray:
    """Project a real image onto the real images that agree with the data.

    The estimate's spectrum is replaced on the measured lines and on their
    conjugate mirrors. ``closure`` may pass a precomputed
    :func:`hermitian_closure`.
    """
    rows, known = closure if closure is not None else hermitian_closure(measurements, mask)
    grid = fft2_centered(img)
    grid[rows] = known[rows]
    return ifft2_centered(grid).real


# --------------------------------------------------------------------------
# Wavelets
# --------------------------------------------------------------------------


def _check_pow2(n):
    if n < 1 or n & (n - 1):
        raise NonPowerOfTwoSize(f"wavelet transform needs a power-of-two size, got {n}")


@functools.lru_cache(maxsize=None)
def _analysis_matrix(m: int, family: str) -> np.ndarray:
    """One periodized DWT level as an orthogonal ``m x m`` matrix.

    The first ``m/2`` rows give approximation, the last ``m/2`` detail.
    """
    cols = []
    for vec in np.eye(m):
        ca, cd = pywt.dwt(vec, family, mode="periodization")
        cols.append(np.concatenate([ca, cd]))
    mat = np.array(cols).T
    mat.setflags(write=False)
    return mat


def wavelet_levels(n: int) -> int:
    _check_pow2(n)
    return int(np.log2(n))


def wavelet_fwd(img, family: str = "db4") -> np.ndarray:
    """Full-depth orthonormal 2D wavelet pyramid.

    Returns an ``n x n`` coefficient array in Mallat layout: at each level the
    current ``m x m`` approximation block is replaced by
    ``[[LL, LH], [HL, HH]]`` where the first letter is the filter along rows
    (axis 0). The single coarsest approximation coefficient ends up at
    ``[0, 0]``.
    """
    out = np.array(img, dtype=np.float64)
    n = out.shape[0]
    _check_pow2(n)
    m = n
    while m >= 2:
        a = _analysis_matrix(m, family)
        out[:m, :m] = a @ out[:m, :m] @ a.T
        m //= 2
    return out


def wavelet_inv(coeffs, family: str = "db4") -> np.ndarray:
    out = np.array(coeffs, dtype=np.float64)
    n = out.shape[0]
    _check_pow2(n)
    m = 2
    while m <= n:
        a = _analysis_matrix(m, family)
        out[:m, :m] = a.T @ out[:m, :m] @ a
        m *= 2
    return out


# --------------------------------------------------------------------------
# Discrete gradient
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GradientPair:
    """``dx = G X`` (differences between rows j and j+1) and ``dy = X G^T``
    (differences between columns k and k+1). The last row of ``dx`` and the
    last column of ``dy`` hold the raw pixel values."""

    dx: np.ndarray
    dy: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.stack([self.dx, self.dy])

    @classmethod
    def from_stacked(cls, arr) -> "GradientPair":
        return cls(arr[0], arr[1])


def difference_matrix(n: int) -> np.ndarray:
    """Upper bidiagonal ``G`` with ones on the diagonal and -1 above it."""
    return np.eye(n) - np.eye(n, k=1)


def _g(x):
    # G @ x along axis 0
    out = x.copy()
    out[:-1] -= x[1:]
    return out


def _gt(v):
    # G.T @ v along axis 0
    out = v.copy()
    out[1:] -= v[:-1]
    return out


def gradient_fwd(img) -> GradientPair:
    x = np.asarray(img, dtype=np.float64)
    return GradientPair(_g(x), _g(x.T).T)


def gradient_adjoint(gp: GradientPair) -> np.ndarray:
    if gp.dx.shape != gp.dy.shape:
        raise DimensionMismatch(f"gradient parts differ: {gp.dx.shape} vs {gp.dy.shape}")
    return _gt(gp.dx) + _gt(gp.dy.T).T


@functools.lru_cache(maxsize=None)
def _gradient_gram_eig(n: int):
    w, q = np.linalg.eigh(difference_matrix(n).T @ difference_matrix(n))
    w.setflags(write=False)
    q.setflags(write=False)
    return w, q


def gradient_pinv(gp: GradientPair) -> np.ndarray:
    """Least-squares image whose gradient best matches ``gp``.

    Solves ``A X + X A = G^T dx + dy G`` with ``A = G^T G`` by
    diagonalizing ``A``.
    """
    rhs = gradient_adjoint(gp)
    w, q = _gradient_gram_eig(rhs.shape[0])
    return q @ ((q.T @ rhs @ q) / (w[:, None] + w[None, :])) @ q.T


# --------------------------------------------------------------------------
# Sparsifier dispatch used by the solvers
# --------------------------------------------------------------------------


class Sparsifier:
    """A linear map from images to coefficient arrays.

    ``norm_sq`` bounds the squared operator norm; ``orthonormal`` marks maps
    whose adjoint is also the inverse.
    """

    kind: str
    orthonormal: bool

    def forward(self, img) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, coeffs) -> np.ndarray:
        raise NotImplementedError

    def norm_sq(self, n: int) -> float:
        raise NotImplementedError

    def synthesis(self, coeffs) -> np.ndarray:
        """Image with the given coefficients (least squares for redundant maps)."""
        return self.adjoint(coeffs)


class WaveletSparsifier(Sparsifier):
    kind = "wavelet"
    orthonormal = True

    def __init__(self, family: str = "db4"):
        self.family = family

    def forward(self, img):
        return wavelet_fwd(img, self.family)

    def adjoint(self, coeffs):
        return wavelet_inv(coeffs, self.family)

    def norm_sq(self, n):
        return 1.0

    def __repr__(self):
        return f"WaveletSparsifier({self.family!r})"


class GradientSparsifier(Sparsifier):
    kind = "gradient"
    orthonormal = False

    def forward(self, img):
        return gradient_fwd(img).stacked()

    def adjoint(self, coeffs):
        return gradient_adjoint(GradientPair.from_stacked(coeffs))

    def norm_sq(self, n):
        # spectrum of A (x) I + I (x) A
        return 2.0 * float(_gradient_gram_eig(n)[0][-1])

    def synthesis(self, coeffs):
        return gradient_pinv(GradientPair.from_stacked(coeffs))

    def __repr__(self):
        return "GradientSparsifier()"


def make_sparsifier(kind: str = "wavelet", family: str = "db4") -> Sparsifier:
    if isinstance(kind, Sparsifier):
        return kind
    if kind == "wavelet":
        return WaveletSparsifier(family)
    if kind == "gradient":
        return GradientSparsifier()
    raise ValueError(f"unknown sparsifier {kind!r}")
