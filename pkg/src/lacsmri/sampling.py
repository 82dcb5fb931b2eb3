"""Line sampling densities, their gamma-mixture and without-replacement drawing.

All densities are :class:`~lacsmri.model.LinePdf` objects indexed by centered
phase-encode line ``ky``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroReference,
    DimensionMismatch,
    GridTooLarge,
    NotEnoughLines,
    SingularDesign,
)
from .model import LinePdf, SamplingMask, line_range
from .transforms import Sparsifier, fft2_centered, hermitian_closure, make_sparsifier

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# Variable densities
# --------------------------------------------------------------------------

def pdf_vd(n: int, p: float) -> LinePdf:
    """Polynomial falloff ``(1 - 2|ky|/n)^p``, largest at ``ky = 0``."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    ky = line_range(n)
    return LinePdf.from_weights(np.power(1.0 - 2.0 * np.abs(ky) / n, p))


def vds_density_2d(n: int, p: float, C: float) -> np.ndarray:
    """Unnormalized point density ``min(C, (k1^2 + k2^2)^-p)`` on the centered grid.

    The origin, where the power law is unbounded, takes the cap ``C``.
    """
    if p < 0 or C <= 0:
        raise ValueError("need p >= 0 and C > 0")
    k = line_range(n).astype(np.float64)
    r2 = k[:, None] ** 2 + k[None, :] ** 2
    with np.errstate(divide="ignore"):
        power = np.where(r2 > 0, np.power(np.where(r2 > 0, r2, 1.0), -p), np.inf)
    return np.minimum(C, power)


def pdf_vds(n: int, p: float, C: float) -> LinePdf:
    """Capped power-law point density summed over ``kx`` to a line density."""
    return LinePdf.from_weights(vds_density_2d(n, p, C).sum(axis=1))


# --------------------------------------------------------------------------
# Reference and discrepancy densities
# --------------------------------------------------------------------------

def pdf_r(n: int, ref_k) -> LinePdf:
    """Line density proportional to the summed reference spectrum modulus."""
    ref_k = np.asarray(ref_k)
    if ref_k.shape != (n, n):
        raise DimensionMismatch(f"reference spectrum {ref_k.shape} does not match n={n}")
    g = np.abs(ref_k).sum(axis=1)
    if not g.sum() > 0:
        raise AllZeroReference("reference k-space is identically zero")
    return LinePdf.from_weights(g)


def nd_proxy(ref_k, measurements, mask: SamplingMask) -> np.ndarray:
    """Stand-in for the unknown true spectrum: measured rows (and their
    conjugate mirrors) where known, reference rows elsewhere."""
    proxy = np.array(ref_k, dtype=np.complex128)
    if len(mask):
        rows, known = hermitian_closure(measurements, mask)
        proxy[rows] = known[rows]
    return proxy


def pdf_nd(n: int, est_k, obs_k) -> LinePdf:
    """Per-line sum of the relative discrepancy ``|E - O| / (|E| + |O|)``.

    ``0/0`` counts as zero. If every entry agrees the result is uniform.
    """
    est_k = np.asarray(est_k)
    obs_k = np.asarray(obs_k)
    if est_k.shape != (n, n) or obs_k.shape != (n, n):
        raise DimensionMismatch("spectra do not match the grid size")
    num = np.abs(est_k - obs_k)
    den = np.abs(est_k) + np.abs(obs_k)
    ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    g = ratio.sum(axis=1)
    if not g.sum() > 0:
        return LinePdf.uniform(n)
    return LinePdf.from_weights(g)


# --------------------------------------------------------------------------
# Constrained adaptive design
# --------------------------------------------------------------------------

def reference_support(x0, sparsifier: Sparsifier, fraction: float = 0.05) -> np.ndarray:
    """Flat indices of the ``ceil(fraction * n^2)`` largest sparsifier
    coefficients of ``x0``."""
    coeffs = np.abs(sparsifier.forward(x0)).ravel()
    n = np.asarray(x0).shape[0]
    size = min(coeffs.size, max(1, math.ceil(fraction * n * n)))
    # stable sort so ties resolve deterministically
    return np.sort(np.argsort(-coeffs, kind="stable")[:size])


def design_matrix(n: int, sparsifier: Sparsifier, support) -> np.ndarray:
    """Columns are the vectorized spectra of the sparsifier atoms in ``support``.

    Row ``r * n + c`` corresponds to the k-space point in storage row ``r``.
    """
    shape = (n, n) if sparsifier.orthonormal else sparsifier.forward(np.zeros((n, n))).shape
    cols = []
    for idx in np.asarray(support, dtype=int):
        unit = np.zeros(int(np.prod(shape)))
        unit[idx] = 1.0
        atom = sparsifier.synthesis(unit.reshape(shape))
        cols.append(fft2_centered(atom).ravel())
    return np.array(cols).T


def _trace_inv(a, s):
    m = a.conj().T @ (s[:, None] * a)
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return math.inf, None
    inv_chol = np.linalg.inv(chol)
    minv = inv_chol.conj().T @ inv_chol
    value = float(np.real(np.trace(minv)))
    if not math.isfinite(value) or value <= 0:
        return math.inf, None
    return value, minv


def _project_budget(v, budget):
    """Euclidean projection onto ``{s >= 0, sum(s) <= budget}``."""
    w = np.maximum(v, 0.0)
    if w.sum() <= budget:
        return w
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - budget
    rho = np.nonzero(u * np.arange(1, len(u) + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass
class DesignResult:
    weights: np.ndarray  # diagonal of S over k-space points, storage order
    objective_history: list = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_history[-1]


def solve_design(a, budget: float, max_iter: int = 200, rtol: float = 1e-6) -> DesignResult:
    """Projected gradient on ``tr((A^H S A)^-1)`` over ``S >= 0, tr S <= budget``.

    Starts from the uniform allocation and backtracks until the usual
    sufficient-decrease condition holds, so the objective never increases.
    """
    rows = a.shape[0]
    s = np.full(rows, budget / rows)
    value, minv = _trace_inv(a, s)
    if not math.isfinite(value):
        raise SingularDesign("design is singular for every feasible allocation")
    history = [value]
    step = None
    for _ in range(max_iter):
        b = a @ minv
        grad = -np.sum(np.abs(b) ** 2, axis=1)
        if step is None:
            step = budget / max(np.abs(grad).max(), 1e-300)
        while True:
            cand = _project_budget(s - step * grad, budget)
            diff = cand - s
            new_value, new_minv = _trace_inv(a, cand)
            bound = value + grad @ diff + (diff @ diff) / (2 * step)
            if new_value <= bound + 1e-15 * abs(value):
                break
            step *= 0.5
            if step < 1e-300:
                return DesignResult(s, history)
        if new_value > value:
            break
        s, minv = cand, new_minv
        converged = abs(value - new_value) <= rtol * abs(value)
        value = new_value
        history.append(value)
        step *= 2.0
        if converged:
            break
    return DesignResult(s, history)


def pdf_a(
    n: int,
    sparsifier="wavelet",
    support=None,
    eps_tr: float | None = None,
    *,
    max_iter: int = 200,
    max_n: int = 64,
    reference=None,
    support_fraction: float = 0.05,
    lines_per_round: int = 1,
) -> LinePdf:
    """Relaxed optimal-design line density.

    ``support`` lists flat sparsifier indices; when omitted it is taken from
    the largest coefficients of ``reference``. The per-point allocation is
    summed along each line and normalized. The default trace budget is
    ``lines_per_round * n`` (the number of k-space points acquired per round).
    """
    if n > max_n:
        raise GridTooLarge(f"n={n} exceeds the dense design limit {max_n}")
    sparsifier = make_sparsifier(sparsifier)
    if support is None:
        if reference is None:
            raise ValueError("need either support or reference")
        support = reference_support(reference, sparsifier, support_fraction)
    support = np.atleast_1d(np.asarray(support, dtype=int))
    if support.size < 1:
        raise ValueError("support must be non-empty")
    if support.size > n * n:
        raise SingularDesign("support is larger than the number of k-space points")
    if eps_tr is None:
        eps_tr = float(lines_per_round * n)
    a = design_matrix(n, sparsifier, support)
    result = solve_design(a, eps_tr, max_iter=max_iter)
    per_line = result.weights.reshape(n, n).sum(axis=1)
    return LinePdf.from_weights(per_line)


# --------------------------------------------------------------------------
# Mixing and drawing
# --------------------------------------------------------------------------

def mix_pdf(f_adaptive: LinePdf, f_vd: LinePdf, gamma: float) -> LinePdf:
    """``gamma * f_adaptive + (1 - gamma) * f_vd``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma={gamma} outside [0, 1]")
    if f_adaptive.n != f_vd.n:
        raise DimensionMismatch("densities are on different grids")
    if gamma == 0.0:
        return f_vd
    if gamma == 1.0:
        return f_adaptive
    mixed = gamma * f_adaptive.prob + (1.0 - gamma) * f_vd.prob
    return LinePdf(f_vd.n, mixed / mixed.sum())


@dataclass
class SamplerState:
    acquired: SamplingMask
    rng: np.random.Generator
    gamma: float = 0.0

    @classmethod
    def fresh(cls, n: int, seed=None) -> "SamplerState":
        return cls(SamplingMask(n), np.random.default_rng(seed))


def draw_lines(pdf: LinePdf, k: int, state: SamplerState) -> tuple:
    """Draw ``k`` distinct unacquired lines and add them to ``state.acquired``.

    Each pick renormalizes ``pdf`` over the lines still free; once that mass
    is exhausted the remaining picks are uniform over the free lines.
    Returns the new lines in draw order.
    """
    n = pdf.n
    if state.acquired.n != n:
        raise DimensionMismatch("sampler state and pdf are on different grids")
    free = ~state.acquired.row_mask()
    if k > free.sum():
        raise NotEnoughLines(f"asked for {k} lines, only {int(free.sum())} remain")
    drawn = []
    for _ in range(k):
        rows = np.flatnonzero(free)
        mass = pdf.prob[rows]
        total = mass.sum()
        if not total > 1e-300:
            mass = np.ones(len(rows))
            total = float(len(rows))
        cdf = np.cumsum(mass)
        pick = int(np.searchsorted(cdf, state.rng.random() * cdf[-1], side="right"))
        pick = min(pick, len(rows) - 1)
        row = int(rows[pick])
        free[row] = False
        drawn.append(row - n // 2)
    state.acquired = state.acquired.union(drawn)
    return tuple(drawn)


def update_gamma(w2) -> float:
    """Mean of the reference-fidelity weights."""
    w2 = np.asarray(w2, dtype=np.float64)
    return float(np.clip(w2.mean(), 0.0, 1.0))
