"""The adaptive acquire/reconstruct loop.

Both pipelines talk to the ground truth only through a :class:`Scanner`,
which hands out k-space lines on request. Each round draws new lines from
the current sampling density, reconstructs from everything acquired so far
and then rebuilds the density for the next round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, GridTooLarge
from .grayscale import ScaleEstimate, gsc_update
from .metrics import rsnr
from .model import (
    Algorithm,
    Density,
    ExperimentConfig,
    LinePdf,
    SamplingMask,
    as_image,
    validate_config,
)
from .recon import Weights, initial_weights, solve_l1w, solve_weighted, update_weights
from .sampling import (
    SamplerState,
    draw_lines,
    mix_pdf,
    nd_proxy,
    pdf_a,
    pdf_nd,
    pdf_r,
    pdf_vd,
    pdf_vds,
    update_gamma,
)
from .transforms import fft2_centered, make_sparsifier


class Scanner:
    """Measurement oracle around a hidden image.

    ``acquire`` returns the requested centered k-space rows, optionally with
    complex Gaussian noise of total standard deviation ``noise_std`` per
    sample. ``score`` reports the RSNR of an estimate; it is the only other
    way the truth is used and never feeds back into reconstruction.
    """

    def __init__(self, x_true, noise_std: float = 0.0, seed=None, rsnr_cap: float = 300.0):
        x = as_image(x_true)
        self.n = x.shape[0]
        self._truth = x
        self._spectrum = fft2_centered(x)
        self.noise_std = float(noise_std)
        self._rng = np.random.default_rng(seed)
        self.rsnr_cap = rsnr_cap
        self.lines_served = 0

    def acquire(self, lines) -> np.ndarray:
        rows = np.asarray(lines, dtype=int) + self.n // 2
        data = self._spectrum[rows].copy()
        if self.noise_std > 0:
            sigma = self.noise_std / math.sqrt(2.0)
            data += sigma * (self._rng.standard_normal(data.shape)
                             + 1j * self._rng.standard_normal(data.shape))
        self.lines_served += len(rows)
        return data

    def score(self, x_hat) -> float:
        return rsnr(self._truth, x_hat, self.rsnr_cap)


@dataclass
class ReconState:
    """Everything the loop carries between rounds."""

    estimate: np.ndarray | None
    weights: Weights
    gamma: float
    mask: SamplingMask
    measurements: np.ndarray
    round: int = 0

    @classmethod
    def start(cls, n: int, sparsifier) -> "ReconState":
        return cls(None, initial_weights(n, sparsifier), 0.0, SamplingMask(n),
                   np.zeros((0, n), dtype=np.complex128))

    def add_lines(self, lines, rows) -> None:
        """Merge newly acquired lines, keeping measurements in mask order."""
        n = self.mask.n
        known = dict(zip(self.mask.lines, self.measurements))
        known.update(zip((int(k) for k in lines), np.asarray(rows).reshape(-1, n)))
        self.mask = SamplingMask(n, tuple(known))
        self.measurements = np.array([known[k] for k in self.mask.lines]).reshape(-1, n)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    lines_acquired: int
    gamma: float
    rsnr_db: float
    objective: float
    c_estimate: float
    new_lines: tuple = ()


@dataclass
class Trace:
    records: list = field(default_factory=list)
    mask: SamplingMask | None = None

    @property
    def final_rsnr(self) -> float:
        return self.records[-1].rsnr_db

    @property
    def gammas(self) -> list:
        return [r.gamma for r in self.records]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def variable_density(kind, n: int, cfg: ExperimentConfig) -> LinePdf | None:
    if kind is None:
        return None
    kind = Density(kind)
    if kind is Density.VD:
        return pdf_vd(n, cfg.p)
    if kind is Density.VDS:
        return pdf_vds(n, cfg.p, cfg.C)
    raise ValueError(f"{kind.value} is not a variable density")


def _adaptive_density(kind, n, cfg, ref, state, sparsifier, cache, k):
    kind = Density(kind)
    if kind in (Density.A, Density.ND) and n > cfg.max_dense_n:
        raise GridTooLarge(f"{kind.value} is limited to n <= {cfg.max_dense_n}, got {n}")
    if kind is Density.R:
        return pdf_r(n, fft2_centered(ref))
    if kind is Density.ND:
        obs = nd_proxy(fft2_centered(ref), state.measurements, state.mask)
        return pdf_nd(n, fft2_centered(state.estimate), obs)
    if kind is Density.A:
        key = ("f_A", n, cfg.sparsifier, cfg.wavelet, cfg.support_fraction, cfg.eps_tr, k)
        if cache is None or key not in cache:
            f_a = pdf_a(n, sparsifier, eps_tr=cfg.eps_tr, max_n=cfg.max_dense_n,
                        reference=ref, support_fraction=cfg.support_fraction,
                        lines_per_round=k)
            if cache is None:
                return f_a
            cache[key] = f_a
        return cache[key]
    raise ValueError(f"{kind.value} is not an adaptive density")


def _sampling_pdf(f_vd, f_ad, gamma):
    if f_ad is None:
        return f_vd
    if f_vd is None:
        return f_ad
    return mix_pdf(f_ad, f_vd, gamma)


def _run(scanner, x0, cfg, vd, ad, algorithm, scale_correction, cache):
    n = scanner.n
    x0 = as_image(x0)
    if x0.shape != (n, n):
        raise DimensionMismatch(f"reference {x0.shape} does not match scanner n={n}")
    validate_config(cfg, n)
    sparsifier = make_sparsifier(cfg.sparsifier, cfg.wavelet)
    big_n = int(cfg.num_iterations)
    k = cfg.lines_per_round(n)
    sizes = cfg.round_sizes(n)
    f_vd = variable_density(vd, n, cfg)
    sampler = SamplerState.fresh(n, cfg.seed)
    state = ReconState.start(n, sparsifier)
    scale = ScaleEstimate()
    ref_k = fft2_centered(x0)
    trace = Trace()
    pdf = f_vd if f_vd is not None else LinePdf.uniform(n)

    for r in range(1, big_n + 1):
        take = min(sizes[r - 1], n - len(state.mask))
        new = draw_lines(pdf, take, sampler) if take > 0 else ()
        if new:
            rows = scanner.acquire(new)
            state.add_lines(new, rows)
            if scale_correction:
                scale = gsc_update(rows, ref_k[np.asarray(new) + n // 2], scale,
                                   modulus=cfg.gsc_modulus)
        ref = scale.c * x0 if scale_correction else x0

        if algorithm is Algorithm.LACS:
            est, info = solve_weighted(
                state.measurements, state.mask, ref, state.weights, cfg.lam, sparsifier,
                cfg.epsilon, cfg.max_iter, mu=cfg.mu, data_scale=cfg.data_scale,
                start=state.estimate, full_output=True,
            )
            state.weights = update_weights(est, ref, sparsifier, cfg.epsilon1)
            state.gamma = update_gamma(state.weights.w2)
            objective = info.objective[-1]
        else:
            est, info = solve_l1w(
                state.measurements, state.mask, sparsifier, cfg.epsilon, cfg.max_iter,
                decay=cfg.pocs_decay, full_output=True,
            )
            state.gamma = cfg.gamma_l1w
            objective = float(np.abs(sparsifier.forward(est)).sum())
        state.estimate = est
        state.round = r

        trace.records.append(RoundRecord(
            round=r,
            lines_acquired=len(state.mask),
            gamma=state.gamma,
            rsnr_db=scanner.score(est),
            objective=objective,
            c_estimate=scale.c if scale_correction else math.nan,
            new_lines=tuple(new),
        ))
        if r < big_n:
            f_ad = None
            if ad is not None:
                f_ad = _adaptive_density(ad, n, cfg, ref, state, sparsifier, cache, k)
            pdf = _sampling_pdf(f_vd, f_ad, state.gamma)

    trace.mask = state.mask
    return state.estimate, trace


def lacs_mri(scanner: Scanner, x0, cfg: ExperimentConfig, vd=None, ad=None, *,
             scale_correction: bool = False, cache: dict | None = None):
    """Reference-weighted adaptive reconstruction.

    ``vd`` and ``ad`` name the variable and adaptive densities (either may be
    ``None``). Returns the final estimate and a :class:`Trace` with one
    record per round. ``cache`` lets repeated runs share the expensive
    design density.
    """
    return _run(scanner, x0, cfg, vd, ad, Algorithm.LACS, scale_correction, cache)


def l1w_pipeline(scanner: Scanner, x0, cfg: ExperimentConfig, vd=None, ad=None, *,
                 cache: dict | None = None):
    """Same round structure with plain sparsity recovery.

    ``x0`` only shapes the adaptive densities; the mixing weight is fixed at
    ``cfg.gamma_l1w``.
    """
    return _run(scanner, x0, cfg, vd, ad, Algorithm.L1W, False, cache)
