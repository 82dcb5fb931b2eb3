"""Online estimate of a global intensity factor between follow-up and
reference scans, and the scale-corrected reconstruction loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroReferenceEnergy

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScaleEstimate:
    """Running average ``c`` of the per-round ratios and how many rounds fed it."""

    c: float = 1.0
    rounds_seen: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"scale estimate must be positive and finite, got {self.c}")
        if self.rounds_seen < 0:
            raise ValueError("rounds_seen must be nonnegative")


def scale_ratio(y_samp, y0_samp, modulus: bool = False) -> float:
    """Ratio of summed follow-up to summed reference samples.

    Complex sums by default; the real part is returned and a warning is
    logged when the imaginary part is more than 1% of the modulus.
    """
    y = np.asarray(y_samp)
    y0 = np.asarray(y0_samp)
    if y.shape != y0.shape:
        raise DimensionMismatch(f"samples {y.shape} vs reference {y0.shape}")
    if not np.abs(y0).sum() > 0:
        raise ZeroReferenceEnergy("reference has no energy on the sampled lines")
    if modulus:
        return float(np.abs(y).sum() / np.abs(y0).sum())
    den = y0.sum()
    if den == 0:
        raise ZeroReferenceEnergy("reference samples sum to zero")
    ratio = complex(y.sum() / den)
    if abs(ratio.imag) > 0.01 * abs(ratio):
        log.warning("scale ratio %s has a large imaginary part", ratio)
    return ratio.real


def gsc_update(y_samp, y0_samp, est: ScaleEstimate, modulus: bool = False) -> ScaleEstimate:
    """Fold one round's ratio into the running average.

    With ``i = rounds_seen + 1`` the new estimate is ``c'/i + c (i-1)/i``,
    so after ``r`` rounds ``c`` is the mean of the ``r`` ratios. A ratio that
    is not a positive finite number leaves the estimate untouched.
    """
    ratio = scale_ratio(y_samp, y0_samp, modulus)
    if not (math.isfinite(ratio) and ratio > 0):
        log.warning("discarding scale ratio %r", ratio)
        return est
    i = est.rounds_seen + 1
    if i == 1:
        c = ratio
    else:
        c = ratio / i + est.c * (i - 1) / i
    return ScaleEstimate(c, i)


def lacs_mri_sc(scanner, x0, cfg, vd=None, ad=None, **kwargs):
    """The adaptive loop with the reference rescaled by the running ``c``."""
    from .pipeline import lacs_mri

    return lacs_mri(scanner, x0, cfg, vd, ad, scale_correction=True, **kwargs)
