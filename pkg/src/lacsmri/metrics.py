"""Reconstruction quality metric."""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, ZeroTruth


def rsnr(x_true, x_hat, cap: float = 300.0) -> float:
    """Reconstruction SNR in dB, ``20 log10(||x|| / ||x - x_hat||)``.

    Returns ``cap`` when the error is zero or too small to resolve.
    """
    x_true = np.asarray(x_true, dtype=np.float64)
    x_hat = np.asarray(x_hat)
    if x_true.shape != x_hat.shape:
        raise DimensionMismatch(f"{x_true.shape} vs {x_hat.shape}")
    signal = float(np.linalg.norm(x_true))
    if signal == 0.0:
        raise ZeroTruth("ground-truth image is identically zero")
    error = float(np.linalg.norm(x_true - x_hat))
    if error == 0.0:
        return cap
    value = 20.0 * math.log10(signal / error)
    return min(value, cap)
