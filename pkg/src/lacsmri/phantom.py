"""Synthetic test images: the modified Shepp-Logan head phantom with an
optional disk "tumor", and a smooth brain-like stand-in for larger grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TumorOutOfBounds

# (intensity, semi-axis a, semi-axis b, center x, center y, rotation in degrees)
# Toft's modified parameters: same geometry as the original, higher contrast.
_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0),
)


@dataclass(frozen=True)
class Tumor:
    row: int
    col: int
    radius: float
    delta: float


@dataclass(frozen=True)
class PhantomSpec:
    n: int = 32
    tumor: Tumor | None = None


def default_tumor(n: int) -> Tumor:
    """A small bright disk in the right hemisphere, clear of the center column."""
    return Tumor(row=int(round(0.40 * n)), col=int(round(0.66 * n)),
                 radius=max(1.0, n / 16), delta=0.4)


def _grid(n):
    # pixel centers on [-1, 1], y pointing up
    c = (np.arange(n) + 0.5) * 2.0 / n - 1.0
    return c[None, :], -c[:, None]


def _ellipse_image(n, ellipses):
    x, y = _grid(n)
    img = np.zeros((n, n))
    for value, a, b, cx, cy, deg in ellipses:
        t = np.deg2rad(deg)
        xr = (x - cx) * np.cos(t) + (y - cy) * np.sin(t)
        yr = -(x - cx) * np.sin(t) + (y - cy) * np.cos(t)
        img += value * ((xr / a) ** 2 + (yr / b) ** 2 <= 1.0)
    return img


def tumor_mask(n: int, tumor: Tumor) -> np.ndarray:
    """Pixels within ``radius`` of ``(row, col)``."""
    r = tumor.radius
    if r < 0:
        raise TumorOutOfBounds("tumor radius must be nonnegative")
    if not (0 <= tumor.row - r and tumor.row + r <= n - 1
            and 0 <= tumor.col - r and tumor.col + r <= n - 1):
        raise TumorOutOfBounds(f"tumor {tumor} does not fit in a {n}x{n} grid")
    rows, cols = np.ogrid[:n, :n]
    return (rows - tumor.row) ** 2 + (cols - tumor.col) ** 2 <= r * r


def shepp_logan(spec: PhantomSpec = PhantomSpec()):
    """Return ``(reference, followup)``.

    The follow-up equals the reference except inside the tumor disk, where
    ``delta`` is added.
    """
    if spec.n < 2:
        raise ValueError("phantom size must be at least 2")
    ref = _ellipse_image(spec.n, _ELLIPSES)
    follow = ref.copy()
    if spec.tumor is not None:
        follow[tumor_mask(spec.n, spec.tumor)] += spec.tumor.delta
    return ref, follow


def _smooth_field(n, rng, cutoff):
    # band-limited random texture, zero mean, unit peak
    noise = rng.standard_normal((n, n))
    f = np.fft.fftfreq(n)
    keep = np.hypot(f[:, None], f[None, :]) <= cutoff
    field = np.fft.ifft2(np.fft.fft2(noise) * keep).real
    return field / np.abs(field).max()


def brain_like(n: int = 64, seed: int = 0):
    """Return ``(reference, followup)`` for a textured brain-like slice.

    Skull ring, textured parenchyma, dark ventricles. The follow-up adds a
    gentle low-frequency intensity drift and a small lesion.
    """
    rng = np.random.default_rng(seed)
    x, y = _grid(n)
    head = (x / 0.78) ** 2 + (y / 0.92) ** 2
    brain = (x / 0.70) ** 2 + (y / 0.84) ** 2
    img = np.where(head <= 1.0, 0.9, 0.0)
    img = np.where(brain <= 1.0, 0.45 + 0.12 * _smooth_field(n, rng, 0.12), img)
    img += np.where(brain <= 1.0, 0.06 * _smooth_field(n, rng, 0.3), 0.0)
    vent = _ellipse_image(n, ((1.0, 0.10, 0.22, -0.12, 0.08, 15),
                              (1.0, 0.10, 0.22, 0.12, 0.08, -15)))
    img = np.where(vent > 0, 0.15, img)
    img = np.clip(img, 0.0, 1.0)

    drift = 1.0 + 0.05 * np.cos(np.pi * x) * np.cos(0.5 * np.pi * y)
    follow = np.where(brain <= 1.0, img * drift, img)
    lesion = Tumor(row=int(round(0.35 * n)), col=int(round(0.62 * n)),
                   radius=max(1.0, n / 20), delta=0.3)
    follow[tumor_mask(n, lesion)] += lesion.delta
    return img, np.clip(follow, 0.0, 1.0)
