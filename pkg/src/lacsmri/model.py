"""Core value types: images, centered line indices, masks, line densities,
the case table and the experiment configuration."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    EtaOutOfRange,
    NonSquareImage,
    TooFewLinesPerRound,
    UnknownCase,
)


# --------------------------------------------------------------------------
# Images and centered indexing
# --------------------------------------------------------------------------

def as_image(pixels) -> np.ndarray:
    """Validate and return a square, finite, real float64 image."""
    img = np.asarray(pixels)
    if np.iscomplexobj(img):
        raise TypeError("images are real-valued")
    img = img.astype(np.float64, copy=False)
    if img.ndim != 2 or img.shape[0] != img.shape[1] or img.shape[0] == 0:
        raise NonSquareImage(f"expected a non-empty square image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite pixels")
    return img


def line_range(n: int) -> np.ndarray:
    """Centered line indices ``-n/2 .. n/2-1`` in storage-row order."""
    return np.arange(n) - n // 2


def ky_to_row(ky, n: int):
    return np.asarray(ky) + n // 2 if not np.isscalar(ky) else int(ky) + n // 2


def row_to_ky(row, n: int):
    return np.asarray(row) - n // 2 if not np.isscalar(row) else int(row) - n // 2


# --------------------------------------------------------------------------
# Masks and densities
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingMask:
    """Set of acquired phase-encode lines, stored as sorted centered indices."""

    n: int
    lines: tuple = ()

    def __post_init__(self):
        lines = tuple(sorted(int(k) for k in self.lines))
        if len(set(lines)) != len(lines):
            raise ValueError("mask lines must be distinct")
        lo, hi = -(self.n // 2), self.n - self.n // 2 - 1
        if lines and (lines[0] < lo or lines[-1] > hi):
            raise ValueError(f"mask lines must lie in [{lo}, {hi}]")
        object.__setattr__(self, "lines", lines)

    def __len__(self):
        return len(self.lines)

    def __contains__(self, ky):
        return int(ky) in self.lines

    @property
    def rows(self) -> np.ndarray:
        return np.asarray(self.lines, dtype=int) + self.n // 2

    def row_mask(self) -> np.ndarray:
        """Boolean vector over storage rows."""
        m = np.zeros(self.n, dtype=bool)
        m[self.rows] = True
        return m

    def union(self, new_lines) -> "SamplingMask":
        return SamplingMask(self.n, self.lines + tuple(new_lines))

    @classmethod
    def full(cls, n: int) -> "SamplingMask":
        return cls(n, tuple(line_range(n)))


@dataclass(frozen=True, eq=False)
class LinePdf:
    """Probability over centered line indices; ``prob[row]`` is P(ky = row - n/2)."""

    n: int
    prob: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.prob, dtype=np.float64)
        if p.shape != (self.n,):
            raise DimensionMismatch(f"pdf of length {p.shape} does not match n={self.n}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("pdf entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"pdf sums to {p.sum()!r}, not 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "prob", p)

    @classmethod
    def from_weights(cls, weights) -> "LinePdf":
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if not total > 0:
            raise ValueError("weights have no positive mass")
        return cls(len(w), w / total)

    @classmethod
    def uniform(cls, n: int) -> "LinePdf":
        return cls(n, np.full(n, 1.0 / n))

    def __getitem__(self, ky) -> float:
        return float(self.prob[ky_to_row(ky, self.n)])

    def entropy(self) -> float:
        p = self.prob[self.prob > 0]
        return float(-(p * np.log(p)).sum())

    def to_csv(self, path=None) -> str:
        """Two-column ``ky,prob`` CSV. Written to ``path`` when given."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["ky", "prob"])
        for ky, p in zip(line_range(self.n), self.prob):
            writer.writerow([int(ky), repr(float(p))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "LinePdf":
        rows = list(csv.DictReader(io.StringIO(text)))
        kys = [int(r["ky"]) for r in rows]
        n = len(rows)
        if kys != list(line_range(n)):
            raise ValueError("pdf CSV rows must list every centered line in order")
        return cls(n, np.array([float(r["prob"]) for r in rows]))


# --------------------------------------------------------------------------
# Case table
# --------------------------------------------------------------------------

class Density(str, enum.Enum):
    VD = "f_VD"
    VDS = "f_VDS"
    R = "f_R"
    ND = "f_ND"
    A = "f_A"


class Algorithm(str, enum.Enum):
    LACS = "LACS-MRI"
    L1W = "L1-W"


_VD, _VDS, _R, _ND, _A = Density.VD, Density.VDS, Density.R, Density.ND, Density.A
_LACS, _L1W = Algorithm.LACS, Algorithm.L1W

CASES = {
    1: (_VD, _R, _LACS),
    2: (_VDS, _R, _LACS),
    3: (_VD, None, _LACS),
    4: (_VDS, None, _LACS),
    5: (None, _R, _LACS),
    6: (None, _A, _LACS),
    7: (_VD, _A, _LACS),
    8: (_VDS, _A, _LACS),
    9: (_VD, _R, _L1W),
    10: (_VDS, _R, _L1W),
    11: (_VD, None, _L1W),
    12: (_VDS, None, _L1W),
    13: (None, _R, _L1W),
    14: (None, _A, _L1W),
    15: (_VD, _A, _L1W),
    16: (_VDS, _A, _L1W),
    17: (_VD, _ND, _LACS),
    18: (_VDS, _ND, _LACS),
    19: (None, _ND, _LACS),
    20: (_VD, _ND, _L1W),
    21: (_VDS, _ND, _L1W),
    22: (None, _ND, _L1W),
}


def case_lookup(case_id):
    """Return ``(variable_density, adaptive_density, algorithm)`` for a case.

    Missing densities are ``None``.
    """
    try:
        return CASES[int(case_id)]
    except (KeyError, TypeError, ValueError):
        raise UnknownCase(f"case {case_id!r} is not in 1..22", field="case_id") from None


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

SPARSIFIERS = ("wavelet", "gradient")
WAVELETS = ("db4", "haar")


@dataclass(frozen=True)
class ExperimentConfig:
    case_id: int = 1
    eta: float = 0.12
    num_iterations: int = 3
    trials: int = 50
    p: float = 1.0
    C: float = 1.0
    lam: float = 5.0
    epsilon1: float = 0.1
    sparsifier: str = "wavelet"
    seed: int = 0
    grayscale_c: float | None = None
    # solver and harness knobs
    wavelet: str = "db4"
    mu: float = 1.0
    data_scale: float = 5e-5
    epsilon: float = 0.0
    max_iter: int = 150
    pocs_decay: float = 0.9
    gamma_l1w: float = 0.5
    noise_std: float = 0.0
    gsc_modulus: bool = False
    eps_tr: float | None = None
    support_fraction: float = 0.05
    max_dense_n: int = 64
    rsnr_cap: float = 300.0

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def line_budget(self, n: int) -> int:
        """Number of k-space lines the compression level ``eta`` stands for."""
        return int(round(self.eta * n))

    def lines_per_round(self, n: int) -> int:
        """Largest per-round draw, ``ceil(m / N)`` for the budget ``m``."""
        return max(1, math.ceil(self.line_budget(n) / self.num_iterations))

    def round_sizes(self, n: int) -> list:
        """Split the budget ``m`` over the ``N`` rounds as evenly as possible,
        earlier rounds taking the remainder."""
        base, extra = divmod(min(self.line_budget(n), n), self.num_iterations)
        return [base + 1] * extra + [base] * (self.num_iterations - extra)


_KEY_ALIASES = {"lambda": "lam", "N": "num_iterations", "c": "grayscale_c"}
_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name, raw):
    kind = _FIELDS[name].type
    text = str(raw).strip()
    if name == "grayscale_c" or name == "eps_tr":
        if text.lower() in ("", "none", "absent"):
            return None
        return float(text)
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    return text


def config_from_mapping(values: dict) -> ExperimentConfig:
    kwargs = {}
    for key, raw in values.items():
        name = _KEY_ALIASES.get(key, key)
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}", field=key)
        try:
            kwargs[name] = _coerce(name, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", field=name) from None
    return ExperimentConfig(**kwargs)


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return config_from_mapping(values)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: ExperimentConfig) -> str:
    out = []
    for name in _FIELDS:
        value = getattr(cfg, name)
        out.append(f"{'lambda' if name == 'lam' else name}={'none' if value is None else value}")
    return "\n".join(out) + "\n"


def _number(cfg, name, kind=float):
    value = getattr(cfg, name)
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise ConfigError(f"{name} must be numeric, got {value!r}", field=name)
    if kind is int and int(value) != value:
        raise ConfigError(f"{name} must be an integer", field=name)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite", field=name)
    return value


def validate_config(cfg: ExperimentConfig, n: int | None = None) -> None:
    """Raise the :class:`ConfigError` subclass for the first violated field.

    Returns ``None`` when the configuration is usable. ``n`` is the grid size
    of the images the configuration will run on; without it the line-budget
    check is skipped.
    """
    if not isinstance(cfg, ExperimentConfig):
        raise ConfigError("not an ExperimentConfig")
    case_lookup(cfg.case_id)
    if isinstance(cfg.case_id, bool) or int(cfg.case_id) != cfg.case_id:
        raise UnknownCase(f"case {cfg.case_id!r} is not in 1..22", field="case_id")
    eta = _number(cfg, "eta")
    if not 0 < eta <= 1:
        raise EtaOutOfRange(f"eta={eta} is outside (0, 1]", field="eta")
    big_n = _number(cfg, "num_iterations", int)
    if big_n < 1:
        raise ConfigError("num_iterations must be positive", field="num_iterations")
    if _number(cfg, "trials", int) < 1:
        raise ConfigError("trials must be positive", field="trials")
    if _number(cfg, "p") < 0:
        raise ConfigError("p must be nonnegative", field="p")
    if _number(cfg, "C") <= 0:
        raise ConfigError("C must be positive", field="C")
    if _number(cfg, "lam") < 0:
        raise ConfigError("lambda must be nonnegative", field="lam")
    if _number(cfg, "epsilon1") <= 0:
        raise ConfigError("epsilon1 must be positive", field="epsilon1")
    if cfg.sparsifier not in SPARSIFIERS:
        raise ConfigError(f"sparsifier must be one of {SPARSIFIERS}", field="sparsifier")
    if cfg.wavelet not in WAVELETS:
        raise ConfigError(f"wavelet must be one of {WAVELETS}", field="wavelet")
    seed = _number(cfg, "seed", int)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must fit in 64 unsigned bits", field="seed")
    if cfg.grayscale_c is not None and not _number(cfg, "grayscale_c") > 0:
        raise ConfigError("grayscale_c must be positive", field="grayscale_c")
    if _number(cfg, "mu") <= 0:
        raise ConfigError("mu must be positive", field="mu")
    if _number(cfg, "data_scale") <= 0:
        raise ConfigError("data_scale must be positive", field="data_scale")
    if _number(cfg, "epsilon") < 0:
        raise ConfigError("epsilon must be nonnegative", field="epsilon")
    if _number(cfg, "max_iter", int) < 1:
        raise ConfigError("max_iter must be positive", field="max_iter")
    if not 0 < _number(cfg, "pocs_decay") < 1:
        raise ConfigError("pocs_decay must lie in (0, 1)", field="pocs_decay")
    if not 0 <= _number(cfg, "gamma_l1w") <= 1:
        raise ConfigError("gamma_l1w must lie in [0, 1]", field="gamma_l1w")
    if _number(cfg, "noise_std") < 0:
        raise ConfigError("noise_std must be nonnegative", field="noise_std")
    if cfg.eps_tr is not None and not _number(cfg, "eps_tr") > 0:
        raise ConfigError("eps_tr must be positive", field="eps_tr")
    if not 0 < _number(cfg, "support_fraction") <= 1:
        raise ConfigError("support_fraction must lie in (0, 1]", field="support_fraction")
    if n is not None and cfg.line_budget(n) < big_n:
        raise TooFewLinesPerRound(
            f"eta*n = {eta * n:.2f} lines cannot cover {big_n} rounds",
            field="num_iterations",
        )
