"""Experiment harness: image files, the case runner, parameter sweeps and
their CSV tables."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import NonSquareImage, UnsupportedFormat
from .metrics import rsnr
from .model import Algorithm, ExperimentConfig, as_image, case_lookup, validate_config
from .phantom import PhantomSpec, Tumor, brain_like, default_tumor, shepp_logan
from .pipeline import Scanner, l1w_pipeline, lacs_mri

__all__ = [
    "CaseResult",
    "PhantomSpec",
    "Tumor",
    "brain_like",
    "default_tumor",
    "load_image",
    "rsnr",
    "run_case",
    "save_image",
    "shepp_logan",
    "sweep_eta",
    "sweep_grayscale",
    "sweep_p_c",
]

TRACE_HEADER = ("case_id", "eta", "trial", "round", "gamma", "c_estimate", "rsnr_db")
ETA_HEADER = ("case_id", "eta", "mean_rsnr_db", "std_rsnr_db", "trials")
PC_HEADER = ("p", "C", "mean_rsnr_db", "std_rsnr_db", "trials")
GRAY_HEADER = ("c", "eta", "sc_mean_rsnr_db", "nsc_mean_rsnr_db", "sc_std_rsnr_db",
               "nsc_std_rsnr_db", "trials")


# --------------------------------------------------------------------------
# Image files
# --------------------------------------------------------------------------

def load_image(path) -> np.ndarray:
    """Read a binary grayscale PGM as floats in [0, 1]."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(2)
    if magic != b"P5":
        raise UnsupportedFormat(f"{path}: only binary grayscale PGM (P5) is supported")
    try:
        with Image.open(path) as im:
            mode = im.mode
            arr = np.array(im)
    except (UnidentifiedImageError, OSError) as exc:
        raise UnsupportedFormat(f"{path}: {exc}") from None
    maxval = 255.0 if mode == "L" else 65535.0
    if arr.ndim != 2:
        raise UnsupportedFormat(f"{path}: not a single-channel image")
    if arr.shape[0] != arr.shape[1]:
        raise NonSquareImage(f"{path}: {arr.shape[1]}x{arr.shape[0]} is not square")
    return arr.astype(np.float64) / maxval


def save_image(img, path, bits: int = 16) -> None:
    """Write ``img`` as a binary PGM. Values are clipped to [0, 1] and
    quantized to ``bits`` (8 or 16)."""
    img = as_image(img)
    if bits == 8:
        data = np.round(np.clip(img, 0, 1) * 255).astype(np.uint8)
    elif bits == 16:
        data = np.round(np.clip(img, 0, 1) * 65535).astype(np.uint16)
    else:
        raise UnsupportedFormat("bits must be 8 or 16")
    Image.fromarray(data).save(Path(path), format="PPM")


# --------------------------------------------------------------------------
# Case runner
# --------------------------------------------------------------------------

@dataclass
class CaseResult:
    case_id: int
    eta: float
    mean_rsnr_db: float
    std_rsnr_db: float
    trials: int
    runtime_seconds: float
    per_trial: tuple = ()
    rows: list = field(default_factory=list, repr=False)

    def trace_csv(self) -> str:
        return write_csv(TRACE_HEADER, self.rows)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(header, rows, path=None) -> str:
    """Fixed-header CSV; floats are written with ``repr`` so they re-parse exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(text: str) -> list:
    """Parse a table written by :func:`write_csv` into dicts of floats/ints."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for key, value in row.items():
            try:
                parsed[key] = int(value)
            except ValueError:
                parsed[key] = float(value)
        out.append(parsed)
    return out


def run_case(case_id, images, cfg: ExperimentConfig, *, scale_correction=None,
             cache: dict | None = None) -> CaseResult:
    """Run ``cfg.trials`` seeded trials of one case.

    ``images`` is ``(reference, followup)``. Trial ``t`` samples with seed
    ``cfg.seed + t``. When ``cfg.grayscale_c`` is set the scanned image is
    ``grayscale_c * followup`` and, unless ``scale_correction`` says
    otherwise, the scale-corrected loop is used.
    """
    cfg = cfg.replace(case_id=int(case_id))
    reference, followup = (as_image(im) for im in images)
    if reference.shape != followup.shape:
        raise NonSquareImage("reference and follow-up differ in size")
    n = reference.shape[0]
    validate_config(cfg, n)
    vd, ad, algorithm = case_lookup(cfg.case_id)
    if scale_correction is None:
        scale_correction = cfg.grayscale_c is not None
    truth = followup if cfg.grayscale_c is None else cfg.grayscale_c * followup
    if cache is None:
        cache = {}

    start = time.perf_counter()
    finals, rows = [], []
    for trial in range(cfg.trials):
        tcfg = cfg.replace(seed=cfg.seed + trial)
        scanner = Scanner(truth, cfg.noise_std, seed=(cfg.seed + trial, 1),
                          rsnr_cap=cfg.rsnr_cap)
        if algorithm is Algorithm.LACS:
            _, trace = lacs_mri(scanner, reference, tcfg, vd, ad,
                                scale_correction=scale_correction, cache=cache)
        else:
            _, trace = l1w_pipeline(scanner, reference, tcfg, vd, ad, cache=cache)
        finals.append(trace.final_rsnr)
        for rec in trace:
            rows.append((cfg.case_id, float(cfg.eta), trial, rec.round, float(rec.gamma),
                         float(rec.c_estimate), float(rec.rsnr_db)))
    values = np.array(finals)
    return CaseResult(
        case_id=cfg.case_id,
        eta=cfg.eta,
        mean_rsnr_db=float(values.mean()),
        std_rsnr_db=float(values.std()),
        trials=cfg.trials,
        runtime_seconds=time.perf_counter() - start,
        per_trial=tuple(finals),
        rows=rows,
    )


def harness_config(cfg: ExperimentConfig, n: int) -> ExperimentConfig:
    """Cap the number of rounds at the line budget so tiny budgets still run."""
    budget = max(1, cfg.line_budget(n))
    return cfg.replace(num_iterations=min(cfg.num_iterations, budget))


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

def sweep_eta(case_ids, eta_list, images, cfg: ExperimentConfig) -> list:
    """One :class:`CaseResult` per (case, eta), cases outermost."""
    n = np.asarray(images[0]).shape[0]
    out = []
    for case_id in case_ids:
        cache = {}
        for eta in eta_list:
            c = harness_config(cfg.replace(case_id=int(case_id), eta=float(eta)), n)
            out.append(run_case(case_id, images, c, cache=cache))
    return out


def eta_table(results) -> list:
    return [(r.case_id, float(r.eta), r.mean_rsnr_db, r.std_rsnr_db, r.trials) for r in results]


def sweep_p_c(p_range, c_list, images, cfg: ExperimentConfig, case_id: int = 4) -> list:
    """Mean RSNR of an f_VDS case for every (p, C) pair, p outermost.

    Rows are ``(p, C, mean, std, trials)``.
    """
    n = np.asarray(images[0]).shape[0]
    rows = []
    for p in p_range:
        for big_c in c_list:
            c = harness_config(cfg.replace(case_id=case_id, p=float(p), C=float(big_c)), n)
            res = run_case(case_id, images, c)
            rows.append((float(p), float(big_c), res.mean_rsnr_db, res.std_rsnr_db, res.trials))
    return rows


def sweep_grayscale(c_list, eta_list, images, cfg: ExperimentConfig) -> list:
    """Scale-corrected against uncorrected reconstruction per (c, eta).

    Rows are ``(c, eta, sc_mean, nsc_mean, sc_std, nsc_std, trials)``. Both
    variants see the same seeds, hence the same first-round lines.
    """
    n = np.asarray(images[0]).shape[0]
    rows = []
    for c_val in c_list:
        for eta in eta_list:
            c = harness_config(cfg.replace(grayscale_c=float(c_val), eta=float(eta)), n)
            sc = run_case(c.case_id, images, c, scale_correction=True)
            nsc = run_case(c.case_id, images, c, scale_correction=False)
            rows.append((float(c_val), float(eta), sc.mean_rsnr_db, nsc.mean_rsnr_db,
                         sc.std_rsnr_db, nsc.std_rsnr_db, c.trials))
    return rows


def eta_grid(start: float, stop: float, step: float) -> list:
    """Inclusive grid rounded to 10 decimals, e.g. 0.03..0.21 by 0.03."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]
