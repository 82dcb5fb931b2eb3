"""Reference-guided adaptive compressed-sensing MRI on Cartesian line trajectories."""

from .errors import *  # noqa: F401,F403
from .grayscale import ScaleEstimate, gsc_update, lacs_mri_sc
from .metrics import rsnr
from .model import (
    CASES,
    Algorithm,
    Density,
    ExperimentConfig,
    LinePdf,
    SamplingMask,
    case_lookup,
    load_config,
    parse_config,
    validate_config,
)
from .phantom import PhantomSpec, Tumor, brain_like, shepp_logan
from .pipeline import ReconState, Scanner, Trace, l1w_pipeline, lacs_mri
from .recon import Weights, initial_weights, solve_l1w, solve_weighted, update_weights
from .sampling import (
    draw_lines,
    mix_pdf,
    pdf_a,
    pdf_nd,
    pdf_r,
    pdf_vd,
    pdf_vds,
    update_gamma,
)
from .transforms import (
    fft2_centered,
    gradient_adjoint,
    gradient_fwd,
    ifft2_centered,
    measure,
    wavelet_fwd,
    wavelet_inv,
)

__version__ = "0.1.0"
