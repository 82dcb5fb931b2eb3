"""The line densities used to pick phase-encode rows, printed side by side."""

# %%
import numpy as np

from lacsmri.phantom import PhantomSpec, default_tumor, shepp_logan
from lacsmri.sampling import mix_pdf, pdf_a, pdf_nd, pdf_r, pdf_vd, pdf_vds
from lacsmri.transforms import fft2_centered

n = 16
ref, follow = shepp_logan(PhantomSpec(n, default_tumor(n)))
kr, kf = fft2_centered(ref), fft2_centered(follow)

pdfs = {
    "vd p=1": pdf_vd(n, 1.0),
    "vds p=1 C=1": pdf_vds(n, 1.0, 1.0),
    "vds p=1 C=.001": pdf_vds(n, 1.0, 0.001),
    "R": pdf_r(n, kr),
    "ND": pdf_nd(n, kr, kf),
    "A": pdf_a(n, "wavelet", reference=ref),
}
pdfs["0.3 ND + 0.7 vd"] = mix_pdf(pdfs["ND"], pdfs["vd p=1"], 0.3)

# %%
names = list(pdfs)
print("  ky " + "".join(f"{name:>16}" for name in names))
for i, ky in enumerate(range(-n // 2, n // 2)):
    print(f"{ky:4d} " + "".join(f"{pdfs[name].prob[i]:16.4f}" for name in names))

# %% Entropy as a one-number summary of how concentrated each density is.
for name, pdf in pdfs.items():
    p = pdf.prob[pdf.prob > 0]
    print(f"{name:>16}: entropy {-(p * np.log2(p)).sum():.3f} bits (uniform {np.log2(n):.3f})")
