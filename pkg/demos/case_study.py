"""Reference-guided sampling on a small phantom.

A follow-up scan differs from an earlier reference by a small lesion. We
compare adaptive LACS runs against the plain variable-density weighted-l1
baseline at a few compression levels. Runs in well under a minute.
"""

# %%
import numpy as np

from lacsmri import ExperimentConfig
from lacsmri.bench import harness_config, run_case
from lacsmri.phantom import PhantomSpec, default_tumor, shepp_logan

ref, follow = shepp_logan(PhantomSpec(32, default_tumor(32)))
print("pixels changed by the lesion:", np.count_nonzero(ref != follow))

# %% Cases 1 (f_VD + f_R) and 17 (f_VD + f_ND) are LACS; 11 is the baseline.
cases = {1: "LACS  vd+R ", 17: "LACS  vd+ND", 11: "L1-W  vd   "}
print("\ncase          " + "".join(f"eta={eta:<6}" for eta in (0.06, 0.12, 0.18)))
for case_id, label in cases.items():
    cells = []
    for eta in (0.06, 0.12, 0.18):
        cfg = harness_config(ExperimentConfig(case_id=case_id, eta=eta, trials=5), 32)
        cells.append(run_case(case_id, (ref, follow), cfg).mean_rsnr_db)
    print(f"{case_id:>2} {label}  " + "".join(f"{v:9.2f}" for v in cells))

# %% Per-round trace of a single trial: gamma is the mixing weight on f_ad.
res = run_case(1, (ref, follow), ExperimentConfig(eta=0.18, trials=1, seed=7))
print()
print(res.trace_csv())
