"""How many principal components should the projection keep?

Forces N = 1..M for the robust beamformer and compares with the automatic
selection rule on the same trials.
"""

# %%
import numpy as np

from relaybeam.harness import experiments

cfg = experiments.preset("pc-selection", trials=30, seed=5)
res = experiments.run_pc_selection(cfg)
for r in res.rows:
    bar = "#" * max(0, int(np.round(r.mean_sinr_db)))
    print(f"N = {str(r.sweep_value):>4}: {r.mean_sinr_db:6.2f} dB  {bar}")

# %% which counts does the automatic rule pick?
counts = []
for trial in range(cfg.trials):
    out = experiments.run_trial(cfg.replace(methods=("lrcc",)), trial, keep_trace=True)
    counts.extend(out.lrcc_trace.N_f[-1].tolist())
values, freq = np.unique(counts, return_counts=True)
print("automatic N_f at the last snapshot:", dict(zip(values.tolist(), freq.tolist())))
