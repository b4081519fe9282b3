"""Additive-model MSE against its eigenvalue-spread bounds.

Reproduces the two spread cases (0.9 and 0.5 times lambda_max) plus the
zero-spread control, and then looks at where the subspace-projection MSE
drops below the additive one.
"""

# %%
import numpy as np

from relaybeam import analysis
from relaybeam.harness import experiments, output

cfg = experiments.preset("mse-bounds")
res = experiments.run_mse_bounds_figure(cfg, lambda_grid=np.linspace(0.2, 2.0, 4), draws=20000)
print(f"{'ratio':>5} {'lambda':>6} {'lower':>8} {'upper':>8} {'exact':>8} {'monte carlo':>11}")
for ratio, lam, lo, hi, exact, emp in res.table:
    print(f"{ratio:5.1f} {lam:6.2f} {lo:8.4f} {hi:8.4f} {exact:8.4f} {emp:11.4f}")

# %% subspace MSE vs additive MSE along the covariance norm
M, P_s, P_n, eps, lam = 8, 1.0, 0.1, 0.2, 1.0
tau_max = analysis.tau_threshold(lam, M, P_s, P_n, eps)
tau = 0.5 * tau_max
onset = analysis.gap_onset(lam, M, P_s, P_n, eps, tau)
print(f"\ntau threshold {tau_max:.3f}; with tau = {tau:.3f} the subspace MSE is lower only for "
      f"||R_f|| > {onset:.3f} (upper end sqrt(M) lambda_max = {np.sqrt(M) * lam:.3f})")
for r in np.linspace(0.25, np.sqrt(M) * lam, 6):
    print(f"  ||R_f|| = {r:5.2f}: subspace {analysis.mse_subspace(r, P_s, P_n, eps, tau):6.3f}, "
          f"additive {analysis.mse_additive_norm(r, eps, M):6.3f}")

output.emit_csv(res, "results/mse-bounds.csv")
