"""Walk through one relay network realization.

Draws a network, runs the robust beamformer for 100 snapshots and compares
the SINR it reaches on the true channels with the perfect-CSI and
non-robust weights.
"""

# %%
import numpy as np

from relaybeam import channel, estimator, signals

rng = np.random.default_rng(7)
M, K = 8, 3

geo = channel.sample_geometry(rng, M)
gains = channel.large_scale_gains(rng, geo)
true = channel.sample_true_channels(rng, geo, gains, K)
print("relay-destination distances:", np.round(geo.relay_destination, 3))
print("per-relay amplitude gains:   ", np.round(gains.amplitude, 2))

# %% SNR 10 dB, INR 10 dB split equally over the two interferers
config, P_n = signals.source_config_for(snr_db=10, inr_db=10, K=K)
P_T = 10 ** (1 / 10)  # 1 dBW
eps_max = 0.5
epsilon = channel.draw_epsilon(rng, eps_max)
print(f"P_n = {P_n:.3f}, interferer powers = {config.powers[1:]}, epsilon = {epsilon:.3f}")

moments = signals.exact_moments(true.F, true.g, config, P_n)

# %% baselines
perfect = estimator.baseline_perfect_csi(moments, P_n, P_T)
observed = channel.apply_mismatch(rng, true, eps_max, epsilon)
naive = estimator.baseline_non_robust(observed, config, P_n, P_T)


def db(x):
    return 10 * np.log10(x)


print(f"perfect CSI : {db(signals.output_sinr(perfect.w, moments)):6.2f} dB")
print(f"non-robust  : {db(signals.output_sinr(naive.w, moments)):6.2f} dB "
      f"(believes {db(naive.sinr_max):.2f} dB)")

# %% robust beamformer
inputs = estimator.TrialInputs(
    true, config, P_n, P_T, eps_max, epsilon,
    obs_rng=np.random.default_rng(1), sig_rng=np.random.default_rng(2),
)
trace = estimator.run_lrcc(inputs, snapshots=100, true_moments=moments)
for t in (0, 4, 9, 24, 49, 99):
    print(f"snapshot {t + 1:3d}: true SINR {db(trace.true_sinr[t]):6.2f} dB, "
          f"N_f = {trace.N_f[t].tolist()}, N_g = {trace.N_g[t]}")
print("relay power of final weights on the estimated moments:", round(trace.final.relay_power, 6))
