"""Reduced-size versions of the mismatch and power sweeps.

40 trials instead of 200 keeps this under a minute; the CLI runs the
full-size experiments (``relaybeam run --experiment eps-sweep``).
"""

# %%
from relaybeam.harness import experiments, output

for name in ("eps-sweep", "pt-sweep"):
    cfg = experiments.preset(name, trials=40, seed=3)
    res = experiments.run_experiment(cfg, name)
    print(f"\n{name} ({res.sweep_name})")
    for value in cfg.sweep_values:
        cells = {r.method: r for r in res.rows if r.sweep_value == value}
        print(f"  {value:4.1f}: " + "  ".join(
            f"{m} {r.mean_sinr_db:6.2f}±{r.stderr_db:.2f}" for m, r in cells.items()))
    output.emit_csv(res, f"results/{name}-small.csv")
    output.emit_plot_data(res, f"results/{name}-small_plot.csv")
