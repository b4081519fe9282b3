"""Monte Carlo experiment drivers.

Each trial owns its random streams, derived from ``(seed, trial index)``
through ``numpy.random.SeedSequence`` spawn keys. The sweep index is not
part of the key, so every sweep point sees the same networks, mismatch
levels and noise (common random numbers); trends along a sweep are then
not masked by trial-to-trial variation.

Trials run independently, optionally in worker processes, and are reduced
in trial-index order so the floating-point sums never depend on scheduling.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .. import analysis, channel, estimator, signals
from .config import ScenarioConfig

STREAMS = ("network", "epsilon", "observation", "signal", "non_robust")
SEED_DERIVATION = (
    "numpy.random.SeedSequence(entropy=seed, spawn_key=(trial,)).spawn(5) gives the "
    "network, epsilon, observation, signal and non_robust streams; "
    "the sweep index is not mixed in, so sweep points share trial draws"
)
SINR_FLOOR = 1e-30


# -- results --------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    sweep_name: str
    sweep_value: object
    method: str
    mean_sinr_db: float
    stderr_db: float
    mean_sinr_max_db: float
    trials: int


@dataclass
class ExperimentResult:
    """Aggregated rows plus, for table-style experiments, a custom table.

    `columns`/`table` are used by experiments whose output does not fit
    the SINR row schema (MSE bounds, timing).
    """

    name: str
    sweep_name: str
    rows: list = field(default_factory=list)
    columns: tuple | None = None
    table: list | None = None
    meta: dict = field(default_factory=dict)

    @property
    def is_table(self) -> bool:
        return self.columns is not None

    def series(self, method: str) -> list[ResultRow]:
        return [r for r in self.rows if r.method == method]


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    kind: str
    defaults: dict


EXPERIMENTS = {
    e.name: e
    for e in [
        Experiment(
            "eps-sweep",
            "output SINR vs maximum mismatch level eps_max",
            "sweep",
            dict(eps_max=tuple(round(0.1 * i, 1) for i in range(1, 11)), P_T_dbw=(1.0,), snr_db=(10.0,)),
        ),
        Experiment(
            "pt-sweep",
            "output SINR vs total relay power budget P_T (dBW)",
            "sweep",
            dict(P_T_dbw=(1.0, 2.0, 3.0, 4.0, 5.0), eps_max=(0.5,), snr_db=(10.0,)),
        ),
        Experiment(
            "incoherent",
            "output SINR vs SNR with one dominant interferer",
            "sweep",
            dict(
                snr_db=(0.0, 5.0, 10.0, 15.0, 20.0),
                eps_max=(0.2,),
                P_T_dbw=(1.0,),
                inr_db=20.0,
                interferer_power_ratio=10.0,
            ),
        ),
        Experiment(
            "snapshot-trace",
            "output SINR vs snapshot index, dominant-interferer scenario",
            "trace",
            dict(
                snr_db=(10.0,), eps_max=(0.2,), P_T_dbw=(1.0,), inr_db=20.0, interferer_power_ratio=10.0
            ),
        ),
        Experiment(
            "pc-selection",
            "output SINR vs forced principal-component count N",
            "pc",
            dict(eps_max=(0.5,), P_T_dbw=(1.0,), snr_db=(10.0,)),
        ),
        Experiment(
            "mse-bounds",
            "additive-model MSE and its bounds vs lambda_max",
            "mse",
            dict(eps_max=(0.2,)),
        ),
        Experiment(
            "complexity",
            "median weight-solve time vs relay count M",
            "complexity",
            dict(),
        ),
    ]
}


def preset(name: str, **overrides) -> ScenarioConfig:
    """Default config of a named experiment, with keyword overrides."""
    try:
        exp = EXPERIMENTS[name]
    except KeyError:
        raise KeyError(f"unknown experiment {name!r}; known: {', '.join(EXPERIMENTS)}") from None
    return ScenarioConfig(**{**exp.defaults, **overrides}).validate()


# -- per-trial work ---------------------------------------------------------------


def trial_streams(seed: int, trial: int) -> dict[str, np.random.Generator]:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, ss.spawn(len(STREAMS)))}


def to_db(x) -> np.ndarray | float:
    out = 10.0 * np.log10(np.maximum(x, SINR_FLOOR))
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class TrialOutcome:
    """True and self-reported SINR (linear) per method for one trial."""

    sinr: dict
    sinr_max: dict
    lrcc_trace: estimator.LrccTrace | None = None


def draw_network(cfg: ScenarioConfig, rng: np.random.Generator) -> channel.TrueChannels:
    geo = channel.sample_geometry(rng, cfg.M)
    gains = channel.large_scale_gains(rng, geo, L=cfg.L, rho=cfg.rho, sigma_s_db=cfg.sigma_s_db)
    return channel.sample_true_channels(rng, geo, gains, cfg.K)


def run_trial(
    cfg: ScenarioConfig,
    trial: int,
    n_components: int | None = None,
    keep_trace: bool = False,
) -> TrialOutcome:
    """One network realization at one (pinned) sweep point."""
    rng = trial_streams(cfg.seed, trial)
    channels = draw_network(cfg, rng["network"])
    config, P_n = signals.source_config_for(
        cfg.scalar("snr_db"), cfg.inr_db, cfg.K, interferer_ratio=cfg.interferer_power_ratio
    )
    P_T = 10.0 ** (cfg.scalar("P_T_dbw") / 10.0)
    eps_max = cfg.scalar("eps_max")
    epsilon = channel.draw_epsilon(rng["epsilon"], eps_max)
    true_moments = signals.exact_moments(channels.F, channels.g, config, P_n)

    sinr, sinr_max, trace = {}, {}, None
    for method in cfg.methods:
        if method == "perfect_csi":
            sol = estimator.baseline_perfect_csi(true_moments, P_n, P_T)
        elif method == "non_robust":
            obs = channel.apply_mismatch(rng["non_robust"], channels, eps_max, epsilon)
            sol = estimator.baseline_non_robust(obs, config, P_n, P_T)
        else:
            inputs = estimator.TrialInputs(
                channels, config, P_n, P_T, eps_max, epsilon, rng["observation"], rng["signal"]
            )
            trace = estimator.run_lrcc(
                inputs, mode=cfg.mode, snapshots=cfg.snapshots,
                n_components=n_components, true_moments=true_moments,
            )
            sol = trace.final
        sinr[method] = signals.output_sinr(sol.w, true_moments)
        sinr_max[method] = sol.sinr_max
    return TrialOutcome(sinr, sinr_max, trace if keep_trace else None)


def _trace_task(args):
    cfg, trial = args
    out = run_trial(cfg, trial, keep_trace=True)
    tr = out.lrcc_trace
    return out.sinr, out.sinr_max, (tr.true_sinr, tr.sinr_max) if tr is not None else None


def _sweep_task(args):
    cfg, trial, n_components = args
    out = run_trial(cfg, trial, n_components=n_components)
    return out.sinr, out.sinr_max


def _map(fn: Callable, tasks: Sequence, workers: int) -> list:
    """Ordered map, in-process for one worker."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


# -- aggregation ------------------------------------------------------------------


def summarize(values_db: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error of per-trial dB values, summed in trial order."""
    a = np.asarray(values_db, dtype=float)
    n = a.size
    mean = math.fsum(a) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((a - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def _rows_for(sweep_name, value, methods, outcomes) -> list[ResultRow]:
    rows = []
    for m in methods:
        mean, se = summarize([to_db(o[0][m]) for o in outcomes])
        mean_max, _ = summarize([to_db(o[1][m]) for o in outcomes])
        rows.append(ResultRow(sweep_name, value, m, mean, se, mean_max, len(outcomes)))
    return rows


# -- experiments ------------------------------------------------------------------


def run_experiment(cfg: ScenarioConfig, name: str = "custom", workers: int = 1) -> ExperimentResult:
    """Sweep experiment: one row per (sweep point, method)."""
    cfg.validate()
    sweep_name = cfg.sweep_field or "eps_max"
    points = [cfg.point(v) for v in cfg.sweep_values]
    tasks = [(p, t, None) for p in points for t in range(cfg.trials)]
    flat = _map(_sweep_task, tasks, workers)
    result = ExperimentResult(name, sweep_name, meta=_meta(cfg, name))
    for i, v in enumerate(cfg.sweep_values):
        chunk = flat[i * cfg.trials : (i + 1) * cfg.trials]
        result.rows.extend(_rows_for(sweep_name, v, cfg.methods, chunk))
    return result


def run_snapshot_trace(cfg: ScenarioConfig, name: str = "snapshot-trace", workers: int = 1) -> ExperimentResult:
    """Per-snapshot mean SINR of the robust method; baselines repeat per snapshot."""
    cfg.validate()
    if cfg.sweep_field is not None:
        raise ValueError("snapshot-trace takes a single scenario point, not a sweep")
    cfg = cfg if "lrcc" in cfg.methods else cfg.replace(methods=cfg.methods + ("lrcc",))
    outs = _map(_trace_task, [(cfg, t) for t in range(cfg.trials)], workers)
    true_db = np.array([to_db(o[2][0]) for o in outs])  # trials x snapshots
    max_db = np.array([to_db(o[2][1]) for o in outs])
    result = ExperimentResult(name, "snapshot", meta=_meta(cfg, name))
    baselines = {m: _rows_for("snapshot", 0, [m], outs)[0] for m in cfg.methods if m != "lrcc"}
    for t in range(cfg.snapshots):
        mean, se = summarize(true_db[:, t])
        mean_max, _ = summarize(max_db[:, t])
        result.rows.append(ResultRow("snapshot", t + 1, "lrcc", mean, se, mean_max, cfg.trials))
        for m, r in baselines.items():
            result.rows.append(ResultRow("snapshot", t + 1, m, r.mean_sinr_db, r.stderr_db, r.mean_sinr_max_db, r.trials))
    return result


def run_pc_selection(
    cfg: ScenarioConfig,
    name: str = "pc-selection",
    workers: int = 1,
    counts: Sequence[int] | None = None,
) -> ExperimentResult:
    """Robust-method SINR with the principal-component count forced to each N.

    The automatic selection is reported as sweep value ``auto``.
    """
    cfg.validate()
    if cfg.sweep_field is not None:
        raise ValueError("pc-selection takes a single scenario point, not a sweep")
    cfg = cfg.replace(methods=("lrcc",))
    counts = list(range(1, cfg.M + 1)) if counts is None else list(counts)
    labels = counts + ["auto"]
    tasks = [(cfg, t, None if n == "auto" else n) for n in labels for t in range(cfg.trials)]
    flat = _map(_sweep_task, tasks, workers)
    result = ExperimentResult(name, "N", meta=_meta(cfg, name))
    for i, n in enumerate(labels):
        result.rows.extend(_rows_for("N", n, ("lrcc",), flat[i * cfg.trials : (i + 1) * cfg.trials]))
    return result


MSE_COLUMNS = ("sigma_ratio", "lambda_max", "lower", "upper", "mse_additive", "empirical_mse")


def run_mse_bounds_figure(
    cfg: ScenarioConfig,
    name: str = "mse-bounds",
    lambda_grid: Sequence[float] | None = None,
    sigma_ratios: Sequence[float] = (0.9, 0.5, 0.0),
    draws: int = 20000,
) -> ExperimentResult:
    """Additive-model MSE bounds against lambda_max for each spread ratio.

    For every grid point a covariance with the prescribed extremes is built
    (inner eigenvalues uniform between them), and both its closed-form and
    Monte Carlo additive MSE are reported next to the bounds. The ratio 0
    is the equal-eigenvalue control, where the bounds coincide.
    """
    cfg.validate()
    eps_max = cfg.scalar("eps_max")
    grid = np.linspace(0.1, 2.0, 20) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0,)))
    table = []
    for ratio in sigma_ratios:
        for lam in grid:
            spec = analysis.EigenSpreadSpec(float(lam), float(ratio * lam), cfg.M)
            b = analysis.mse_bounds(spec, eps_max)
            R = analysis.matrix_with_spectrum(analysis.spectrum_for_spread(spec, rng), rng)
            exact = analysis.mse_additive(R, eps_max)
            emp = analysis.empirical_additive_mse(R, eps_max, rng, draws=draws)
            table.append((float(ratio), float(lam), b.lower, b.upper, exact, emp))
    return ExperimentResult(name, "lambda_max", columns=MSE_COLUMNS, table=table, meta=_meta(cfg, name))


COMPLEXITY_COLUMNS = ("M", "median_solve_seconds", "repetitions")


def random_instance(rng: np.random.Generator, M: int, K: int = 3, P_n: float = 0.1) -> signals.MomentSet:
    """Moments of a random Rayleigh network; well conditioned since P_n > 0."""
    F = channel.complex_normal(rng, (M, K))
    g = channel.complex_normal(rng, M)
    return signals.exact_moments(F, g, signals.SourceConfig(np.ones(K)), P_n)


def run_complexity_probe(
    M_list: Sequence[int] = (8, 16, 32, 64, 128),
    repetitions: int = 20,
    seed: int = 0,
    name: str = "complexity",
    P_T: float = 10 ** 0.1,
) -> ExperimentResult:
    """Median wall time of the weight solve for each relay count.

    Timings are machine dependent and therefore excluded from the
    byte-identical output guarantee.
    """
    M_list = [int(m) for m in M_list]
    if len(M_list) < 4 or any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise ValueError("M_list must be strictly ascending with at least 4 points")
    if repetitions < 20:
        raise ValueError("need at least 20 repetitions per size")
    rng = np.random.default_rng(seed)
    table = []
    for M in M_list:
        instances = [random_instance(rng, M) for _ in range(repetitions)]
        estimator.solve_weights(instances[0], 0.1, P_T)  # warm-up
        times = []
        for mom in instances:
            t0 = time.perf_counter()
            estimator.solve_weights(mom, 0.1, P_T)
            times.append(time.perf_counter() - t0)
        table.append((M, float(np.median(times)), repetitions))
    return ExperimentResult(name, "M", columns=COMPLEXITY_COLUMNS, table=table, meta={"experiment": name})


def loglog_slope(M_values, seconds) -> float:
    return float(np.polyfit(np.log(M_values), np.log(seconds), 1)[0])


# -- dispatch -------------------------------------------------------------------------


def _meta(cfg: ScenarioConfig, name: str) -> dict:
    d = cfg.as_dict()
    return {
        "experiment": name,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()},
        "seed_derivation": SEED_DERIVATION,
    }


def run_named(name: str, cfg: ScenarioConfig, workers: int = 1) -> ExperimentResult:
    kind = EXPERIMENTS[name].kind
    if kind == "sweep":
        return run_experiment(cfg, name, workers)
    if kind == "trace":
        return run_snapshot_trace(cfg, name, workers)
    if kind == "pc":
        return run_pc_selection(cfg, name, workers)
    if kind == "mse":
        return run_mse_bounds_figure(cfg, name)
    return run_complexity_probe(seed=cfg.seed, name=name)
