"""Scenario configuration: a flat ``key = value`` text format.

Example file::

    # mismatch sweep
    eps_max = 0.1, 0.2, 0.3
    snr_db = 10
    trials = 200

Blank lines and ``#`` comments are ignored. A comma-separated value turns
a sweepable field into a sweep; at most one field may be swept.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

METHODS = ("lrcc", "perfect_csi", "non_robust")
SWEEPABLE = ("eps_max", "P_T_dbw", "snr_db")
MODES = ("instantaneous", "statistics")
SEED_MAX = 2**64 - 1


class ConfigError(ValueError):
    """Invalid configuration; ``fields`` names every offending key."""

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        self.fields = sorted(self.problems)
        lines = [f"{k}: {v}" for k, v in sorted(self.problems.items())]
        super().__init__("invalid configuration\n  " + "\n  ".join(lines))


@dataclass(frozen=True)
class ScenarioConfig:
    M: int = 8
    K: int = 3
    rho: float = 2.0
    L_db: float = 10.0
    sigma_s_db: float = 3.0
    eps_max: tuple = (0.5,)
    P_T_dbw: tuple = (1.0,)
    snr_db: tuple = (10.0,)
    inr_db: float = 10.0
    interferer_power_ratio: float = 1.0
    snapshots: int = 100
    trials: int = 200
    seed: int = 0
    mode: str = "instantaneous"
    methods: tuple = METHODS

    def __post_init__(self):
        for name in SWEEPABLE:
            v = getattr(self, name)
            if not isinstance(v, tuple):
                v = tuple(v) if isinstance(v, (list, range)) else (v,)
            object.__setattr__(self, name, tuple(float(x) for x in v))
        if isinstance(self.methods, str):
            object.__setattr__(self, "methods", (self.methods,))
        else:
            object.__setattr__(self, "methods", tuple(self.methods))

    @property
    def sweep_field(self) -> str | None:
        swept = [n for n in SWEEPABLE if len(getattr(self, n)) > 1]
        return swept[0] if swept else None

    @property
    def sweep_values(self) -> tuple:
        name = self.sweep_field
        return getattr(self, name) if name else (getattr(self, SWEEPABLE[0])[0],)

    def point(self, value: float) -> "ScenarioConfig":
        """The config with the sweep field pinned at `value`."""
        name = self.sweep_field
        if name is None:
            return self
        return dataclasses.replace(self, **{name: (float(value),)})

    def scalar(self, name: str) -> float:
        v = getattr(self, name)
        if len(v) != 1:
            raise ValueError(f"{name} is swept; pin a point first")
        return v[0]

    @property
    def L(self) -> float:
        return 10.0 ** (self.L_db / 10.0)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "ScenarioConfig":
        problems = validation_problems(self)
        if problems:
            raise ConfigError(problems)
        return self

    def to_text(self) -> str:
        out = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(_fmt(x) for x in v)
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}


def _fmt(x) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def validation_problems(cfg: ScenarioConfig) -> dict[str, str]:
    p: dict[str, str] = {}
    if cfg.M < 1:
        p["M"] = "must be >= 1"
    if cfg.K < 1:
        p["K"] = "must be >= 1"
    if cfg.rho <= 0:
        p["rho"] = "must be positive"
    if cfg.sigma_s_db < 0:
        p["sigma_s_db"] = "must be non-negative"
    if any(e <= 0 for e in cfg.eps_max):
        p["eps_max"] = "every value must be positive"
    if cfg.interferer_power_ratio <= 0:
        p["interferer_power_ratio"] = "must be positive"
    if cfg.snapshots < 1:
        p["snapshots"] = "must be >= 1"
    if cfg.trials < 1:
        p["trials"] = "must be >= 1"
    if not 0 <= cfg.seed <= SEED_MAX:
        p["seed"] = "must be an unsigned 64-bit integer"
    if cfg.mode not in MODES:
        p["mode"] = f"must be one of {', '.join(MODES)}"
    bad = [m for m in cfg.methods if m not in METHODS]
    if bad or not cfg.methods:
        p["methods"] = f"must be a non-empty subset of {', '.join(METHODS)}"
    swept = [n for n in SWEEPABLE if len(getattr(cfg, n)) > 1]
    if len(swept) > 1:
        for n in swept:
            p[n] = f"only one field may be swept (found {', '.join(swept)})"
    for n in SWEEPABLE:
        if len(getattr(cfg, n)) == 0:
            p[n] = "needs at least one value"
    return p


_INT_FIELDS = {"M", "K", "snapshots", "trials", "seed"}
_STR_FIELDS = {"mode"}


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse the key/value format on top of `base` (defaults if omitted)."""
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    problems: dict[str, str] = {}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems[f"line {lineno}"] = f"expected key = value, got {raw.strip()!r}"
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in known:
            problems[key] = "unknown key"
            continue
        try:
            values[key] = _convert(key, val)
        except ValueError as exc:
            problems[key] = str(exc)
    if problems:
        raise ConfigError(problems)
    cfg = dataclasses.replace(base or ScenarioConfig(), **values)
    return cfg.validate()


def _convert(key: str, val: str):
    items = [s.strip() for s in val.split(",") if s.strip()]
    if not items:
        raise ValueError("empty value")
    if key == "methods":
        return tuple(items)
    if key in SWEEPABLE:
        try:
            return tuple(float(s) for s in items)
        except ValueError:
            raise ValueError(f"expected number(s), got {val!r}") from None
    if len(items) > 1:
        raise ValueError("this field cannot be swept")
    if key in _STR_FIELDS:
        return items[0]
    if key in _INT_FIELDS:
        try:
            return int(items[0], 0)
        except ValueError:
            raise ValueError(f"expected an integer, got {val!r}") from None
    try:
        return float(items[0])
    except ValueError:
        raise ValueError(f"expected a number, got {val!r}") from None


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text, base)
