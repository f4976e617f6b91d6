"""Scenario configuration: TOML or JSON in, validated dataclasses out.

Every parse failure, including domain validation raised by the nested
types (gamma = 1, non-positive rates, bad barriers), surfaces as
ConfigError so the CLI can map it to exit code 1. The echo produced by
`config_echo` re-parses to an equivalent config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ConfigError, PensionGameError
from .game_two import Barriers
from .laws import MEASURE_TAGS, REFERENCE
from .market_model import MarketParams, Preferences
from .sensitivity import AxisSpec

SIM_KINDS = ("paths", "payoff_union", "payoff_firm", "hitting")
TAIL_MODES = ("pathwise", "deterministic")
GAMES = (1, 2, "pareto")


@dataclass(frozen=True)
class SimulationSpec:
    kind: str
    dt: float
    n_paths: int
    seed: int
    n_steps: int = 0
    x0: float | None = None
    t0: float = 0.0
    measure: str = REFERENCE
    horizon_cap: float = 200.0
    tail: str = "pathwise"

    def __post_init__(self):
        if self.kind not in SIM_KINDS:
            raise ConfigError(f"simulation.kind must be one of {SIM_KINDS}, got {self.kind!r}")
        if self.measure not in MEASURE_TAGS:
            raise ConfigError(f"simulation.measure must be one of {MEASURE_TAGS}, got {self.measure!r}")
        if self.tail not in TAIL_MODES:
            raise ConfigError(f"simulation.tail must be one of {TAIL_MODES}, got {self.tail!r}")
        if self.dt <= 0.0:
            raise ConfigError(f"simulation.dt must be positive, got {self.dt}")
        if self.n_paths < 1:
            raise ConfigError(f"simulation.n_paths must be >= 1, got {self.n_paths}")
        if self.kind != "hitting" and self.n_steps < 1:
            raise ConfigError(f"simulation.n_steps must be >= 1 for kind {self.kind!r}")
        if self.horizon_cap <= 0.0:
            raise ConfigError(f"simulation.horizon_cap must be positive, got {self.horizon_cap}")


@dataclass(frozen=True)
class VerifySpec:
    union_coeff_scale: float = 1.0
    moment_paths: int = 100_000
    payoff_paths: int = 20_000
    payoff_dt: float = 1.0 / 252
    payoff_horizon: float = 10.0
    hitting_dt: float = 1.0 / 500
    seed: int = 20240801

    def __post_init__(self):
        if self.union_coeff_scale <= 0.0:
            raise ConfigError("verify.union_coeff_scale must be positive")
        for name in ("moment_paths", "payoff_paths"):
            if getattr(self, name) < 2:
                raise ConfigError(f"verify.{name} must be >= 2")
        if self.payoff_dt <= 0.0 or self.hitting_dt <= 0.0 or self.payoff_horizon <= 0.0:
            raise ConfigError("verify step sizes and horizon must be positive")


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[AxisSpec, ...]
    market_bull: MarketParams
    market_bear: MarketParams


@dataclass(frozen=True)
class ScenarioConfig:
    market: MarketParams
    preferences: Preferences
    game: int | str
    barriers: Barriers | None = None
    simulation: SimulationSpec | None = None
    sweep: SweepSpec | None = None
    verify: VerifySpec = field(default_factory=VerifySpec)


def _require_keys(section: str, d: dict, allowed: set, required: set):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"[{section}] has unknown keys {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"[{section}] is missing keys {sorted(missing)}")


def _num(section: str, key: str, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {v!r}")
    return float(v)


def _count(section: str, key: str, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"[{section}] {key} must be an integer, got {v!r}")
    return v


def _parse_market(section: str, d: dict) -> MarketParams:
    _require_keys(section, d, {"r", "b", "sigma"}, {"r", "b", "sigma"})
    b = d["b"]
    sigma = d["sigma"]
    b_vec = np.atleast_1d(np.asarray(b, dtype=float))
    sig = np.asarray(sigma, dtype=float)
    if sig.ndim == 0:
        sig = sig.reshape(1, 1)
    elif sig.ndim == 1:
        sig = np.diag(sig)
    try:
        return MarketParams(r=_num(section, "r", d["r"]), b=b_vec, sigma=sig)
    except PensionGameError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def _parse_preferences(d: dict) -> Preferences:
    keys = {"alpha", "beta", "gamma", "delta", "lambda", "mu"}
    _require_keys("preferences", d, keys, keys)
    try:
        return Preferences(
            alpha=_num("preferences", "alpha", d["alpha"]),
            beta=_num("preferences", "beta", d["beta"]),
            gamma=_num("preferences", "gamma", d["gamma"]),
            delta=_num("preferences", "delta", d["delta"]),
            lam=_num("preferences", "lambda", d["lambda"]),
            mu=_num("preferences", "mu", d["mu"]),
        )
    except PensionGameError as exc:
        raise ConfigError(f"[preferences]: {exc}") from exc


def _parse_barriers(d: dict) -> Barriers:
    _require_keys("barriers", d, {"l", "v", "x0"}, {"l", "v", "x0"})
    try:
        return Barriers(
            l=_num("barriers", "l", d["l"]),
            v=_num("barriers", "v", d["v"]),
            x0=_num("barriers", "x0", d["x0"]),
        )
    except PensionGameError as exc:
        raise ConfigError(f"[barriers]: {exc}") from exc


def _parse_axis(d: dict) -> AxisSpec:
    allowed = {"param", "values", "start", "stop", "count"}
    _require_keys("sweep.axes", d, allowed, {"param"})
    name = d["param"]
    if "values" in d:
        if any(k in d for k in ("start", "stop", "count")):
            raise ConfigError("[sweep.axes] give either values or start/stop/count, not both")
        raw = d["values"]
    else:
        for k in ("start", "stop", "count"):
            if k not in d:
                raise ConfigError(f"[sweep.axes] {name}: start/stop/count form needs {k}")
        raw = np.linspace(
            _num("sweep.axes", "start", d["start"]),
            _num("sweep.axes", "stop", d["stop"]),
            _count("sweep.axes", "count", d["count"]),
        ).tolist()
    if name == "game":
        values = tuple(_count("sweep.axes", "game value", v) for v in raw)
    elif name == "market":
        values = tuple(str(v) for v in raw)
        bad = set(values) - {"bull", "bear"}
        if bad:
            raise ConfigError(f"[sweep.axes] market values must be bull/bear, got {sorted(bad)}")
    else:
        values = tuple(_num("sweep.axes", name, v) for v in raw)
    try:
        return AxisSpec(name=name, values=values)
    except ValueError as exc:
        raise ConfigError(f"[sweep.axes]: {exc}") from exc


def _parse_simulation(d: dict) -> SimulationSpec:
    allowed = {
        "kind", "dt", "n_paths", "seed", "n_steps", "x0", "t0",
        "measure", "horizon_cap", "tail",
    }
    _require_keys("simulation", d, allowed, {"kind", "dt", "n_paths", "seed"})
    kw = {
        "kind": str(d["kind"]),
        "dt": _num("simulation", "dt", d["dt"]),
        "n_paths": _count("simulation", "n_paths", d["n_paths"]),
        "seed": _count("simulation", "seed", d["seed"]),
    }
    if "n_steps" in d:
        kw["n_steps"] = _count("simulation", "n_steps", d["n_steps"])
    if "x0" in d:
        kw["x0"] = _num("simulation", "x0", d["x0"])
    if "t0" in d:
        kw["t0"] = _num("simulation", "t0", d["t0"])
    if "measure" in d:
        kw["measure"] = str(d["measure"])
    if "horizon_cap" in d:
        kw["horizon_cap"] = _num("simulation", "horizon_cap", d["horizon_cap"])
    if "tail" in d:
        kw["tail"] = str(d["tail"])
    return SimulationSpec(**kw)


def _parse_verify(d: dict) -> VerifySpec:
    allowed = {
        "union_coeff_scale", "moment_paths", "payoff_paths", "payoff_dt",
        "payoff_horizon", "hitting_dt", "seed",
    }
    _require_keys("verify", d, allowed, set())
    kw = {}
    for k in ("union_coeff_scale", "payoff_dt", "payoff_horizon", "hitting_dt"):
        if k in d:
            kw[k] = _num("verify", k, d[k])
    for k in ("moment_paths", "payoff_paths", "seed"):
        if k in d:
            kw[k] = _count("verify", k, d[k])
    return VerifySpec(**kw)


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a table, got {type(raw).__name__}")
    allowed = {"game", "market", "preferences", "barriers", "simulation", "sweep", "verify"}
    _require_keys("root", raw, allowed, {"game", "market", "preferences"})
    game = raw["game"]
    if isinstance(game, bool) or game not in GAMES:
        raise ConfigError(f"game must be 1, 2 or 'pareto', got {game!r}")
    market = _parse_market("market", raw["market"])
    prefs = _parse_preferences(raw["preferences"])
    barriers = _parse_barriers(raw["barriers"]) if "barriers" in raw else None
    sweep_spec = None
    if "sweep" in raw:
        s = raw["sweep"]
        _require_keys("sweep", s, {"axes", "markets"}, {"axes", "markets"})
        _require_keys("sweep.markets", s["markets"], {"bull", "bear"}, {"bull", "bear"})
        axes = tuple(_parse_axis(a) for a in s["axes"])
        if not axes:
            raise ConfigError("[sweep] axes must not be empty")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"[sweep] duplicate axes {names}")
        sweep_spec = SweepSpec(
            axes=axes,
            market_bull=_parse_market("sweep.markets.bull", s["markets"]["bull"]),
            market_bear=_parse_market("sweep.markets.bear", s["markets"]["bear"]),
        )
    if game == 2 and barriers is None:
        raise ConfigError("game 2 requires a [barriers] table")
    if game != 2 and barriers is not None and sweep_spec is None:
        raise ConfigError("[barriers] is only meaningful for game 2 (or a sweep with a game axis)")
    simulation = _parse_simulation(raw["simulation"]) if "simulation" in raw else None
    if simulation is not None:
        if simulation.kind == "hitting" and game != 2:
            raise ConfigError("simulation.kind 'hitting' requires game = 2")
        if simulation.kind in ("payoff_union", "payoff_firm") and game != 1:
            raise ConfigError(f"simulation.kind {simulation.kind!r} requires game = 1")
        if simulation.kind == "paths" and game == "pareto":
            raise ConfigError("simulation.kind 'paths' requires game = 1 or 2")
        if simulation.x0 is None and simulation.kind != "hitting" and barriers is None:
            raise ConfigError("simulation.x0 is required when no [barriers] table is present")
    verify = _parse_verify(raw["verify"]) if "verify" in raw else VerifySpec()
    return ScenarioConfig(
        market=market,
        preferences=prefs,
        game=game,
        barriers=barriers,
        simulation=simulation,
        sweep=sweep_spec,
        verify=verify,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(path.read_text(encoding="utf-8"))
        else:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(raw)


def _market_echo(mp: MarketParams) -> dict:
    return {"r": mp.r, "b": mp.b.tolist(), "sigma": mp.sigma.tolist()}


def config_echo(cfg: ScenarioConfig) -> dict:
    """JSON-ready dict that parse_config accepts back."""
    echo: dict = {
        "game": cfg.game,
        "market": _market_echo(cfg.market),
        "preferences": {
            "alpha": cfg.preferences.alpha,
            "beta": cfg.preferences.beta,
            "gamma": cfg.preferences.gamma,
            "delta": cfg.preferences.delta,
            "lambda": cfg.preferences.lam,
            "mu": cfg.preferences.mu,
        },
    }
    if cfg.barriers is not None:
        echo["barriers"] = {"l": cfg.barriers.l, "v": cfg.barriers.v, "x0": cfg.barriers.x0}
    if cfg.simulation is not None:
        sim = cfg.simulation
        echo["simulation"] = {
            "kind": sim.kind,
            "dt": sim.dt,
            "n_paths": sim.n_paths,
            "seed": sim.seed,
            "n_steps": sim.n_steps,
            "t0": sim.t0,
            "measure": sim.measure,
            "horizon_cap": sim.horizon_cap,
            "tail": sim.tail,
        }
        if sim.x0 is not None:
            echo["simulation"]["x0"] = sim.x0
        if sim.kind == "hitting":
            del echo["simulation"]["n_steps"]
    if cfg.sweep is not None:
        echo["sweep"] = {
            "axes": [
                {"param": ax.name, "values": list(ax.values)} for ax in cfg.sweep.axes
            ],
            "markets": {
                "bull": _market_echo(cfg.sweep.market_bull),
                "bear": _market_echo(cfg.sweep.market_bear),
            },
        }
    v = cfg.verify
    echo["verify"] = {
        "union_coeff_scale": v.union_coeff_scale,
        "moment_paths": v.moment_paths,
        "payoff_paths": v.payoff_paths,
        "payoff_dt": v.payoff_dt,
        "payoff_horizon": v.payoff_horizon,
        "hitting_dt": v.hitting_dt,
        "seed": v.seed,
    }
    return echo
