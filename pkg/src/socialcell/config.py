"""Plain-text configuration: one `key = value` per line, `#` comments.

A single flat schema covers the radio scenario, the social-graph model, the
swap engine and the sweep/harness controls, so one file can drive a single
run or a whole experiment.  Unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from . import socialgraph as sg
from .matching import SwapEngineConfig
from .radio import PathlossParams, RadioScenario, generate_topology, scbs_ue_distances


@dataclass(frozen=True)
class ScenarioConfig:
    """Every tunable in one place, with the stock defaults.

    Radio values mirror the usual small-cell simulation assumptions: 5 MHz
    system bandwidth split over 16 subcarriers, -174 dBm/Hz noise floor,
    23 dBm / 50 m small cells, 15 dBm / 20 m device-to-device links and a
    cubic D2D pathloss exponent, all inside a 500 m deployment disk.
    """

    # deployment
    n_scbs: int = 16
    n_ues: int = 60
    seed: int = 1
    macro_radius_m: float = 500.0
    # radio
    system_bandwidth_hz: float = 5e6
    subcarriers: int = 16
    noise_psd_dbm_hz: float = -174.0
    scbs_power_dbm: float = 23.0
    scbs_radius_m: float = 50.0
    ue_power_dbm: float = 15.0
    d2d_radius_m: float = 20.0
    d2d_pathloss_alpha: float = 3.0
    scbs_pathloss_intercept_db: float = 140.7
    scbs_pathloss_slope_db: float = 36.7
    min_distance_m: float = 1.0
    d2d_interference: bool = True
    fading_gain: float = 1.0
    # social graph
    alpha: float = 0.5
    beta: float = 0.5
    social_model: str = "watts-strogatz"
    ws_neighbors: int = 4
    ws_rewire: float = 0.1
    er_edge_prob: float = 0.1
    social_edge_file: str = ""
    similarity_normalization: str = sg.SAW
    d2d_weight_epsilon: float = 0.0
    # swap engine
    max_iterations: int = 3000
    beta_start: float = 1.0
    beta_end: float = 50.0
    schedule: str = "linear"
    cooling: str = "anneal"
    stall_window: int = 200
    min_rate_bps: float = 0.0
    scbs_quota: int = 0
    d2d_quota: int = 3
    move_mix: float = 0.5
    stabilize: bool = False
    # sweep / harness
    sweep_variable: str = ""
    sweep_values: tuple[int, ...] = ()
    replications: int = 20
    methods: tuple[str, ...] = ("social-aware", "max-rssi")
    workers: int = 1


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _parse_value(name: str, text: str):
    """Coerce one raw string according to the schema field's type."""
    field = _FIELDS[name]
    text = text.strip()
    ftype = field.type
    try:
        if ftype == "bool":
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if ftype == "int":
            return int(text)
        if ftype == "float":
            return float(text)
        if ftype == "str":
            return text
        if ftype == "tuple[int, ...]":
            return tuple(int(p) for p in text.replace(",", " ").split()) if text else ()
        if ftype == "tuple[str, ...]":
            return tuple(p for p in text.replace(",", " ").split()) if text else ()
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from None
    raise ConfigError(f"unhandled config field type {ftype!r} for {name}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config_text(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse `key = value` lines on top of `base` (or the defaults)."""
    cfg = base or ScenarioConfig()
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
        updates[key] = _parse_value(key, val)
    return dataclasses.replace(cfg, **updates)


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, base=base)


def apply_overrides(cfg: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    """Apply repeatable KEY=VALUE command-line overrides."""
    updates = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like KEY=VALUE, got {item!r}")
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"unknown configuration key {key!r}")
        updates[key] = _parse_value(key, val)
    return dataclasses.replace(cfg, **updates)


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parsing it back reproduces cfg exactly."""
    lines = [f"{f.name} = {_format_value(getattr(cfg, f.name))}"
             for f in dataclasses.fields(ScenarioConfig)]
    return "\n".join(lines) + "\n"


def config_sha(cfg: ScenarioConfig) -> str:
    """Short fingerprint of the effective configuration."""
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()[:12]


def config_as_dict(cfg: ScenarioConfig) -> dict:
    out = {}
    for f in dataclasses.fields(ScenarioConfig):
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def scenario_from_config(cfg: ScenarioConfig, seed: int | None = None) -> RadioScenario:
    """Generate the radio scenario described by cfg (topology included)."""
    return generate_topology(
        cfg.n_scbs, cfg.n_ues,
        macro_radius_m=cfg.macro_radius_m,
        rng_seed=cfg.seed if seed is None else seed,
        scbs_power_dbm=cfg.scbs_power_dbm,
        ue_power_dbm=cfg.ue_power_dbm,
        bandwidth_hz=cfg.system_bandwidth_hz,
        subcarriers=cfg.subcarriers,
        scbs_radius_m=cfg.scbs_radius_m,
        d2d_radius_m=cfg.d2d_radius_m,
        noise_psd_dbm_hz=cfg.noise_psd_dbm_hz,
        pathloss=PathlossParams(
            d2d_alpha=cfg.d2d_pathloss_alpha,
            scbs_intercept_db=cfg.scbs_pathloss_intercept_db,
            scbs_slope_db=cfg.scbs_pathloss_slope_db,
            min_distance_m=cfg.min_distance_m,
        ),
        d2d_interference=cfg.d2d_interference,
        fading_gain=cfg.fading_gain,
    )


def social_graph_from_config(cfg: ScenarioConfig, scenario: RadioScenario,
                             seed: int | None = None) -> sg.SocialGraph:
    """Build the social graph over every SCBS and UE in the scenario.

    The random models wire the UE population only; every SCBS is then linked
    to the UEs inside its service radius (it can only develop social ties
    with users it could actually serve).  An explicit edge file replaces
    both parts verbatim.
    """
    roster = sg.default_roster(scenario.n_scbs, scenario.n_ues)
    if cfg.social_model == "edges":
        if not cfg.social_edge_file:
            raise ConfigError("social_model=edges needs social_edge_file")
        return sg.load_edge_list(cfg.social_edge_file, roster)

    ue_roster = tuple((sg.UE, m) for m in range(scenario.n_ues))
    if cfg.social_model == "watts-strogatz":
        model = sg.WattsStrogatz(neighbors=cfg.ws_neighbors, rewire=cfg.ws_rewire)
    elif cfg.social_model == "erdos-renyi":
        model = sg.ErdosRenyi(p=cfg.er_edge_prob)
    else:
        raise ConfigError(f"unknown social_model {cfg.social_model!r}")
    ue_graph = sg.build_social_graph(
        ue_roster, model, rng_seed=cfg.seed if seed is None else seed)

    edges = list(ue_graph.edges())
    d_su = scbs_ue_distances(scenario)
    for i in range(scenario.n_scbs):
        for m in np.flatnonzero(d_su[i] <= scenario.scbs_radius_m):
            edges.append(((sg.SCBS, i), (sg.UE, int(m))))
    return sg.build_social_graph(roster, sg.ExplicitEdges(edges=tuple(edges)))


def engine_config_from_config(cfg: ScenarioConfig, seed: int | None = None) -> SwapEngineConfig:
    return SwapEngineConfig(
        max_iterations=cfg.max_iterations,
        beta_start=cfg.beta_start,
        beta_end=cfg.beta_end,
        schedule=cfg.schedule,
        cooling=cfg.cooling,
        seed=cfg.seed if seed is None else seed,
        min_rate_bps=cfg.min_rate_bps,
        stall_window=cfg.stall_window,
        scbs_quota=cfg.scbs_quota or None,
        d2d_quota=cfg.d2d_quota,
        move_mix=cfg.move_mix,
        d2d_weight_epsilon=cfg.d2d_weight_epsilon,
    )


def social_pipeline_from_config(cfg: ScenarioConfig, graph: sg.SocialGraph):
    """Betweenness + similarity + blended distance, per the config weights."""
    return sg.social_pipeline(graph, alpha=cfg.alpha, beta=cfg.beta,
                              normalization=cfg.similarity_normalization)
