"""System-level radio model: topology, pathloss, SINR and link rates.

Distance-based pathloss only (a multiplicative fading hook is available but
defaults to 1), equal bandwidth sharing inside each serving node, and
subcarrier-level co-channel interference.  All powers are handled in mW
internally; the public parameters use the customary dBm / dB units.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .errors import ConfigError, InputError, LinkRangeError
from .socialgraph import SCBS, UE, NodeRef

# --------------------------------------------------------------------------
# unit conversions
# --------------------------------------------------------------------------

def db_to_linear(db):
    """Decibels -> linear power ratio."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    """Linear power ratio -> decibels."""
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_mw(dbm):
    """dBm -> milliwatts."""
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    """Milliwatts -> dBm."""
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


# --------------------------------------------------------------------------
# scenario
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PathlossParams:
    """Pathloss model knobs for the two transmitter kinds.

    SCBS links use an NLOS-style log-distance curve in dB over km:
        PL = intercept + slope * log10(d_km)
    D2D links use a bare power law over metres:
        PL = 10 * alpha * log10(d_m)
    Distances are floored at `min_distance_m` before either formula.
    """

    d2d_alpha: float = 3.0
    scbs_intercept_db: float = 140.7
    scbs_slope_db: float = 36.7
    min_distance_m: float = 1.0

    def __post_init__(self):
        if self.d2d_alpha <= 0:
            raise ConfigError(f"d2d pathloss exponent must be positive, got {self.d2d_alpha}")
        if self.min_distance_m <= 0:
            raise ConfigError(f"minimum distance must be positive, got {self.min_distance_m}")


@dataclass(frozen=True)
class RadioScenario:
    """Node positions plus every radio parameter the link model needs.

    Positions are metres in a plane with the deployment disk centred on the
    origin.  scbs_xy is (N, 2), ue_xy is (M, 2).
    """

    scbs_xy: np.ndarray
    ue_xy: np.ndarray
    scbs_power_dbm: float = 23.0
    ue_power_dbm: float = 15.0
    bandwidth_hz: float = 5e6
    subcarriers: int = 16
    scbs_radius_m: float = 50.0
    d2d_radius_m: float = 20.0
    noise_psd_dbm_hz: float = -174.0
    macro_radius_m: float = 500.0
    pathloss: PathlossParams = field(default_factory=PathlossParams)
    d2d_interference: bool = True
    fading_gain: float = 1.0
    seed: int = 0

    def __post_init__(self):
        scbs_xy = np.asarray(self.scbs_xy, dtype=float).reshape(-1, 2)
        ue_xy = np.asarray(self.ue_xy, dtype=float).reshape(-1, 2)
        scbs_xy.setflags(write=False)
        ue_xy.setflags(write=False)
        object.__setattr__(self, "scbs_xy", scbs_xy)
        object.__setattr__(self, "ue_xy", ue_xy)
        if len(scbs_xy) < 1 or len(ue_xy) < 1:
            raise ConfigError("need at least one SCBS and one UE")
        for name in ("bandwidth_hz", "scbs_radius_m", "d2d_radius_m",
                     "macro_radius_m", "fading_gain"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.subcarriers < 1:
            raise ConfigError(f"subcarrier count must be >= 1, got {self.subcarriers}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        limit = self.macro_radius_m * (1.0 + 1e-9)
        for xy, what in ((scbs_xy, "SCBS"), (ue_xy, "UE")):
            if np.any(np.linalg.norm(xy, axis=1) > limit):
                raise ConfigError(f"{what} position outside the deployment disk")

    @property
    def n_scbs(self) -> int:
        return len(self.scbs_xy)

    @property
    def n_ues(self) -> int:
        return len(self.ue_xy)

    def tx_power_dbm(self, kind: str) -> float:
        if kind == SCBS:
            return self.scbs_power_dbm
        if kind == UE:
            return self.ue_power_dbm
        raise InputError(f"unknown transmitter kind {kind!r}")

    def tx_radius_m(self, kind: str) -> float:
        if kind == SCBS:
            return self.scbs_radius_m
        if kind == UE:
            return self.d2d_radius_m
        raise InputError(f"unknown transmitter kind {kind!r}")

    def position(self, ref: NodeRef) -> np.ndarray:
        kind, nid = ref
        pool = self.scbs_xy if kind == SCBS else self.ue_xy
        if not 0 <= nid < len(pool):
            raise InputError(f"no such node {kind}{nid}")
        return pool[nid]


def _disk_points(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """n points uniform over a disk of the given radius, centred on origin."""
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def generate_topology(n_scbs: int, n_ues: int, macro_radius_m: float = 500.0,
                      rng_seed: int = 0, **params) -> RadioScenario:
    """Drop SCBSs and UEs i.i.d. uniform on the deployment disk.

    Extra keyword arguments are forwarded to RadioScenario, so Table-style
    parameters can be overridden at generation time.  Deterministic given
    the seed: SCBS positions are drawn first, then UE positions.
    """
    if n_scbs < 1 or n_ues < 1:
        raise ConfigError(f"need at least one SCBS and one UE, got {n_scbs}/{n_ues}")
    if macro_radius_m <= 0:
        raise ConfigError(f"deployment radius must be positive, got {macro_radius_m}")
    if rng_seed < 0:
        raise ConfigError(f"seed must be non-negative, got {rng_seed}")
    rng = np.random.default_rng(rng_seed)
    scbs_xy = _disk_points(rng, n_scbs, macro_radius_m)
    ue_xy = _disk_points(rng, n_ues, macro_radius_m)
    return RadioScenario(scbs_xy=scbs_xy, ue_xy=ue_xy,
                         macro_radius_m=macro_radius_m, seed=rng_seed, **params)


# --------------------------------------------------------------------------
# pathloss and gains
# --------------------------------------------------------------------------

def pathloss_db(tx_kind: str, distance_m, params: PathlossParams):
    """Pathloss in dB for the given transmitter kind; accepts arrays."""
    d = np.maximum(np.asarray(distance_m, dtype=float), params.min_distance_m)
    if tx_kind == SCBS:
        return params.scbs_intercept_db + params.scbs_slope_db * np.log10(d / 1000.0)
    if tx_kind == UE:
        return 10.0 * params.d2d_alpha * np.log10(d)
    raise InputError(f"unknown transmitter kind {tx_kind!r}")


def channel_gain(tx_kind: str, distance_m, scenario: RadioScenario):
    """Linear channel gain (pathloss plus the scenario's fading factor)."""
    return db_to_linear(-pathloss_db(tx_kind, distance_m, scenario.pathloss)) \
        * scenario.fading_gain


def received_power_mw(tx: NodeRef, rx_ue: int, scenario: RadioScenario) -> float:
    """Received power in mW at UE rx_ue from transmitter tx, at full power."""
    d = float(np.linalg.norm(scenario.position(tx) - scenario.ue_xy[rx_ue]))
    gain = channel_gain(tx[0], d, scenario)
    return float(dbm_to_mw(scenario.tx_power_dbm(tx[0]))) * float(gain)


def scbs_ue_distances(scenario: RadioScenario) -> np.ndarray:
    """(N, M) matrix of SCBS-to-UE distances in metres."""
    diff = scenario.scbs_xy[:, np.newaxis, :] - scenario.ue_xy[np.newaxis, :, :]
    return np.linalg.norm(diff, axis=2)


def ue_ue_distances(scenario: RadioScenario) -> np.ndarray:
    """(M, M) matrix of UE-to-UE distances in metres."""
    diff = scenario.ue_xy[:, np.newaxis, :] - scenario.ue_xy[np.newaxis, :, :]
    return np.linalg.norm(diff, axis=2)


# --------------------------------------------------------------------------
# link budget
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkBudget:
    """Everything that went into one link's rate."""

    tx: NodeRef
    rx_ue: int
    subcarrier: int
    gain: float
    received_mw: float
    interference_mw: float
    noise_mw: float
    sinr: float
    rate_bps: float


def link_rate(tx: NodeRef, rx_ue: int, subcarrier: int, scenario: RadioScenario,
              cochannel: Iterable[NodeRef] = (), share: float = 1.0) -> LinkBudget:
    """Achievable rate of one link under equal-share scheduling.

    `share` is the fraction of the serving node's bandwidth granted to this
    link (1/|served set| under equal sharing).  `cochannel` lists every
    transmitter active on the same subcarrier; the transmitter itself and
    the receiver are ignored, and UE-kind interferers are dropped when the
    scenario disables D2D interference.  Raises LinkRangeError when the
    receiver lies outside the transmitter's service radius.
    """
    if not 0.0 < share <= 1.0:
        raise InputError(f"bandwidth share must be in (0, 1], got {share}")
    kind = tx[0]
    d = float(np.linalg.norm(scenario.position(tx) - scenario.ue_xy[rx_ue]))
    radius = scenario.tx_radius_m(kind)
    if d > radius:
        raise LinkRangeError(
            f"{kind}{tx[1]} -> ue{rx_ue}: distance {d:.1f} m exceeds radius {radius:.1f} m")

    gain = float(channel_gain(kind, d, scenario))
    received = float(dbm_to_mw(scenario.tx_power_dbm(kind))) * gain

    interference = 0.0
    for other in cochannel:
        if other == tx or other == (UE, rx_ue):
            continue
        if other[0] == UE and not scenario.d2d_interference:
            continue
        interference += received_power_mw(other, rx_ue, scenario)

    bandwidth = share * scenario.bandwidth_hz
    noise = float(dbm_to_mw(scenario.noise_psd_dbm_hz)) * bandwidth
    sinr = received / (noise + interference)
    rate = bandwidth * np.log2(1.0 + sinr)
    return LinkBudget(tx=tx, rx_ue=rx_ue, subcarrier=subcarrier, gain=gain,
                      received_mw=received, interference_mw=interference,
                      noise_mw=noise, sinr=float(sinr), rate_bps=float(rate))


def subcarrier_offset(scenario: RadioScenario, node: NodeRef) -> int:
    """Deterministic per-node starting subcarrier, uniform over [0, C)."""
    kind_code = 0 if node[0] == SCBS else 1
    rng = np.random.default_rng([int(scenario.seed), kind_code, int(node[1])])
    return int(rng.integers(scenario.subcarriers))


# --------------------------------------------------------------------------
# position I/O
# --------------------------------------------------------------------------

def positions_to_csv(scenario: RadioScenario, path) -> None:
    """Write node positions as `id,kind,x,y` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "kind", "x", "y"])
        for i, (x, y) in enumerate(scenario.scbs_xy):
            writer.writerow([i, SCBS, repr(float(x)), repr(float(y))])
        for m, (x, y) in enumerate(scenario.ue_xy):
            writer.writerow([m, UE, repr(float(x)), repr(float(y))])


def positions_from_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back a positions CSV; returns (scbs_xy, ue_xy)."""
    scbs: dict[int, tuple[float, float]] = {}
    ues: dict[int, tuple[float, float]] = {}
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                nid = int(row["id"])
                kind = row["kind"]
                xy = (float(row["x"]), float(row["y"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}: malformed position row {row!r}") from exc
            if kind == SCBS:
                scbs[nid] = xy
            elif kind == UE:
                ues[nid] = xy
            else:
                raise InputError(f"{path}: unknown node kind {kind!r}")
    if sorted(scbs) != list(range(len(scbs))) or sorted(ues) != list(range(len(ues))):
        raise InputError(f"{path}: node ids must be contiguous from 0")
    scbs_xy = np.array([scbs[i] for i in range(len(scbs))], dtype=float)
    ue_xy = np.array([ues[m] for m in range(len(ues))], dtype=float)
    return scbs_xy, ue_xy
