"""Discrete-time simulator of a small multi-cell radio access network.

The model is deliberately compact: a handful of gNBs on a plane, UEs with
constant-velocity mobility reflected at the field boundary, log-distance
path loss, A3-style handovers, link failure below a minimum receive
level, and Shannon-capacity throughput against a flat noise floor.  One
network-wide transmit power knob ("TXP") is the control surface the
conflict-management experiments fight over: raising it buys coverage and
throughput at a steep power-amplifier cost, lowering it saves energy and
eventually starves the cell edge.

The per-tick update order is fixed and documented on `Simulator.tick`;
everything is driven by one seeded generator so a (config, seed) pair
fully determines the run.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

# ===========================================================================
# Configuration
# ===========================================================================

# (name, fraction of UEs, min speed m/s, max speed m/s)
DEFAULT_SPEED_CLASSES = (
    ("walking", 0.35, 0.0, 1.0),
    ("cycling", 0.30, 2.0, 5.0),
    ("driving", 0.35, 6.0, 15.0),
)

# (name, fraction of UEs, bandwidth weight on the 1 MHz base allocation)
DEFAULT_SERVICE_CLASSES = (
    ("embb", 0.40, 1.5),
    ("urllc", 0.30, 0.75),
    ("mmtc", 0.30, 0.25),
)


@dataclass
class SimConfig:
    """Scenario description; serializable to/from the scenario JSON."""

    n_ues: int = 20
    area_m: tuple[float, float] = (400.0, 400.0)
    # None places one gNB at each quarter point of the area (2x2 grid).
    gnb_positions: tuple[tuple[float, float], ...] | None = None
    step_ms: float = 100.0
    duration_s: float = 120.0
    txp_dbm: float = 30.0          # initial network-wide transmit power
    ret_deg: float = 1.5           # electrical downtilt; 1.5 deg is boresight
    cio_db: float = 2.0
    hys_db: float = 0.5
    ttt_ms: float = 0.1            # time-to-trigger; <= step_ms means one tick
    min_rsrp_dbm: float = -110.0   # below this on every cell: link failure
    noise_floor_dbm: float = -100.0
    pingpong_window_ms: float = 1000.0
    ue_bandwidth_hz: float = 1.0e6
    speed_classes: tuple[tuple[str, float, float, float], ...] = DEFAULT_SPEED_CLASSES
    service_classes: tuple[tuple[str, float, float], ...] = DEFAULT_SERVICE_CLASSES

    def __post_init__(self):
        self.area_m = tuple(self.area_m)
        if self.gnb_positions is not None:
            self.gnb_positions = tuple(tuple(p) for p in self.gnb_positions)
        self.speed_classes = tuple(tuple(c) for c in self.speed_classes)
        self.service_classes = tuple(tuple(c) for c in self.service_classes)
        if self.n_ues <= 0:
            raise ValueError("n_ues must be positive")
        if self.step_ms <= 0 or self.duration_s <= 0:
            raise ValueError("step_ms and duration_s must be positive")
        for classes, label in ((self.speed_classes, "speed"), (self.service_classes, "service")):
            total = sum(c[1] for c in classes)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{label} class fractions sum to {total}, expected 1")

    def resolved_gnbs(self) -> np.ndarray:
        if self.gnb_positions is not None:
            return np.asarray(self.gnb_positions, dtype=float)
        w, h = self.area_m
        return np.asarray(
            [(w / 4, h / 4), (3 * w / 4, h / 4), (w / 4, 3 * h / 4), (3 * w / 4, 3 * h / 4)],
            dtype=float,
        )

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration_s * 1000.0 / self.step_ms))


def sim_config_to_dict(cfg: SimConfig) -> dict:
    return {
        "n_ues": cfg.n_ues,
        "area_m": list(cfg.area_m),
        "gnb_positions": None if cfg.gnb_positions is None else [list(p) for p in cfg.gnb_positions],
        "step_ms": cfg.step_ms,
        "duration_s": cfg.duration_s,
        "txp_dbm": cfg.txp_dbm,
        "ret_deg": cfg.ret_deg,
        "cio_db": cfg.cio_db,
        "hys_db": cfg.hys_db,
        "ttt_ms": cfg.ttt_ms,
        "min_rsrp_dbm": cfg.min_rsrp_dbm,
        "noise_floor_dbm": cfg.noise_floor_dbm,
        "pingpong_window_ms": cfg.pingpong_window_ms,
        "ue_bandwidth_hz": cfg.ue_bandwidth_hz,
        "speed_classes": [list(c) for c in cfg.speed_classes],
        "service_classes": [list(c) for c in cfg.service_classes],
    }


def sim_config_from_dict(d: dict) -> SimConfig:
    kwargs = dict(d)
    if kwargs.get("gnb_positions") is not None:
        kwargs["gnb_positions"] = tuple(tuple(p) for p in kwargs["gnb_positions"])
    for key in ("speed_classes", "service_classes"):
        if key in kwargs:
            kwargs[key] = tuple(tuple(c) for c in kwargs[key])
    if "area_m" in kwargs:
        kwargs["area_m"] = tuple(kwargs["area_m"])
    return SimConfig(**kwargs)


def load_sim_config(path: str | Path) -> SimConfig:
    with open(path) as f:
        return sim_config_from_dict(json.load(f))


def save_sim_config(cfg: SimConfig, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(sim_config_to_dict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")


# ===========================================================================
# Radio primitives (scalar reference versions)
# ===========================================================================

def path_loss_db(distance_m: float) -> float:
    """Log-distance path loss; distances under a metre are clamped."""
    return 40.05 + 35.0 * math.log10(max(distance_m, 1.0))


def antenna_gain_db(ret_deg: float) -> float:
    """1 dB loss per degree of downtilt away from the 1.5 deg boresight."""
    return -1.0 * abs(ret_deg - 1.5)


def rsrp_dbm(txp_dbm: float, gnb_xy: Sequence[float], ue_xy: Sequence[float], ret_deg: float = 1.5) -> float:
    d = math.hypot(gnb_xy[0] - ue_xy[0], gnb_xy[1] - ue_xy[1])
    return txp_dbm + antenna_gain_db(ret_deg) - path_loss_db(d)


def gnb_power_w(txp_dbm: float) -> float:
    """Site power draw: 100 W fixed plus an amplifier term that hits 4 W
    of drain per watt radiated, referenced to 30 dBm."""
    return 100.0 + 4.0 * 10.0 ** ((txp_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class HandoverDecision:
    triggered: bool
    target: int | None


def evaluate_handover(rsrps: Sequence[float], serving: int, cio_db: float, hys_db: float) -> HandoverDecision:
    """A3 check against the best neighbour for one UE (single tick).

    Triggers when neighbour + cio > serving + hys AND the neighbour is
    strictly stronger than the serving cell.  The second guard keeps a
    positive cio - hys margin from flip-flopping the UE between two cells
    of near-equal strength every tick.
    """
    best, best_r = None, -math.inf
    for j, r in enumerate(rsrps):
        if j != serving and r > best_r:
            best, best_r = j, r
    if best is None:
        return HandoverDecision(False, None)
    rs = rsrps[serving]
    if best_r + cio_db > rs + hys_db and best_r > rs:
        return HandoverDecision(True, best)
    return HandoverDecision(False, None)


def largest_remainder_counts(fractions: Sequence[float], n: int) -> list[int]:
    """Integer class sizes matching the fractions exactly in total.

    Floors first, then hands the leftover units to the largest fractional
    remainders (ties to the earlier class).  Deterministic.
    """
    raw = [f * n for f in fractions]
    counts = [int(math.floor(r)) for r in raw]
    rem = n - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:rem]:
        counts[i] += 1
    return counts


# ===========================================================================
# Simulator
# ===========================================================================

class TickStats(NamedTuple):
    """What one tick produced; returned so a driver can bucket by phase."""

    bits: float
    joules: float
    link_failures: int
    handovers: int
    pingpongs: int


@dataclass
class TraceRow:
    t_ms: float
    ue_id: int
    serving_gnb: int
    rsrp_dbm: float
    event: str  # HO | LF | REATTACH | PP


class Simulator:
    """One seeded run.  Drive it with `tick()` (or `run()` to completion),
    adjust transmit power between ticks with `set_txp`.

    Update order inside a tick, in this exact sequence:
      move -> receive levels -> A3 handovers -> link failures ->
      re-attachments -> throughput and energy accounting.
    Re-attachments count toward total_handovers (the network pays the
    signalling either way); a re-attachment to a different cell also
    participates in ping-pong detection.
    """

    def __init__(self, cfg: SimConfig, seed: int, record_trace: bool = True):
        self.cfg = cfg
        self.gnbs = cfg.resolved_gnbs()
        self.txp_dbm = float(cfg.txp_dbm)
        self.t_ms = 0.0
        self.record_trace = record_trace
        rng = np.random.default_rng(seed)
        n = cfg.n_ues

        # -- population ----------------------------------------------------
        # Draw order is part of the determinism contract: positions, speed
        # labels, speeds, headings, service labels.
        w, h = cfg.area_m
        self.pos = rng.uniform((0.0, 0.0), (w, h), size=(n, 2))

        speed_fracs = [c[1] for c in cfg.speed_classes]
        counts = largest_remainder_counts(speed_fracs, n)
        labels = np.repeat(np.arange(len(counts)), counts)
        labels = labels[rng.permutation(n)]
        vmin = np.asarray([c[2] for c in cfg.speed_classes])[labels]
        vmax = np.asarray([c[3] for c in cfg.speed_classes])[labels]
        speeds = rng.uniform(vmin, vmax)
        angles = rng.uniform(0.0, 2.0 * math.pi, size=n)
        self.vel = np.stack([speeds * np.cos(angles), speeds * np.sin(angles)], axis=1)
        self.speed_class = labels

        svc_fracs = [c[1] for c in cfg.service_classes]
        svc_counts = largest_remainder_counts(svc_fracs, n)
        svc = np.repeat(np.arange(len(svc_counts)), svc_counts)
        svc = svc[rng.permutation(n)]
        self.service_class = svc
        self.bw_hz = cfg.ue_bandwidth_hz * np.asarray([c[2] for c in cfg.service_classes])[svc]

        # -- attachment state ----------------------------------------------
        r0 = self._rsrp_matrix(self.pos)
        self.serving = np.argmax(r0, axis=1).astype(int)
        self.last_cell = self.serving.copy()      # cell held before a failure
        self.prev_gnb = np.full(n, -1, dtype=int)  # previous cell, for ping-pong
        self.last_ho_ms = np.full(n, -np.inf)
        self.required_ttt_ticks = max(1, math.ceil(cfg.ttt_ms / cfg.step_ms))
        self._ttt_count = np.zeros(n, dtype=int)
        self._ttt_target = np.full(n, -1, dtype=int)

        # -- accounting ----------------------------------------------------
        self.total_bits = 0.0
        self.total_joules = 0.0
        self.link_failures = 0
        self.total_handovers = 0
        self.pingpong_handovers = 0
        self.trace: list[TraceRow] = []

    # -- radio ------------------------------------------------------------

    def set_txp(self, txp_dbm: float) -> None:
        self.txp_dbm = float(txp_dbm)

    def _rsrp_matrix(self, pos: np.ndarray) -> np.ndarray:
        """(n_ues, n_gnbs) receive levels at the current transmit power."""
        d = np.hypot(pos[:, None, 0] - self.gnbs[None, :, 0], pos[:, None, 1] - self.gnbs[None, :, 1])
        np.maximum(d, 1.0, out=d)
        return self.txp_dbm + antenna_gain_db(self.cfg.ret_deg) - (40.05 + 35.0 * np.log10(d))

    # -- dynamics ---------------------------------------------------------

    def tick(self) -> TickStats:
        cfg = self.cfg
        dt_s = cfg.step_ms / 1000.0
        t = self.t_ms + cfg.step_ms

        # move, reflecting at the field boundary.  One reflection per axis
        # is enough: max speed times one step is far below the field size.
        lim = np.asarray(cfg.area_m)
        pos = self.pos + self.vel * dt_s
        low = pos < 0.0
        pos = np.where(low, -pos, pos)
        self.vel = np.where(low, -self.vel, self.vel)
        high = pos > lim
        pos = np.where(high, 2.0 * lim - pos, pos)
        self.vel = np.where(high, -self.vel, self.vel)
        self.pos = pos

        r = self._rsrp_matrix(pos)
        n_lf = n_ho = n_pp = 0

        # A3 handovers for attached UEs
        att_idx = np.nonzero(self.serving >= 0)[0]
        if att_idx.size:
            rows = r[att_idx]
            rs = rows[np.arange(att_idx.size), self.serving[att_idx]]
            masked = rows.copy()
            masked[np.arange(att_idx.size), self.serving[att_idx]] = -np.inf
            tgt = np.argmax(masked, axis=1)
            rn = masked[np.arange(att_idx.size), tgt]
            cond = (rn + cfg.cio_db > rs + cfg.hys_db) & (rn > rs)

            held = self._ttt_target[att_idx] == tgt
            cnt = np.where(cond, np.where(held, self._ttt_count[att_idx] + 1, 1), 0)
            self._ttt_count[att_idx] = cnt
            self._ttt_target[att_idx] = np.where(cond, tgt, -1)

            for k in np.nonzero(cnt >= self.required_ttt_ticks)[0]:
                i = int(att_idx[k])
                new = int(tgt[k])
                prev = int(self.serving[i])
                is_pp = new == self.prev_gnb[i] and (t - self.last_ho_ms[i]) <= cfg.pingpong_window_ms
                self.serving[i] = new
                self.last_cell[i] = new
                self.prev_gnb[i] = prev
                self.last_ho_ms[i] = t
                self._ttt_count[i] = 0
                self._ttt_target[i] = -1
                n_ho += 1
                if is_pp:
                    n_pp += 1
                if self.record_trace:
                    self.trace.append(TraceRow(t, i, new, float(r[i, new]), "PP" if is_pp else "HO"))

        # link failure: attached but nothing receivable anywhere
        rowmax = r.max(axis=1)
        for i in np.nonzero((self.serving >= 0) & (rowmax < cfg.min_rsrp_dbm))[0]:
            i = int(i)
            old = int(self.serving[i])
            if self.record_trace:
                self.trace.append(TraceRow(t, i, old, float(r[i, old]), "LF"))
            self.last_cell[i] = old
            self.serving[i] = -1
            self._ttt_count[i] = 0
            self._ttt_target[i] = -1
            n_lf += 1

        # re-attachment: detached and some cell is receivable again
        for i in np.nonzero((self.serving < 0) & (rowmax >= cfg.min_rsrp_dbm))[0]:
            i = int(i)
            new = int(np.argmax(r[i]))
            n_ho += 1
            if new != self.last_cell[i]:
                is_pp = new == self.prev_gnb[i] and (t - self.last_ho_ms[i]) <= cfg.pingpong_window_ms
                self.prev_gnb[i] = int(self.last_cell[i])
                self.last_ho_ms[i] = t
                if is_pp:
                    n_pp += 1
            self.serving[i] = new
            self.last_cell[i] = new
            if self.record_trace:
                self.trace.append(TraceRow(t, i, new, float(r[i, new]), "REATTACH"))

        # throughput for attached UEs, energy for all sites
        att_idx = np.nonzero(self.serving >= 0)[0]
        bits = 0.0
        if att_idx.size:
            rs = r[att_idx, self.serving[att_idx]]
            snr_db = rs - cfg.noise_floor_dbm
            cap = self.bw_hz[att_idx] * np.log2(1.0 + 10.0 ** (snr_db / 10.0))
            bits = float(np.sum(cap) * dt_s)
        joules = len(self.gnbs) * gnb_power_w(self.txp_dbm) * dt_s

        self.total_bits += bits
        self.total_joules += joules
        self.link_failures += n_lf
        self.total_handovers += n_ho
        self.pingpong_handovers += n_pp
        self.t_ms = t
        return TickStats(bits, joules, n_lf, n_ho, n_pp)

    def run(self, n_ticks: int | None = None) -> None:
        for _ in range(self.cfg.n_ticks if n_ticks is None else n_ticks):
            self.tick()

    # -- reporting --------------------------------------------------------

    def kpi_report(self) -> dict:
        ee = self.total_bits / self.total_joules if self.total_joules > 0 else 0.0
        return {
            "energy_efficiency_bits_per_joule": ee,
            "link_failures": self.link_failures,
            "total_handovers": self.total_handovers,
            "pingpong_handovers": self.pingpong_handovers,
            "total_bits": self.total_bits,
            "total_joules": self.total_joules,
        }


def write_trace_csv(trace: Sequence[TraceRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t_ms", "ue_id", "serving_gnb", "rsrp_dbm", "event"])
        for row in trace:
            w.writerow([f"{row.t_ms:g}", row.ue_id, row.serving_gnb, f"{row.rsrp_dbm:.6f}", row.event])
