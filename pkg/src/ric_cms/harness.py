"""Experiment harness: strategy arms over a shared simulated network.

One replica wires together the simulator, the two competing xApps, the
conflict-management layer in one of three enforcement modes, and the
runtime detector:

  write-through   nc    requests land as they arrive
  reactive reset  sbd   requests land, the controller snaps the knob back
                        to its default one tick after the interval's
                        second request exposes the conflict
  interception    p-es, p-mro, qacm
                        requests are held as standing wishes; every
                        arrival re-arbitrates and only the arbitrated
                        value touches the network

Arms are paired by common random numbers: replica r uses seed
base_seed + r under every strategy, so cross-strategy differences come
from the strategy alone.  The no-coordination arm doubles as the
calibration source for QACM: its phase statistics (the network dwells at
exactly the two requested power levels) become two-point response
curves, and its medians become the satisfaction thresholds.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .conflict_model import ConflictTopology
from .detection import (
    ChangeRecord,
    DegradationEvent,
    Ledger,
    UnattributableDegradationError,
)
from .mitigation import (
    KpiDirection,
    KpiResponseModel,
    MitigationContext,
    ParameterRequest,
    ResponseModelSet,
    Strategy,
    mitigate,
)
from .ran_sim import SimConfig, Simulator, write_trace_csv
from .xapps import (
    EE_KPI,
    ES_TXP_DBM,
    ES_XAPP_ID,
    LF_KPI,
    LF_SLA_THRESHOLD,
    MRO_TXP_DBM,
    MRO_XAPP_ID,
    TXP_PARAM,
    es_request,
    experiment_topology,
    mro_request,
)

ALL_STRATEGIES = (Strategy.NC, Strategy.SBD, Strategy.P_ES, Strategy.P_MRO, Strategy.QACM)

RESULT_COLUMNS = (
    "strategy",
    "rep",
    "seed",
    "energy_efficiency_bits_per_joule",
    "link_failures",
    "total_handovers",
    "pingpong_handovers",
)


@dataclass
class ExperimentConfig:
    sim: SimConfig
    strategies: tuple[Strategy, ...] = ALL_STRATEGIES
    reps: int = 50
    base_seed: int = 0
    interval_ms: float = 2000.0
    default_txp_dbm: float = 30.0
    txp_bounds: tuple[float, float] = (0.0, 50.0)
    grid_step_dbm: float = 1.0
    attribution_window_ms: float = 1000.0

    def __post_init__(self):
        self.strategies = tuple(self.strategies)
        ticks = self.interval_ms / self.sim.step_ms
        if abs(ticks - round(ticks)) > 1e-9 or round(ticks) < 2 or round(ticks) % 2:
            raise ValueError("interval_ms must be an even multiple of the simulation step")
        if self.reps <= 0:
            raise ValueError("reps must be positive")


def desk_preset(base_seed: int = 0) -> ExperimentConfig:
    """Small but statistically stable: 50 paired replicas of 2 minutes."""
    return ExperimentConfig(sim=SimConfig(duration_s=120.0), reps=50, base_seed=base_seed)


def paper_preset(base_seed: int = 0) -> ExperimentConfig:
    """Long form: 500 paired replicas of 10 minutes each."""
    return ExperimentConfig(sim=SimConfig(duration_s=600.0), reps=500, base_seed=base_seed)


PRESETS = {"desk": desk_preset, "paper": paper_preset}


# ===========================================================================
# Single replica
# ===========================================================================

@dataclass
class PhaseStats:
    """Accumulated per applied power level; the calibration raw material."""

    time_ms: float = 0.0
    bits: float = 0.0
    joules: float = 0.0
    link_failures: int = 0


@dataclass
class ReplicaResult:
    strategy: str
    rep: int
    seed: int
    energy_efficiency_bits_per_joule: float
    link_failures: int
    total_handovers: int
    pingpong_handovers: int
    verdicts: dict[str, int] = field(default_factory=dict)
    unattributed: int = 0
    phases: dict[float, PhaseStats] = field(default_factory=dict)

    def csv_row(self) -> list:
        return [
            self.strategy,
            self.rep,
            self.seed,
            self.energy_efficiency_bits_per_joule,
            self.link_failures,
            self.total_handovers,
            self.pingpong_handovers,
        ]


def run_replica(
    strategy: Strategy,
    rep: int,
    exp: ExperimentConfig,
    ctx: MitigationContext,
    topology: ConflictTopology | None = None,
    record_trace: bool = False,
) -> tuple[ReplicaResult, Simulator]:
    seed = exp.base_seed + rep
    sim = Simulator(exp.sim, seed, record_trace=record_trace)
    ledger = Ledger(topology or experiment_topology(), exp.attribution_window_ms)

    step = exp.sim.step_ms
    interval_ticks = int(round(exp.interval_ms / step))
    half_ticks = interval_ticks // 2
    window_ticks = int(round(exp.attribution_window_ms / step))
    intercept = strategy in (Strategy.P_ES, Strategy.P_MRO, Strategy.QACM)

    standing: dict[str, ParameterRequest] = {}
    interval_requests: list[ParameterRequest] = []
    pending_reset_ms: float | None = None
    lf_per_tick: list[int] = []
    phases: dict[float, PhaseStats] = {}
    verdicts: Counter = Counter()
    unattributed = 0

    def land(value: float, requester: str, t_ms: float) -> None:
        sim.set_txp(value)
        ledger.record_change(ChangeRecord(t_ms, requester, TXP_PARAM, value))

    def handle_request(req: ParameterRequest) -> None:
        if intercept:
            standing[req.xapp] = req
            decision = mitigate(strategy, list(standing.values()), ctx)
            if decision.value != sim.txp_dbm:
                land(decision.value, req.xapp, req.t_ms)
        else:
            # write-through; sbd's corrective reset is scheduled separately
            decision = mitigate(Strategy.NC, [req], ctx)
            land(decision.value, req.xapp, req.t_ms)

    for tick_i in range(exp.sim.n_ticks):
        t = sim.t_ms
        in_interval = tick_i % interval_ticks

        if pending_reset_ms is not None and t >= pending_reset_ms:
            decision = mitigate(Strategy.SBD, interval_requests, ctx)
            sim.set_txp(decision.value)  # controller action, not an xApp write
            pending_reset_ms = None

        if in_interval == half_ticks:
            # SLA check runs before the mobility app's own request lands,
            # so attribution sees the energy saver's standing change.
            lf_window = sum(lf_per_tick[-window_ticks:])
            if lf_window > LF_SLA_THRESHOLD:
                ev = DegradationEvent(t, LF_KPI, MRO_XAPP_ID, float(lf_window))
                ledger.record_degradation(ev)
                try:
                    verdicts[ledger.classify(ev).kind.value] += 1
                except UnattributableDegradationError:
                    unattributed += 1

        if in_interval == 0:
            interval_requests = []
            req = es_request(t)
            interval_requests.append(req)
            handle_request(req)
        elif in_interval == half_ticks:
            req = mro_request(t)
            interval_requests.append(req)
            handle_request(req)
            if strategy is Strategy.SBD:
                pending_reset_ms = t + step

        applied = sim.txp_dbm
        stats = sim.tick()
        lf_per_tick.append(stats.link_failures)
        ph = phases.setdefault(applied, PhaseStats())
        ph.time_ms += step
        ph.bits += stats.bits
        ph.joules += stats.joules
        ph.link_failures += stats.link_failures

    report = sim.kpi_report()
    result = ReplicaResult(
        strategy=strategy.value,
        rep=rep,
        seed=seed,
        energy_efficiency_bits_per_joule=report["energy_efficiency_bits_per_joule"],
        link_failures=report["link_failures"],
        total_handovers=report["total_handovers"],
        pingpong_handovers=report["pingpong_handovers"],
        verdicts=dict(verdicts),
        unattributed=unattributed,
        phases=phases,
    )
    return result, sim


# ===========================================================================
# Calibration from the no-coordination arm
# ===========================================================================

def derive_qacm_thresholds(nc_rows: Sequence[ReplicaResult]) -> dict[str, float]:
    """Satisfaction targets: do at least as well as the typical
    uncoordinated replica on both fronts."""
    ee = [r.energy_efficiency_bits_per_joule for r in nc_rows]
    lf = [r.link_failures for r in nc_rows]
    return {
        EE_KPI: float(np.median(ee)),
        LF_KPI: float(np.median(lf)),
    }


def derive_qacm_models(
    nc_rows: Sequence[ReplicaResult],
    exp: ExperimentConfig,
    thresholds: dict[str, float] | None = None,
) -> ResponseModelSet:
    """Two-point response curves from the NC arm's phase statistics.

    Under no coordination the network dwells at exactly the two requested
    power levels, so each level gets a direct measurement: energy
    efficiency as bits over joules, link failures as a rate scaled to the
    replica horizon.  Linear interpolation between the two anchors is a
    deliberately conservative reading of the middle ground.
    """
    thresholds = thresholds or derive_qacm_thresholds(nc_rows)
    agg: dict[float, PhaseStats] = {}
    for row in nc_rows:
        for v, ph in row.phases.items():
            a = agg.setdefault(v, PhaseStats())
            a.time_ms += ph.time_ms
            a.bits += ph.bits
            a.joules += ph.joules
            a.link_failures += ph.link_failures

    anchors = (ES_TXP_DBM, MRO_TXP_DBM)
    for v in anchors:
        if v not in agg or agg[v].time_ms <= 0 or agg[v].joules <= 0:
            raise ValueError(f"no-coordination arm never dwelt at {v} dBm, cannot calibrate")

    horizon_ms = exp.sim.duration_s * 1000.0
    ee_curve = tuple((v, agg[v].bits / agg[v].joules) for v in anchors)
    lf_curve = tuple((v, agg[v].link_failures / agg[v].time_ms * horizon_ms) for v in anchors)

    if thresholds[EE_KPI] <= 0:
        raise ValueError("degenerate calibration: no-coordination efficiency median is zero")

    return ResponseModelSet(
        param=TXP_PARAM,
        bounds=exp.txp_bounds,
        grid_step=exp.grid_step_dbm,
        models=(
            KpiResponseModel(EE_KPI, KpiDirection.MAXIMIZE, thresholds[EE_KPI], ee_curve),
            KpiResponseModel(LF_KPI, KpiDirection.MINIMIZE, thresholds[LF_KPI], lf_curve),
        ),
    )


def _context(exp: ExperimentConfig, strategy: Strategy, model_set: ResponseModelSet | None) -> MitigationContext:
    priorities: dict[str, int] = {}
    if strategy is Strategy.P_ES:
        priorities = {ES_XAPP_ID: 2, MRO_XAPP_ID: 1}
    elif strategy is Strategy.P_MRO:
        priorities = {MRO_XAPP_ID: 2, ES_XAPP_ID: 1}
    models: dict[str, ResponseModelSet] = {}
    if strategy is Strategy.QACM:
        if model_set is None:
            raise ValueError("qacm arm needs calibrated response models")
        models = {TXP_PARAM: model_set}
    return MitigationContext(
        defaults={TXP_PARAM: exp.default_txp_dbm},
        priorities=priorities,
        response_models=models,
        bounds={TXP_PARAM: exp.txp_bounds},
    )


# ===========================================================================
# Full experiment
# ===========================================================================

@dataclass(frozen=True)
class BoxStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float

    def to_dict(self) -> dict:
        return {
            "min": self.minimum,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.maximum,
        }


def box_stats(values: Sequence[float]) -> BoxStats:
    qs = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return BoxStats(*(float(q) for q in qs))


METRICS = (
    "energy_efficiency_bits_per_joule",
    "link_failures",
    "total_handovers",
    "pingpong_handovers",
)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: dict[str, list[ReplicaResult]]  # strategy value -> replicas in rep order
    thresholds: dict[str, float] | None
    model_set: ResponseModelSet | None
    traces: dict[str, Simulator] = field(default_factory=dict)  # rep-0 sims

    def summary(self) -> dict[str, dict[str, BoxStats]]:
        out: dict[str, dict[str, BoxStats]] = {}
        for strat, rows in self.rows.items():
            out[strat] = {
                m: box_stats([getattr(r, m) for r in rows]) for m in METRICS
            }
        return out

    def medians(self, metric: str) -> dict[str, float]:
        return {s: stats[metric].median for s, stats in self.summary().items()}


def run_experiment(
    exp: ExperimentConfig,
    progress: Callable[[str, int, int], None] | None = None,
) -> ExperimentResult:
    """Run every requested arm, pairing replicas by seed.

    The no-coordination arm runs first whenever it is requested or the
    QACM arm needs it for calibration; its replicas are reused, never
    re-run, so a repeated call with the same config is bit-reproducible.
    """
    need_nc = Strategy.NC in exp.strategies or Strategy.QACM in exp.strategies
    rows: dict[str, list[ReplicaResult]] = {}
    traces: dict[str, Simulator] = {}

    nc_rows: list[ReplicaResult] = []
    if need_nc:
        base_ctx = _context(exp, Strategy.NC, None)
        for rep in range(exp.reps):
            if progress:
                progress(Strategy.NC.value, rep, exp.reps)
            res, sim = run_replica(Strategy.NC, rep, exp, base_ctx, record_trace=rep == 0)
            nc_rows.append(res)
            if rep == 0:
                traces[Strategy.NC.value] = sim

    thresholds = None
    model_set = None
    if Strategy.QACM in exp.strategies:
        thresholds = derive_qacm_thresholds(nc_rows)
        model_set = derive_qacm_models(nc_rows, exp, thresholds)

    for strategy in exp.strategies:
        if strategy is Strategy.NC:
            rows[strategy.value] = nc_rows
            continue
        ctx = _context(exp, strategy, model_set)
        arm: list[ReplicaResult] = []
        for rep in range(exp.reps):
            if progress:
                progress(strategy.value, rep, exp.reps)
            res, sim = run_replica(strategy, rep, exp, ctx, record_trace=rep == 0)
            arm.append(res)
            if rep == 0:
                traces[strategy.value] = sim
        rows[strategy.value] = arm

    return ExperimentResult(exp, rows, thresholds, model_set, traces)


# ===========================================================================
# Exports
# ===========================================================================

def export_csv(result: ExperimentResult, path: str | Path) -> None:
    import csv

    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RESULT_COLUMNS)
        for strategy in result.config.strategies:
            for r in result.rows.get(strategy.value, ()):
                w.writerow(r.csv_row())


def import_csv(path: str | Path) -> list[dict]:
    import csv

    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out.append(
                {
                    "strategy": row["strategy"],
                    "rep": int(row["rep"]),
                    "seed": int(row["seed"]),
                    "energy_efficiency_bits_per_joule": float(row["energy_efficiency_bits_per_joule"]),
                    "link_failures": int(row["link_failures"]),
                    "total_handovers": int(row["total_handovers"]),
                    "pingpong_handovers": int(row["pingpong_handovers"]),
                }
            )
    return out


def export_summary_json(result: ExperimentResult, path: str | Path) -> None:
    payload: dict = {
        "config": {
            "reps": result.config.reps,
            "base_seed": result.config.base_seed,
            "interval_ms": result.config.interval_ms,
            "duration_s": result.config.sim.duration_s,
            "strategies": [s.value for s in result.config.strategies],
        },
        "strategies": {
            strat: {m: bs.to_dict() for m, bs in stats.items()}
            for strat, stats in result.summary().items()
        },
        "verdicts": {
            strat: {
                "counts": dict(sum((Counter(r.verdicts) for r in rows), Counter())),
                "unattributed": sum(r.unattributed for r in rows),
            }
            for strat, rows in result.rows.items()
        },
    }
    if result.thresholds is not None:
        payload["thresholds"] = result.thresholds
    if result.model_set is not None:
        opt = result.model_set.optimize()
        payload["qacm"] = {
            "chosen_txp_dbm": opt.value,
            "welfare": opt.welfare,
            "satisfied_all": opt.satisfied_all,
        }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def export_traces(result: ExperimentResult, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for strat, sim in result.traces.items():
        p = outdir / f"trace_{strat}_rep0.csv"
        write_trace_csv(sim.trace, p)
        written.append(p)
    return written
