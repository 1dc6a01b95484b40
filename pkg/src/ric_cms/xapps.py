"""The xApps used by the experiments, plus synthetic detection workloads.

Two apps fight over the network-wide transmit power: an energy saver that
wants it low and a mobility-robustness app that wants it high.  Their
requests fire on a fixed cadence (energy saver at the start of each
control interval, mobility app half an interval later), which produces a
sustained direct conflict on the single shared knob.

`gen_stochastic_events` builds labeled change/degradation streams against
an arbitrary topology for exercising the detector: events are spaced so
every degradation attributes to exactly its own change.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .conflict_model import (
    ConflictTopology,
    KpiDirection,
    KpiSpec,
    XAppDescriptor,
    build_topology,
)
from .detection import ChangeRecord, DegradationEvent, VerdictKind
from .mitigation import ParameterRequest

ES_XAPP_ID = "es"
MRO_XAPP_ID = "mro"
TXP_PARAM = "TXP"
ES_TXP_DBM = 3.0
MRO_TXP_DBM = 50.0
EE_KPI = "energy_efficiency"
LF_KPI = "link_failure_rate"

# Any link failure inside the monitoring window violates the SLA.
LF_SLA_THRESHOLD = 0.5


def experiment_descriptors() -> tuple[XAppDescriptor, XAppDescriptor]:
    es = XAppDescriptor(
        ES_XAPP_ID,
        (TXP_PARAM,),
        (KpiSpec(EE_KPI, KpiDirection.MAXIMIZE),),
    )
    mro = XAppDescriptor(
        MRO_XAPP_ID,
        (TXP_PARAM,),
        (KpiSpec(LF_KPI, KpiDirection.MINIMIZE, LF_SLA_THRESHOLD, sla_sensitive=True),),
    )
    return es, mro


def experiment_topology() -> ConflictTopology:
    return build_topology(experiment_descriptors())


def es_request(t_ms: float) -> ParameterRequest:
    return ParameterRequest(ES_XAPP_ID, TXP_PARAM, ES_TXP_DBM, t_ms)


def mro_request(t_ms: float) -> ParameterRequest:
    return ParameterRequest(MRO_XAPP_ID, TXP_PARAM, MRO_TXP_DBM, t_ms)


# ---------------------------------------------------------------------------
# Policy files
# ---------------------------------------------------------------------------

class Trigger(Enum):
    INTERVAL_START = "interval_start"
    HALF_INTERVAL = "half_interval"


@dataclass(frozen=True)
class PolicyCondition:
    """Optional gate on a policy: fire only when a windowed KPI statistic
    compares true against the reference value."""

    kpi: str
    op: str  # one of > >= < <=
    value: float
    window_ms: float

    _OPS = {
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
    }

    def __post_init__(self):
        if self.op not in self._OPS:
            raise ValueError(f"unsupported op {self.op!r}")

    def holds(self, kpi_value: float) -> bool:
        return self._OPS[self.op](kpi_value, self.value)


@dataclass(frozen=True)
class XAppPolicy:
    xapp: str
    trigger: Trigger
    request_value: float
    condition: PolicyCondition | None = None

    def request(self, t_ms: float) -> ParameterRequest:
        return ParameterRequest(self.xapp, TXP_PARAM, self.request_value, t_ms)


def default_policies() -> tuple[XAppPolicy, XAppPolicy]:
    return (
        XAppPolicy(ES_XAPP_ID, Trigger.INTERVAL_START, ES_TXP_DBM),
        XAppPolicy(MRO_XAPP_ID, Trigger.HALF_INTERVAL, MRO_TXP_DBM),
    )


def policy_from_dict(d: dict) -> XAppPolicy:
    cond = None
    if d.get("condition") is not None:
        c = d["condition"]
        cond = PolicyCondition(c["kpi"], c["op"], float(c["value"]), float(c["window_ms"]))
    return XAppPolicy(
        xapp=d["xapp"],
        trigger=Trigger(d["trigger"]),
        request_value=float(d["request_value"]),
        condition=cond,
    )


def policy_to_dict(p: XAppPolicy) -> dict:
    return {
        "xapp": p.xapp,
        "trigger": p.trigger.value,
        "request_value": p.request_value,
        "condition": None
        if p.condition is None
        else {
            "kpi": p.condition.kpi,
            "op": p.condition.op,
            "value": p.condition.value,
            "window_ms": p.condition.window_ms,
        },
    }


def load_policy(path: str | Path) -> XAppPolicy:
    with open(path) as f:
        return policy_from_dict(json.load(f))


def save_policy(p: XAppPolicy, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(policy_to_dict(p), f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# Labeled detection workloads
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabeledEvent:
    change: ChangeRecord
    degradation: DegradationEvent
    expected: VerdictKind


def _instance_pools(t: ConflictTopology) -> dict[VerdictKind, list[tuple[str, str, str, str]]]:
    """Enumerate (instructing, param, observing, kpi) tuples per verdict kind.

    Built from first principles of the rule chain, not by running it:
    rule 1 needs same app; rule 2 needs the param in both ICP sets; rule 3
    needs it in the KPI's group but not the observer's ICPs; rule 4 the
    rest.  Changes always touch a param the instructing app declares.
    """
    pools: dict[VerdictKind, list[tuple[str, str, str, str]]] = {k: [] for k in VerdictKind}
    icps = {x.id: set(x.icps) for x in t.xapps}
    for obs in t.xapps:
        for kpi in obs.kpi_ids():
            group = t.param_groups[kpi]
            for instr in t.xapps:
                for p in instr.icps:
                    if instr.id == obs.id:
                        pools[VerdictKind.NO_CONFLICT].append((instr.id, p, obs.id, kpi))
                    elif p in icps[obs.id]:
                        pools[VerdictKind.DIRECT].append((instr.id, p, obs.id, kpi))
                    elif p in group:
                        pools[VerdictKind.INDIRECT].append((instr.id, p, obs.id, kpi))
                    else:
                        pools[VerdictKind.IMPLICIT].append((instr.id, p, obs.id, kpi))
    return pools


KIND_TO_VERDICT = {
    "no_conflict": VerdictKind.NO_CONFLICT,
    "direct": VerdictKind.DIRECT,
    "indirect": VerdictKind.INDIRECT,
    "implicit": VerdictKind.IMPLICIT,
}


def gen_stochastic_events(
    topology: ConflictTopology,
    n: int,
    seed: int,
    window_ms: float = 1000.0,
) -> list[LabeledEvent]:
    """n labeled events, evenly mixed over the four verdict kinds.

    Event i puts its change at i*window_ms and its degradation half a
    window later, so attribution is unambiguous: the previous event's
    change has already fallen out of the window.
    """
    pools = _instance_pools(topology)
    missing = [k.value for k in VerdictKind if not pools[k]]
    if missing:
        raise ValueError(f"topology cannot express verdict kinds: {', '.join(missing)}")

    rng = random.Random(seed)
    kinds: list[VerdictKind] = []
    per = n // len(VerdictKind)
    for k in VerdictKind:
        kinds.extend([k] * per)
    kinds.extend(rng.choice(list(VerdictKind)) for _ in range(n - len(kinds)))
    rng.shuffle(kinds)

    events = []
    for i, kind in enumerate(kinds):
        instr, p, obs, kpi = rng.choice(pools[kind])
        t0 = i * window_ms
        events.append(
            LabeledEvent(
                change=ChangeRecord(t0, instr, p, rng.uniform(0.0, 50.0)),
                degradation=DegradationEvent(t0 + window_ms / 2.0, kpi, obs, rng.uniform(0.0, 1.0)),
                expected=kind,
            )
        )
    return events
