"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import random

from ric_cms.conflict_model import KpiDirection, KpiSpec, XAppDescriptor
from ric_cms.mitigation import KpiResponseModel


def random_topology_inputs(rng: random.Random, max_xapps=10, max_params=12, max_kpis=8):
    """Random descriptor set: params drawn from a shared pool (overlap is
    the point), KPIs partitioned so ownership stays unique.  Returns
    (descriptors, extra_kp_edges)."""
    n_x = rng.randint(1, max_xapps)
    params = [f"p{i}" for i in range(rng.randint(1, max_params))]
    kpi_ids = [f"k{i}" for i in range(rng.randint(1, max_kpis))]
    rng.shuffle(kpi_ids)

    # deal KPIs round-robin-ish: each lands with exactly one random xApp
    owners: dict[int, list[str]] = {i: [] for i in range(n_x)}
    for k in kpi_ids:
        owners[rng.randrange(n_x)].append(k)

    xapps = []
    for i in range(n_x):
        n_icps = rng.randint(0, len(params))
        icps = tuple(rng.sample(params, n_icps))
        kpis = tuple(
            KpiSpec(k, rng.choice(list(KpiDirection)), sla_threshold=rng.uniform(0.1, 10.0), sla_sensitive=True)
            for k in owners[i]
        )
        xapps.append(XAppDescriptor(f"x{i}", icps, kpis))

    declared_params = sorted({p for x in xapps for p in x.icps})
    extra = []
    if declared_params and rng.random() < 0.5:
        for _ in range(rng.randint(1, 3)):
            extra.append((rng.choice(kpi_ids), rng.choice(declared_params)))
    return xapps, tuple(extra)


def oracle_param_groups(xapps, extra_kp_edges=()):
    """Membership-test oracle: p belongs to k's group iff some app both
    writes p and monitors k, or the edge was declared outright."""
    all_kpis = {k.id for x in xapps for k in x.kpis}
    all_params = {p for x in xapps for p in x.icps}
    groups = {k: set() for k in all_kpis}
    for k in all_kpis:
        for p in all_params:
            if any(p in x.icps and k in x.kpi_ids() for x in xapps):
                groups[k].add(p)
    for k, p in extra_kp_edges:
        groups[k].add(p)
    return groups


def oracle_direct_pairs(xapps):
    """Pairwise ICP intersections, as a set of (a, b, frozenset(params))."""
    out = set()
    for i, a in enumerate(xapps):
        for b in xapps[i + 1 :]:
            shared = frozenset(a.icps) & frozenset(b.icps)
            if shared:
                pair = tuple(sorted((a.id, b.id)))
                out.add((pair[0], pair[1], shared))
    return out


def random_qacm_instance(rng: random.Random):
    """Random optimizer input covering the satisfaction edge cases:
    negative thresholds, zero predictions, mixed directions."""
    n_models = rng.randint(1, 4)
    models = []
    for j in range(n_models):
        direction = rng.choice(list(KpiDirection))
        if direction is KpiDirection.MAXIMIZE:
            threshold = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 10.0)
        else:
            threshold = rng.uniform(-2.0, 10.0)
        n_pts = rng.randint(2, 5)
        vs = sorted(rng.sample(range(-20, 80), n_pts))
        ys = [rng.choice([0.0, rng.uniform(-5.0, 20.0)]) for _ in range(n_pts)]
        models.append(KpiResponseModel(f"k{j}", direction, threshold, tuple(zip(map(float, vs), ys))))
    lo = rng.uniform(-10.0, 10.0)
    hi = lo + rng.uniform(0.0, 40.0)
    step = rng.choice([0.5, 1.0, 2.5])
    return models, (lo, hi), step


def qacm_scan_oracle(models, bounds, step):
    """Plain grid walk tracking the best satisfaction product.  Returns
    (value, welfare, all_satisfied)."""
    lo, hi = bounds
    n = int((hi - lo) / step + 1e-9) + 1
    best = None
    for i in range(n):
        v = lo + i * step
        w = 1.0
        sats = []
        for m in models:
            s = m.satisfaction(v)
            sats.append(s)
            w = w * s
        if best is None or w > best[1]:
            best = (v, w, all(s == 1.0 for s in sats))
    return best
