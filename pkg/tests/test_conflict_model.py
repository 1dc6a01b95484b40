import random

import pytest

from conftest import oracle_direct_pairs, oracle_param_groups, random_topology_inputs
from ric_cms.conflict_model import (
    ConflictKind,
    KpiDirection,
    KpiSpec,
    TopologyError,
    XAppDescriptor,
    build_topology,
    direct_conflicts,
    five_xapp_descriptors,
    five_xapp_topology,
    indirect_conflicts,
    load_topology,
    param_param_edges,
    promote_implicit,
    save_topology,
    topology_from_dict,
    topology_to_dict,
    write_graph_csvs,
)

EXPECTED_GROUPS = {
    "k1": {"p1", "p2"},
    "k2": {"p1", "p2", "p3"},
    "k3": {"p1", "p4"},
    "k41": {"p2", "p5", "p6"},
    "k42": {"p2", "p5", "p6"},
    "k5": {"p7", "p8"},
}


def test_reference_topology_groups():
    t = five_xapp_topology()
    assert {k: set(v) for k, v in t.param_groups.items()} == EXPECTED_GROUPS


def test_reference_topology_direct_conflicts():
    conflicts = direct_conflicts(five_xapp_topology())
    got = {(c.xapps, c.params) for c in conflicts}
    assert got == {
        (("x1", "x2"), ("p1", "p2")),
        (("x1", "x3"), ("p1",)),
        (("x2", "x3"), ("p1",)),
    }
    assert all(c.kind is ConflictKind.DIRECT for c in conflicts)


def test_reference_topology_indirect_conflicts():
    conflicts = indirect_conflicts(five_xapp_topology())
    got = {(c.kpi, c.xapps, c.params) for c in conflicts}
    assert got == {
        ("k41", ("x1", "x2", "x4"), ("p2",)),
        ("k42", ("x1", "x2", "x4"), ("p2",)),
    }


def test_build_is_order_insensitive():
    xapps = five_xapp_descriptors()
    a = build_topology(xapps)
    b = build_topology(tuple(reversed(xapps)))
    assert a == b


def test_inverse_maps_are_consistent():
    t = five_xapp_topology()
    for p, kpis in t.param_to_kpis.items():
        for k in kpis:
            assert p in t.param_groups[k]
    for k, params in t.param_groups.items():
        for p in params:
            assert k in t.param_to_kpis[p]


def test_duplicate_xapp_id_rejected():
    x = XAppDescriptor("a", ("p1",), ())
    with pytest.raises(TopologyError, match="duplicate xApp"):
        build_topology([x, XAppDescriptor("a", ("p2",), ())])


def test_shared_kpi_ownership_rejected():
    k = KpiSpec("k", KpiDirection.MAXIMIZE)
    with pytest.raises(TopologyError, match="owned by both"):
        build_topology(
            [XAppDescriptor("a", ("p1",), (k,)), XAppDescriptor("b", ("p2",), (k,))]
        )


def test_extra_edge_must_reference_known_nodes():
    xapps = five_xapp_descriptors()
    with pytest.raises(TopologyError, match="unknown KPI"):
        build_topology(xapps, [("nope", "p1")])
    with pytest.raises(TopologyError, match="unknown parameter"):
        build_topology(xapps, [("k1", "nope")])


def test_sla_sensitive_kpi_needs_threshold():
    with pytest.raises(TopologyError, match="no threshold"):
        KpiSpec("k", KpiDirection.MINIMIZE, sla_threshold=None, sla_sensitive=True)


def test_promote_implicit_is_copy_on_write():
    t = five_xapp_topology()
    t2 = promote_implicit(t, "p1", "k5")
    assert "p1" in t2.param_groups["k5"]
    assert "p1" not in t.param_groups["k5"]
    assert "k5" in t2.param_to_kpis["p1"]


def test_promote_implicit_rejects_bad_input():
    t = five_xapp_topology()
    with pytest.raises(TopologyError):
        promote_implicit(t, "nope", "k5")
    with pytest.raises(TopologyError):
        promote_implicit(t, "p1", "nope")
    with pytest.raises(TopologyError, match="already"):
        promote_implicit(t, "p7", "k5")


def test_param_param_edges_reference():
    edges = {(a, b): set(ks) for a, b, ks in param_param_edges(five_xapp_topology())}
    assert edges[("p1", "p2")] == {"k1", "k2"}
    assert edges[("p2", "p5")] == {"k41", "k42"}
    assert edges[("p7", "p8")] == {"k5"}
    assert ("p1", "p7") not in edges


def test_groups_match_membership_oracle():
    rng = random.Random(1234)
    for _ in range(30):
        xapps, extra = random_topology_inputs(rng)
        t = build_topology(xapps, extra)
        expected = oracle_param_groups(xapps, extra)
        assert {k: set(v) for k, v in t.param_groups.items()} == expected
        got_direct = {(c.xapps[0], c.xapps[1], frozenset(c.params)) for c in direct_conflicts(t)}
        assert got_direct == oracle_direct_pairs(xapps)


def test_dict_roundtrip_preserves_everything():
    t = five_xapp_topology()
    assert topology_from_dict(topology_to_dict(t)) == t


def test_file_roundtrip(tmp_path):
    t = five_xapp_topology()
    path = tmp_path / "topo.json"
    save_topology(t, path)
    assert load_topology(path) == t


def test_graph_csvs(tmp_path):
    t = five_xapp_topology()
    written = write_graph_csvs(t, tmp_path)
    assert sorted(p.name for p in written) == ["kp_edges.csv", "pp_edges.csv", "xp_edges.csv"]
    xp = (tmp_path / "xp_edges.csv").read_text().splitlines()
    assert xp[0] == "xapp,param"
    assert "x1,p1" in xp
    kp = (tmp_path / "kp_edges.csv").read_text().splitlines()
    assert "k41,p2" in kp
