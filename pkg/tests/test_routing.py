import itertools

import numpy as np
import pytest

from ssbv.circuit import Bitstring, GateKind, validate_circuit
from ssbv.noise import load_profile
from ssbv.oracles import OracleSpec, bv_logical_circuit
from ssbv.routing import (CouplingGraph, Embedding, RoutingInfeasible,
                          chain_graph, cnot_scaling, complete_graph,
                          embed_oracle, embedding_cnot_count, find_embedding,
                          graph_from_text, graph_to_text, heavy_hex_27,
                          layout_from_name, naive_cnot_count, route_bv,
                          verify_routed)
from ssbv.simulator import noiseless_output

# The 18-step walk through the 27-node layout used as the published-figure
# reference: 44 fused CNOTs at full weight, 80 with plain 3-CNOT SWAPs.
REFERENCE_WALK_26 = (23, 21, 18, 15, 12, 10, 7, 4, 1, 2, 3, 5, 8, 11, 14, 16,
                     19, 22, 25)


def brute_force_min_cost(graph: CouplingGraph, marked: set[int],
                         max_steps: int = 12) -> int:
    """Independent oracle: enumerate walks (revisits allowed) from every
    unmarked start, interleaving single direct-CNOT harvests with steps."""
    adj = graph.adjacency()
    best = [None]

    def explore(pos, cost, covered, steps):
        if best[0] is not None and cost >= best[0]:
            return
        if covered == marked:
            best[0] = cost
            return
        for h in sorted(adj[pos] & (marked - covered)):
            explore(pos, cost + 1, covered | {h}, steps)
        if steps < max_steps:
            for nb in sorted(adj[pos]):
                if nb in marked and nb not in covered:
                    explore(nb, cost + 2, covered | {nb}, steps + 1)
                else:
                    explore(nb, cost + 3, covered, steps + 1)

    for start in sorted(set(graph.usable) - marked):
        explore(start, 0, frozenset(), 0)
    return best[0]


def test_heavy_hex_shape():
    g = heavy_hex_27()
    assert g.num_physical == 27
    assert max(g.degree(q) for q in range(27)) == 3
    assert len(g.usable) == 27


def test_heavy_hex_blacklist():
    g = heavy_hex_27().with_blacklist({19, 20, 22})
    assert len(g.usable) == 24
    assert 20 not in g.neighbors(19)


def test_path3_pinned_marked_pair_costs_three():
    g = chain_graph(3)
    emb = find_embedding(g, {0, 1})
    spec = OracleSpec.representative(2, 2)
    cost = embedding_cnot_count(emb, spec)
    assert cost == 3
    assert cost == brute_force_min_cost(g, {0, 1})


def test_chain_bv2_routed_has_three_cnots():
    # ancilla at the chain end: fused step plus one direct hit
    g = chain_graph(3)
    spec = OracleSpec.representative(2, 2)
    emb = find_embedding(g, 2, ancilla_start=2)
    routed = route_bv(spec, g, emb)
    assert routed.cnot_count == 3
    assert verify_routed(routed, spec)


def test_zero_weight_oracle_routes_with_no_cnots():
    for g in (chain_graph(5), heavy_hex_27()):
        spec = OracleSpec.representative(4, 0)
        routed = route_bv(spec, g, embed_oracle(spec, g))
        assert routed.cnot_count == 0
        assert verify_routed(routed, spec)


def test_heavy_hex_full_weight_cnot_count():
    g = heavy_hex_27()
    spec = OracleSpec.representative(26, 26)
    emb = embed_oracle(spec, g)
    routed = route_bv(spec, g, emb)
    assert routed.cnot_count == embedding_cnot_count(emb, spec)
    # 44 is the published figure; a cheaper verified walk is a documented
    # discrepancy, anything above 44 is a regression
    assert routed.cnot_count <= 44
    assert verify_routed(routed, spec)


def test_reference_walk_reproduces_published_counts():
    g = heavy_hex_27()
    spec = OracleSpec.representative(26, 26)
    walk = REFERENCE_WALK_26
    hits = {0: 1, 6: 7, 9: 8, 17: 18, 20: 19, 26: 25, 13: 12, 24: 23}
    cover = []
    walked = set(walk)
    taken = set()
    adj = g.adjacency()
    for idx, node in enumerate(walk):
        for hit in sorted(h for h, anchor in hits.items()
                          if anchor == node and h not in taken):
            cover.append(hit)
            taken.add(hit)
        if idx + 1 < len(walk):
            cover.append(walk[idx + 1])
    l2p = {lq: node for lq, node in zip(range(26), cover)}
    direct = frozenset(lq for lq, node in l2p.items() if node in hits)
    emb = Embedding(walk, direct, l2p)
    assert embedding_cnot_count(emb, spec) == 44
    assert naive_cnot_count(emb, spec) == 80
    routed = route_bv(spec, g, emb)
    assert routed.cnot_count == 44
    assert verify_routed(routed, spec)


def test_cnot_scaling_chain():
    slope, counts = cnot_scaling(chain_graph(21), range(2, 21))
    assert 1.95 <= slope <= 2.05
    for n, c in counts.items():
        # interior walk with a direct hit off each end
        assert c == 2 * n - 2


def test_cnot_scaling_heavy_hex():
    slope, _ = cnot_scaling(heavy_hex_27(), range(2, 27))
    assert 1.70 <= slope <= 1.82


def test_cnot_scaling_fully_connected():
    slope, counts = cnot_scaling(complete_graph(12), range(2, 11))
    assert slope == pytest.approx(1.0)
    assert all(c == n for n, c in counts.items())


def test_pinned_search_matches_brute_force_on_random_graphs():
    rng = np.random.default_rng(11)
    for _ in range(12):
        n = int(rng.integers(4, 8))
        edges = set()
        nodes = list(range(n))
        for i in range(1, n):  # random connected graph
            edges.add((int(rng.integers(0, i)), i))
        for _ in range(n):
            a, b = rng.integers(0, n, size=2)
            if a != b:
                edges.add((min(int(a), int(b)), max(int(a), int(b))))
        g = CouplingGraph(n, frozenset(edges))
        k = int(rng.integers(1, n - 1))
        marked = set(int(q) for q in rng.choice(n, size=k, replace=False))
        if len(g.usable) - len(marked) < 1:
            continue
        emb = find_embedding(g, marked)
        spec = OracleSpec.representative(k, k)
        assert embedding_cnot_count(emb, spec) == brute_force_min_cost(g, marked)


def test_blacklist_monotonicity_exact_regime():
    g = heavy_hex_27()
    spec5 = OracleSpec.representative(5, 5)
    base = embedding_cnot_count(embed_oracle(spec5, g), spec5)
    for node in (12, 14, 1):
        worse = g.with_blacklist({node})
        cost = embedding_cnot_count(embed_oracle(spec5, worse), spec5)
        assert cost >= base


def test_routed_equals_logical_distribution_small():
    g = heavy_hex_27()
    for n in (3, 4, 5):
        for k in range(n + 1):
            spec = OracleSpec.representative(n, k)
            routed = route_bv(spec, g, embed_oracle(spec, g))
            got = noiseless_output(routed.circuit, routed.readout)
            logical, rmap = bv_logical_circuit(spec)
            want = noiseless_output(logical, rmap)
            assert got == pytest.approx(want, abs=1e-9)


def test_verify_catches_deleted_cnot():
    g = heavy_hex_27()
    spec = OracleSpec.representative(5, 4)
    routed = route_bv(spec, g, embed_oracle(spec, g))
    assert verify_routed(routed, spec)
    events = tuple(ev for ev in routed.circuit.events)
    drop = next(i for i, ev in enumerate(events) if ev.kind is GateKind.CNOT)
    from dataclasses import replace
    mutated = replace(routed, circuit=replace(
        routed.circuit, events=events[:drop] + events[drop + 1:]),
        cnot_count=routed.cnot_count - 1)
    assert not verify_routed(mutated, spec)


def test_structural_check_matches_exact_backend():
    # the X-basis sign propagation agrees with dense simulation
    g = heavy_hex_27()
    for n, k in ((6, 6), (7, 3), (8, 5)):
        spec = OracleSpec.representative(n, k)
        routed = route_bv(spec, g, embed_oracle(spec, g))
        assert verify_routed(routed, spec, exact_limit=10)
        assert verify_routed(routed, spec, exact_limit=0)  # F2 only


def test_standard_setup_adds_idle_wires_and_still_verifies():
    g = heavy_hex_27()
    spec = OracleSpec.representative(6, 3)
    emb = embed_oracle(spec, g)
    reduced = route_bv(spec, g, emb)
    standard = route_bv(spec, g, emb, standard=True)
    assert standard.circuit.num_qubits > reduced.circuit.num_qubits
    assert all(w is not None for w in standard.readout.wire_of_logical)
    assert verify_routed(standard, spec)
    assert validate_circuit(standard.circuit) is None


def test_route_rejects_bad_walks():
    g = chain_graph(4)
    spec = OracleSpec.representative(2, 2)
    bad = Embedding((0, 2), frozenset(), {0: 2, 1: 3})  # 0-2 not an edge
    with pytest.raises(RoutingInfeasible):
        route_bv(spec, g, bad)


def test_find_embedding_infeasible_cases():
    with pytest.raises(RoutingInfeasible):
        find_embedding(chain_graph(3), 3)  # k > usable - 1
    disconnected = CouplingGraph(4, frozenset({(0, 1), (2, 3)}))
    with pytest.raises(RoutingInfeasible):
        find_embedding(disconnected, 3)


def test_graph_io_roundtrip():
    g = heavy_hex_27().with_blacklist({19, 20, 22})
    back = graph_from_text(graph_to_text(g))
    assert back == g


def test_layout_registry(tmp_path):
    assert layout_from_name("heavy-hex-27").num_physical == 27
    assert layout_from_name("chain", min_nodes=9).num_physical == 9
    path = tmp_path / "g.graph"
    path.write_text(graph_to_text(chain_graph(5)))
    assert layout_from_name(f"file:{path}") == chain_graph(5)
    with pytest.raises(ValueError):
        layout_from_name("torus")
