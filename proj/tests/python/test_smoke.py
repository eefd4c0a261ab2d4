import os

import pytest

import lgan


def test_graph_basics():
    g = lgan.cycle_graph(6)
    assert g.node_count == 6
    assert g.edge_count == 6
    assert g.degree(0) == 2
    assert g.has_edge(0, 5)


def test_line_graph_whitney_exception():
    k3 = lgan.complete_graph(3)
    claw = lgan.star_graph(3)
    _, lg_k3 = lgan.line_graph(k3)
    _, lg_claw = lgan.line_graph(claw)
    assert len(lg_k3) == 3 and len(lg_claw) == 3
    assert lgan.brute_force_isomorphic(
        lgan.Graph(3, lg_k3), lgan.Graph(3, lg_claw)
    )
    assert not lgan.brute_force_isomorphic(k3, claw)


def test_refinement_verdicts_on_the_blind_pair():
    g, h = lgan.generate_pair("onewl_blind")
    v = lgan.compare_refinements(g, h)
    assert not v["isomorphic"]
    assert not v["dist_1wl"]
    assert not v["dist_set2wl"]
    assert v["dist_set2fwl"]
    assert v["dist_lgan_hash"]


def test_witness_search():
    pair = lgan.find_theorem2_witness(6)
    assert pair is not None
    g, h = pair
    assert g.node_count == h.node_count == 6
    assert lgan.find_theorem2_witness(2) is None


def test_message_counts():
    assert lgan.message_counts(lgan.cycle_graph(6)) == (12, 0)
    two_k3 = lgan.disjoint_union(lgan.complete_graph(3), lgan.complete_graph(3))
    assert lgan.message_counts(two_k3) == (12, 6)
    assert lgan.message_counts(lgan.complete_graph(5)) == (20, 30)


def test_attribution_smoke():
    _, flagged = lgan.generate_pair("triangle_flag")
    out = lgan.random_model_edge_attribution(flagged, steps=16)
    assert len(out["scores"]) == flagged.edge_count
    assert all(isinstance(s, float) for s in out["scores"])


@pytest.mark.skipif(
    not os.path.isdir(os.path.join(os.environ.get("LGAN_DATA_DIR", "data"), "MUTAG")),
    reason="MUTAG data not present",
)
def test_mutag_parse_and_tiny_cv():
    data_dir = os.path.join(os.environ.get("LGAN_DATA_DIR", "data"), "MUTAG")
    d = lgan.parse_tu_dataset(data_dir, "MUTAG")
    assert len(d) == 188
    assert d.num_classes == 2
    report = lgan.cross_validate(
        data_dir, "MUTAG", layers=1, hidden_dim=8, epochs=2, folds=2, seed=0
    )
    assert len(report["fold_accuracy"]) == 2
    assert 0.0 <= report["mean_accuracy"] <= 1.0
