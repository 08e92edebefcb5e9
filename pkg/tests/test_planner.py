"""Tiling search, band packing, whole-network plans, hybrid partitioning."""

import numpy as np
import pytest

from edge_mapper.aiecost import crossing_count, crossing_penalty_factor
from edge_mapper.model import (
    CalibrationTable,
    InfeasibleError,
    LayerSpec,
    NetworkSpec,
    ResourceVector,
    ValidationError,
    bundled_device,
    fixture_path,
    load_calibration,
    load_network,
)
from edge_mapper.planner import (
    OBJECTIVE_MIN_TILES,
    PlanConstraints,
    band_layout,
    candidate_tilings,
    crossing_sensitivity,
    exhaustive_layer_search,
    hybrid_partition,
    partition_costs,
    plan_layer,
    plan_network,
)

DEV = bundled_device()


def _layer(k, n, m=8, name=None):
    return LayerSpec(name=name or f"k{k}n{n}", m=m, k=k, n=n)


# ---------------------------------------------------------------------------
# Single-layer search


def test_plan_layer_square_golden():
    cand = plan_layer(_layer(128, 128), DEV, PlanConstraints(max_tiles_per_layer=8))
    assert (cand.p_k, cand.p_n) == (4, 2)
    assert cand.api_shape == (4, 8, 8)
    assert (cand.q_k, cand.q_n) == (32, 64)
    assert cand.latency.cycles == 311


def test_plan_layer_single_tile_when_capped():
    cand = plan_layer(_layer(16, 32), DEV, PlanConstraints(max_tiles_per_layer=1))
    assert (cand.p_k, cand.p_n) == (1, 1)
    assert cand.latency.tiling.api_shape == (4, 8, 8)


def test_plan_layer_infeasible_layer():
    with pytest.raises(InfeasibleError, match="k8n8"):
        plan_layer(_layer(8, 8), DEV)


def test_candidate_order_is_deterministic():
    cands = candidate_tilings(_layer(128, 128), DEV)
    keys = [(c.tiles, -c.p_k, c.shape_index) for c in cands]
    assert keys == sorted(keys)


def test_plan_layer_matches_exhaustive_on_fixture_layers():
    calib = load_calibration(fixture_path("autoencoder_calib.csv"))
    for layer in load_network(fixture_path("autoencoder.json")).layers:
        fast = plan_layer(layer, DEV, calib=calib)
        best, table = exhaustive_layer_search(layer, DEV, calib=calib)
        assert fast.sort_key == best.sort_key
        assert all(fast.sort_key <= c.sort_key for c in table)


def test_exhaustive_search_refuses_huge_spaces():
    with pytest.raises(ValidationError, match="cap"):
        exhaustive_layer_search(_layer(128, 128), DEV, cap=10)


def test_plan_layer_optimal_against_exhaustive_random():
    rng = np.random.default_rng(7)
    sizes = [16, 24, 32, 48, 64, 80, 96, 128, 192, 256]
    for _ in range(30):
        layer = _layer(int(rng.choice(sizes)), int(rng.choice(sizes)))
        cands = candidate_tilings(layer, DEV)
        if not cands:
            continue
        # random measured values for a random subset of candidate keys
        aie = {}
        for c in cands:
            if rng.random() < 0.5:
                key = (c.padded_m, c.q_k, c.q_n, tuple(c.api_shape))
                aie.setdefault(key, int(rng.integers(40, 2000)))
        calib = CalibrationTable(aie=aie)
        fast = plan_layer(layer, DEV, calib=calib)
        best, _ = exhaustive_layer_search(layer, DEV, calib=calib)
        assert fast.sort_key == best.sort_key


# ---------------------------------------------------------------------------
# Band packing


def test_band_layout_goldens():
    assert band_layout([4] * 8, DEV).groups == ((0, 1, 2, 3, 4, 5, 6), (7,))
    assert band_layout([6] * 8, DEV).groups == ((0, 1, 2, 3, 4), (5, 6, 7))
    assert band_layout([3] * 8, DEV).bands == 1
    assert band_layout([2] * 8, DEV).bands == 1


def test_band_layout_absolute_columns():
    layout = band_layout([4, 6], DEV)
    assert layout.assignments[0] == (0, 7, 10)
    assert layout.assignments[1] == (0, 11, 16)


def test_band_layout_rejects_overwide_layer():
    with pytest.raises(InfeasibleError):
        band_layout([32], DEV)


# ---------------------------------------------------------------------------
# Whole-network planning


def test_plan_network_fixture_single_band():
    net = load_network(fixture_path("autoencoder.json"))
    calib = load_calibration(fixture_path("autoencoder_calib.csv"))
    plan = plan_network(net, DEV, calib=calib)
    assert plan.bands == 1
    assert sum(l.p_k for l in plan.layers) <= DEV.usable_width
    assert [l.name for l in plan.layers] == [l.name for l in net.layers]
    assert max(l.latency_cycles for l in plan.layers) == 135.0
    assert plan.target_met is True


def _wide_chain():
    return NetworkSpec(name="wide", layers=(
        _layer(1024, 16, name="a"), _layer(16, 1024, name="b"),
        _layer(1024, 16, name="c")))


def test_plan_network_shrinks_to_one_band():
    plan = plan_network(_wide_chain(), DEV)
    assert plan.bands == 1
    # capping layer a at 15 columns re-searches and lands on 13: q_k is 80
    # either way, so fewer columns means fewer cascade hops
    assert [l.p_k for l in plan.layers] == [13, 1, 16]
    assert sum(l.p_k for l in plan.layers) <= DEV.usable_width
    assert [l.latency_cycles for l in plan.layers] == [304.0, 416.0, 265.0]


def test_plan_network_multi_band_checks_row_budget():
    # two wide bands would stack 8 + 1 rows on an 8-row array
    with pytest.raises(InfeasibleError, match="rows"):
        plan_network(_wide_chain(), DEV, PlanConstraints(allow_multi_band=True))


def test_min_tiles_objective_spends_less_array():
    net = NetworkSpec(name="small", layers=(_layer(256, 16, name="enc"),
                                            _layer(16, 16, name="lat")),
                      target_throughput_hz=20e6)
    latency_plan = plan_network(net, DEV)
    thrifty_plan = plan_network(net, DEV, PlanConstraints(objective=OBJECTIVE_MIN_TILES))
    assert thrifty_plan.target_met is True
    tiles = lambda p: sum(l.p_k * l.p_n for l in p.layers)
    assert tiles(thrifty_plan) < tiles(latency_plan)
    assert latency_plan.throughput_hz >= thrifty_plan.throughput_hz


def test_min_tiles_objective_needs_a_target():
    net = NetworkSpec(name="no_target", layers=(_layer(64, 64),))
    with pytest.raises(ValidationError, match="target"):
        plan_network(net, DEV, PlanConstraints(objective=OBJECTIVE_MIN_TILES))


def test_min_tiles_gives_up_gracefully_when_target_unreachable():
    net = NetworkSpec(name="dream", layers=(_layer(256, 16, name="enc"),),
                      target_throughput_hz=1e12)
    plan = plan_network(net, DEV, PlanConstraints(objective=OBJECTIVE_MIN_TILES))
    assert plan.target_met is False


# ---------------------------------------------------------------------------
# Hybrid partitioning


def test_partition_all_fabric_when_fabric_dominates():
    net = NetworkSpec(name="n", layers=(_layer(64, 64, name="a"),
                                        _layer(64, 64, name="b"),
                                        _layer(64, 64, name="c")))
    res = hybrid_partition(net, DEV, [1e-9, 1e-9, 1e-9], [5e-9, 5e-9, 5e-9])
    assert res.domains == ("pl", "pl", "pl")
    assert res.crossings == 2 and res.penalty_factor == 1.0
    assert res.optimal


def test_partition_moves_binding_layer_to_array():
    net = NetworkSpec(name="n", layers=(_layer(64, 64, name="a"),
                                        _layer(64, 64, name="b"),
                                        _layer(64, 64, name="c")))
    # middle layer is 10x cheaper on the array; ends stay fabric-pinned
    res = hybrid_partition(net, DEV, [1e-9, 1e-8, 1e-9], [5e-8, 1e-9, 5e-8])
    assert res.domains == ("pl", "aie", "pl")
    assert res.crossings == 2
    assert res.base_interval_seconds == pytest.approx(1e-9)


def test_partition_respects_pins():
    net = NetworkSpec(name="n", layers=(_layer(64, 64, name="a"),
                                        _layer(64, 64, name="b")))
    res = hybrid_partition(net, DEV, [1e-9, 1e-9], [9e-9, 9e-9],
                           pins={0: "aie", 1: "aie"})
    assert res.domains == ("aie", "aie")


def test_partition_rejects_missing_costs():
    net = NetworkSpec(name="n", layers=(_layer(64, 64, name="a"),))
    with pytest.raises(ValidationError):
        hybrid_partition(net, DEV, [None], [1e-9], pins={0: "pl"})


def test_partition_crossings_match_walk():
    rng = np.random.default_rng(3)
    layers = tuple(_layer(64, 64, name=f"l{i}") for i in range(6))
    net = NetworkSpec(name="n", layers=layers)
    for _ in range(20):
        pl = [float(x) for x in rng.uniform(1e-9, 1e-7, 6)]
        aie = [float(x) for x in rng.uniform(1e-9, 1e-7, 6)]
        res = hybrid_partition(net, DEV, pl, aie)
        assert res.crossings == crossing_count(res.domains)
        assert res.penalized_interval_seconds == pytest.approx(
            res.base_interval_seconds * crossing_penalty_factor(res.crossings, res.rho))


def test_partition_matches_brute_force():
    rng = np.random.default_rng(11)
    for trial in range(10):
        size = int(rng.integers(2, 9))
        layers = tuple(_layer(64, 64, name=f"l{i}") for i in range(size))
        net = NetworkSpec(name="n", layers=layers)
        pl = [float(x) for x in rng.uniform(1e-9, 1e-7, size)]
        aie = [float(x) for x in rng.uniform(1e-9, 1e-7, size)]
        pins = {0: "pl", size - 1: "pl"} if size >= 2 else {0: "pl"}
        res = hybrid_partition(net, DEV, pl, aie, pins=pins)
        best = None
        for mask in range(2 ** size):
            domains = ["aie" if mask & (1 << i) else "pl" for i in range(size)]
            if any(domains[i] != d for i, d in pins.items()):
                continue
            base = max(pl[i] if d == "pl" else aie[i] for i, d in enumerate(domains))
            cost = base * crossing_penalty_factor(crossing_count(domains), res.rho)
            if best is None or cost < best:
                best = cost
        assert res.penalized_interval_seconds == pytest.approx(best)


def test_partition_costs_on_fixture():
    net = load_network(fixture_path("qubit.json"))
    calib = load_calibration(fixture_path("qubit_calib.csv"))
    pl, aie = partition_costs(net, DEV, DEV.pl_budget, "resource", calib=calib)
    assert pl == pytest.approx([8 * 25 / 312.5e6] * 3)
    assert aie == pytest.approx([134e-9, 131e-9, 91e-9])


def test_partition_costs_report_impossible_sides():
    net = NetworkSpec(name="n", layers=(_layer(8, 8, name="dust"),))
    pl, aie = partition_costs(net, DEV, DEV.pl_budget, "resource")
    assert aie == [None]          # below the smallest API block
    assert pl[0] is not None


def test_crossing_sensitivity_rows():
    rows = crossing_sensitivity(1e-6, 0.039)
    assert [c for c, _, _ in rows] == [2, 4, 6, 8, 10, 12, 14]
    assert rows[0][2] == 1e-6
    assert rows[-1][2] == pytest.approx(1e-6 * (1 + 0.039 * 12))
