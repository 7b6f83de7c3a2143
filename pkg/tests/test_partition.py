import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pwsampling.graph import path_graph, random_connected_graph, star_graph
from pwsampling.partition import (
    InadmissiblePartitionError,
    Partition,
    SubsetChain,
    build_closure_partition,
    chain_constants,
    format_shells,
    load_shells,
    partition_constants,
    poincare_forward_check,
    poincare_support_on_S0_check,
    poincare_zero_on_S0_check,
    pruned_chain,
    reverse_check,
    shell_estimate_check,
    two_set_partition,
)


def test_star_constants_exact():
    g = star_graph(10)
    c = partition_constants(g, build_closure_partition(g, ["v0"]), 2)
    assert (c.K, c.D, c.delta, c.a) == ([1.0], [10.0], 1.0, math.sqrt(11))


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_path_from_endpoint(n):
    # one vertex per shell, all ratios D_m/K_m = 1
    g = path_graph(n + 1)
    P = build_closure_partition(g, ["0"])
    assert P.shells == tuple((str(m),) for m in range(n + 1))
    c2 = partition_constants(g, P, 2)
    assert c2.delta == pytest.approx(math.sqrt(n * (n + 1) / 2), rel=1e-12)
    assert c2.a == pytest.approx(math.sqrt(n + 1), rel=1e-12)
    assert partition_constants(g, P, 1).delta == pytest.approx(n)
    assert partition_constants(g, P, 1).a == pytest.approx(n + 1)
    ch = chain_constants(g, P, 2)
    assert ch.delta_hat == pytest.approx(math.sqrt(n * (n + 1) / 2), rel=1e-12)


def test_zero_on_S0_sharp_for_linear_ramp():
    # f(m) = m on a path, S_0 = {0}
    g = path_graph(2)
    P = build_closure_partition(g, ["0"])
    rec = poincare_zero_on_S0_check(g, P, np.array([0.0, 1.0]), 2)
    assert rec.lhs == 1.0 and rec.rhs == pytest.approx(math.sqrt(2))
    rec_inf = poincare_zero_on_S0_check(g, P, np.array([0.0, 1.0]), math.inf)
    assert rec_inf.lhs == rec_inf.rhs == 1.0


def test_inadmissible_partition_detected():
    g = path_graph(4)
    P = Partition.from_shells(g, [["0"], ["2"], ["1", "3"]])
    c = partition_constants(g, P, 2)
    assert not c.admissible and c.delta is None
    with pytest.raises(InadmissiblePartitionError):
        poincare_forward_check(g, P, np.ones(4))


@pytest.mark.parametrize(
    "shells, msg",
    [
        ([["0"], ["1"]], "does not cover"),
        ([["0"], []], "empty"),
        ([["0", "1"], ["1", "2", "3"]], "appears in shells"),
        ([["0"], ["9"]], "unknown vertex"),
    ],
)
def test_partition_validation(shells, msg):
    with pytest.raises(ValueError, match=msg):
        Partition.from_shells(path_graph(4), shells)


def test_chain_need_not_cover():
    g = path_graph(4)
    C = SubsetChain.from_shells(g, [["0"], ["1"]])
    assert C.n == 1 and chain_constants(g, C, 2).well_defined


def test_closure_partition_unreachable():
    g = path_graph(3)
    from pwsampling.graph import WeightedGraph

    h = WeightedGraph.from_edges([("a", "b", 1.0), ("c", "d", 1.0)])
    with pytest.raises(ValueError, match="unreachable"):
        build_closure_partition(h, ["a"])
    assert build_closure_partition(g, ["1"]).shells == (("1",), ("0", "2"))


def test_infinite_p_rejected_for_constants():
    g = path_graph(3)
    with pytest.raises(ValueError):
        partition_constants(g, build_closure_partition(g, ["0"]), math.inf)


def test_shells_file_round_trip():
    g = path_graph(5)
    P = build_closure_partition(g, ["2"])
    again = load_shells(io.StringIO("# shells\n" + format_shells(P)))
    assert Partition.from_shells(g, again).shells == P.shells


def test_support_check_needs_support_on_S0():
    g = path_graph(3)
    C = SubsetChain.from_shells(g, [["0"], ["1"]])
    with pytest.raises(ValueError):
        poincare_support_on_S0_check(g, C, np.array([1.0, 1.0, 0.0]))
    assert poincare_support_on_S0_check(g, C, np.array([1.0, 0.0, 0.0])).passed


def _instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 30))
    g = random_connected_graph(rng, n, edge_prob=float(rng.uniform(0.05, 0.4)), random_nu=bool(rng.integers(2)))
    S0 = [str(v) for v in rng.choice(n, size=int(rng.integers(1, max(2, n // 3))), replace=False)]
    P = build_closure_partition(g, S0)
    return rng, g, P


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_forward_reverse_and_shell_bounds(seed, p):
    rng, g, P = _instance(seed)
    f = rng.normal(size=g.n_vertices) * rng.uniform(0.1, 10)
    assert poincare_forward_check(g, P, f, p).passed
    for rec in shell_estimate_check(g, P, f, p):
        assert rec.passed, rec
    C = pruned_chain(g, P.shells)
    cc = chain_constants(g, C, p)
    assert cc.well_defined and all(k > 0 for k in cc.Khat)
    assert reverse_check(g, C, f, p).passed


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.sampled_from([1.0, 2.0, 3.0, math.inf]))
def test_zero_on_S0_bound(seed, p):
    rng, g, P = _instance(seed)
    f = rng.normal(size=g.n_vertices)
    f[P.idx[0]] = 0
    assert poincare_zero_on_S0_check(g, P, f, p).passed


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_constants_scale_invariant_under_joint_rescaling(seed):
    # multiplying w and nu by the same factor leaves D, K and delta unchanged
    rng, g, P = _instance(seed)
    from pwsampling.graph import WeightedGraph

    W = np.zeros((g.n_vertices,) * 2)
    W[g.edge_i, g.edge_j] = g.edge_w
    W = W + W.T
    h = WeightedGraph.from_dense(3.0 * W, nu=3.0 * g.nu, names=g.vertices)
    a, b = partition_constants(g, P, 2), partition_constants(h, Partition.from_shells(h, P.shells), 2)
    assert np.allclose(a.D, b.D) and np.allclose(a.K, b.K) and a.delta == pytest.approx(b.delta)


def test_two_set_partition():
    g = star_graph(3)
    P = two_set_partition(g, ["v1", "v2", "v3"])
    assert P.n == 1 and set(P.shells[1]) == {"v0"}
