"""Graphs, Laplacians, gossip matrices, and their spectral validation."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxgossip.errors import InvalidArgumentError
from proxgossip.topology import (TOPOLOGY_KINDS, Graph, MixingMatrix,
                                 build_graph, laplacian, mixing_matrix,
                                 validate_mixing)

ALL_KINDS = ("complete", "ring", "star", "disconnected")


# ---------------------------------------------------------------------------
# build_graph
# ---------------------------------------------------------------------------

def test_complete_6_has_15_edges():
    g = build_graph("complete", 6)
    assert len(g.edges) == 15  # 6*5/2


def test_disconnected_6_has_no_edges():
    g = build_graph("disconnected", 6)
    assert len(g.edges) == 0


def test_star_6_degrees():
    g = build_graph("star", 6)
    assert sorted(g.degrees(), reverse=True) == [5, 1, 1, 1, 1, 1]
    # hub is agent 0
    assert g.degrees()[0] == 5


def test_ring_degrees_and_edge_count():
    g = build_graph("ring", 7)
    assert len(g.edges) == 7
    assert all(d == 2 for d in g.degrees())


def test_edges_have_no_self_loops_or_duplicates():
    for kind in ALL_KINDS:
        g = build_graph(kind, 8)
        assert all(i != j for i, j in g.edges)
        assert len(g.edges) == len({tuple(sorted(e)) for e in g.edges})


def test_build_graph_rejects_small_n():
    with pytest.raises(InvalidArgumentError):
        build_graph("complete", 1)
    with pytest.raises(InvalidArgumentError):
        build_graph("ring", 2)
    with pytest.raises(InvalidArgumentError):
        build_graph("nonsense", 4)


# ---------------------------------------------------------------------------
# laplacian
# ---------------------------------------------------------------------------

def test_ring4_laplacian_diagonal_and_spectrum():
    lap = laplacian(build_graph("ring", 4))
    assert np.allclose(np.diag(lap), 2.0)
    # spectrum of the 4-cycle Laplacian: {0, 2, 2, 4}
    eig = np.sort(np.linalg.eigvalsh(lap))
    np.testing.assert_allclose(eig, [0.0, 2.0, 2.0, 4.0], atol=1e-12)


def test_disconnected_laplacian_is_zero():
    lap = laplacian(build_graph("disconnected", 6))
    assert np.array_equal(lap, np.zeros((6, 6)))


def test_complete3_laplacian_matrix():
    lap = laplacian(build_graph("complete", 3))
    expected = np.array([[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]])
    assert np.array_equal(lap, expected)


def test_laplacian_is_psd_with_zero_row_sums():
    for kind in ALL_KINDS:
        lap = laplacian(build_graph(kind, 9))
        assert np.allclose(lap, lap.T)
        assert np.max(np.abs(lap @ np.ones(9))) <= 1e-12
        assert np.min(np.linalg.eigvalsh(lap)) >= -1e-12


# ---------------------------------------------------------------------------
# mixing_matrix
# ---------------------------------------------------------------------------

def test_complete6_sixth_is_uniform_averaging():
    m = mixing_matrix(build_graph("complete", 6), 1.0 / 6.0)
    np.testing.assert_allclose(m.w, np.full((6, 6), 1.0 / 6.0), atol=1e-15)
    assert m.rho <= 1e-12  # spectrum {1, 0 x5}


def test_ring4_quarter_spectrum():
    m = mixing_matrix(build_graph("ring", 4), 0.25)
    # W eigenvalues 1 - lambda_L/4 for lambda_L in {0, 2, 2, 4}: {1, .5, .5, 0}
    assert abs(m.rho - 0.5) <= 1e-12
    assert abs(m.lambda_min - 0.0) <= 1e-12
    row = m.w[0]
    np.testing.assert_allclose(sorted(row), [0.0, 0.25, 0.25, 0.5], atol=1e-15)


def test_disconnected_is_identity_for_any_delta():
    for delta in (None, 0.1, 7.0):
        m = mixing_matrix(build_graph("disconnected", 6), delta)
        assert np.array_equal(m.w, np.eye(6))
        assert m.rho == 1.0
        assert m.lambda_min == 1.0


def test_default_delta_is_midpoint_of_admissible_interval():
    g = build_graph("complete", 5)
    lam_max = float(np.linalg.eigvalsh(laplacian(g))[-1])
    m = mixing_matrix(g)
    assert m.delta == pytest.approx(1.0 / lam_max, rel=1e-12)


def test_delta_outside_interval_rejected_with_named_interval():
    g = build_graph("complete", 4)  # lambda_max = 4, admissible (0, 0.5)
    for bad in (0.0, -0.1, 0.5, 0.6):
        with pytest.raises(InvalidArgumentError, match="interval"):
            mixing_matrix(g, bad)
    mixing_matrix(g, 0.49)  # strictly inside: accepted


def test_star_mixing_support_matches_edges():
    m = mixing_matrix(build_graph("star", 5))
    w = m.w
    # spokes talk only to the hub and themselves
    off = w - np.diag(np.diag(w))
    for i in range(1, 5):
        for j in range(1, 5):
            if i != j:
                assert off[i, j] == 0.0
    assert all(w[0, j] > 0 for j in range(5))


# ---------------------------------------------------------------------------
# validate_mixing
# ---------------------------------------------------------------------------

def test_validate_complete6_all_pass():
    report = validate_mixing(mixing_matrix(build_graph("complete", 6), 1.0 / 6.0))
    assert report.passed
    assert not report.non_contracting
    assert all(ok for ok, _ in report.checks.values())


def test_validate_flags_hand_built_asymmetry():
    g = build_graph("complete", 2)
    w = np.array([[0.6, 0.4], [0.5, 0.5]])
    m = MixingMatrix(w=w, rho=0.1, lambda_min=0.1, delta=0.5, graph=g)
    report = validate_mixing(m)
    assert not report.checks["symmetry"][0]
    assert not report.passed


def test_validate_disconnected_reports_non_contracting():
    report = validate_mixing(mixing_matrix(build_graph("disconnected", 6), 0.1))
    assert report.non_contracting
    assert any("non-contracting" in line for line in report.lines())


def test_validate_notes_repeated_eigenvalues_for_ring():
    report = validate_mixing(mixing_matrix(build_graph("ring", 4), 0.25))
    assert report.repeated_eigenvalues
    assert any("repeated eigenvalues" in line for line in report.lines())


# ---------------------------------------------------------------------------
# invariants over every built matrix
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("n", [4, 6, 20, 30])
def test_symmetry_and_double_stochasticity(kind, n):
    m = mixing_matrix(build_graph(kind, n))
    w = m.w
    assert np.max(np.abs(w - w.T)) <= 1e-12
    assert np.max(np.abs(w @ np.ones(n) - 1.0)) <= 1e-12
    assert np.max(np.abs(w.T @ np.ones(n) - 1.0)) <= 1e-12
    assert np.min(w) >= -1e-12


@pytest.mark.parametrize("kind", ["complete", "ring", "star"])
def test_connected_kinds_have_positive_spectral_gap(kind):
    m = mixing_matrix(build_graph(kind, 12))
    assert m.rho < 1.0
    assert 1.0 - m.rho > 0.0


def test_power_contraction_on_mean_zero_vectors():
    rng = np.random.default_rng(7)
    for kind in ("complete", "ring", "star"):
        m = mixing_matrix(build_graph(kind, 10))
        v = rng.standard_normal(10)
        v -= v.mean()
        nv = np.linalg.norm(v)
        w_k = np.eye(10)
        for k in range(1, 51):
            w_k = w_k @ m.w
            assert np.linalg.norm(w_k @ v) <= m.rho**k * nv + 1e-10


def test_gossip_preserves_averages():
    rng = np.random.default_rng(3)
    for kind in ALL_KINDS:
        m = mixing_matrix(build_graph(kind, 8))
        x = rng.standard_normal((8, 3))
        np.testing.assert_allclose((m.w @ x).mean(axis=0), x.mean(axis=0),
                                   atol=1e-12)


def test_top_eigenvector_is_all_ones():
    for kind in ALL_KINDS:
        m = mixing_matrix(build_graph(kind, 9))
        ones = np.ones(9)
        np.testing.assert_allclose(m.w @ ones, ones, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(ALL_KINDS), n=st.integers(min_value=3, max_value=40))
def test_property_every_built_matrix_is_valid(kind, n):
    m = mixing_matrix(build_graph(kind, n))
    report = validate_mixing(m)
    assert report.passed
    # contraction iff the graph is connected
    if kind == "disconnected":
        assert m.rho >= 1.0 - 1e-12
    else:
        assert m.rho < 1.0
    assert -1.0 < m.lambda_min <= 1.0 + 1e-12


def test_graph_dataclass_is_immutable():
    g = build_graph("ring", 5)
    with pytest.raises(AttributeError):
        g.n_agents = 9
    assert isinstance(g, Graph)
    assert set(TOPOLOGY_KINDS) == set(ALL_KINDS)
