import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad_vec
from scipy.linalg import expm

from conftest import connected_graphs, graphs_with_leaders
from leadersel.errors import (
    DemotedReselected,
    InvalidVertex,
    NotASubset,
    PoleEvaluation,
    SizeMismatch,
)
from leadersel.graph import build_graph, derive_matrices
from leadersel.system import (
    assignment_from_sets,
    build_input_matrix,
    gramian_spectral_oracle,
    in_selection_set,
    observability_gramian,
    parse_leader_config,
    transfer_eval,
    transfer_eval_dense,
    transfer_eval_many,
)

P2 = build_graph(2, [(1, 2)])


def test_input_matrices_six_vertex_example():
    a = assignment_from_sets(6, [1, 4, 5], [4], [2, 6])
    M = build_input_matrix(a, "original")
    Mt = build_input_matrix(a, "new")
    expected_M = np.zeros((6, 3))
    expected_M[[0, 3, 4], [0, 1, 2]] = 1
    expected_Mt = np.zeros((6, 3))
    expected_Mt[[1, 5], [0, 2]] = 1
    assert np.array_equal(M, expected_M)
    assert np.array_equal(Mt, expected_Mt)
    assert a.zero_columns == (1,)
    assert a.new_leaders == (2, None, 6)
    assert a.mismatches == 2
    assert in_selection_set(Mt, a.zero_columns)


def test_labeling_fills_positions_in_order():
    a = assignment_from_sets(5, [1, 2, 3], [2], [5, 1])
    assert a.new_leaders == (1, None, 5)
    assert a.mismatches == 1
    assert a.to_dict() == {"leaders": [1, 2, 3], "demoted": [2], "new_leaders": [1, 5]}


@pytest.mark.parametrize(
    "leaders, demoted, new, exc",
    [
        ([1, 2, 3], [4], [1, 2], NotASubset),
        ([1, 2, 3], [1], [1, 2], DemotedReselected),
        ([1, 2, 3], [1], [2], SizeMismatch),
        ([1, 2, 3], [1], [2, 9], InvalidVertex),
        ([1, 1, 3], [], [1, 2, 3], SizeMismatch),
        ([], [], [], SizeMismatch),
    ],
)
def test_assignment_errors(leaders, demoted, new, exc):
    with pytest.raises(exc):
        assignment_from_sets(5, leaders, demoted, new)


def test_selection_set_membership():
    J = [1]
    good = np.zeros((4, 3))
    good[0, 0] = good[3, 2] = 1
    assert in_selection_set(good, J)
    bad = good.copy()
    bad[2, 1] = 1  # demoted column not zero
    assert not in_selection_set(bad, J)
    dup = good.copy()
    dup[:, 2] = 0
    dup[0, 2] = 1  # repeated vertex
    assert not in_selection_set(dup, J)
    frac = good * 0.5
    assert not in_selection_set(frac, J)


def test_gramian_two_vertices():
    assert np.allclose(observability_gramian(2), [[0.25, -0.25], [-0.25, 0.25]])


def test_gramian_matches_time_integral(example_matrices):
    L = example_matrices.L
    val, err = quad_vec(lambda t: expm(-L * t) @ L @ expm(-L * t), 0, np.inf, epsabs=1e-11)
    assert np.allclose(val, observability_gramian(5), atol=1e-8)


@given(connected_graphs(n_max=10))
def test_gramian_closed_form_vs_spectral(g):
    gm = derive_matrices(g)
    Wo = observability_gramian(g.n)
    assert np.abs(Wo - gramian_spectral_oracle(gm.L)).max() <= 1e-8
    lam = np.linalg.eigvalsh(Wo)
    assert abs(lam[0]) <= 1e-9
    assert np.allclose(lam[1:], 0.5, atol=1e-9)
    assert np.allclose(Wo @ np.ones(g.n), 0.0, atol=1e-12)


def test_transfer_two_vertices_closed_form():
    gm = derive_matrices(P2)
    M = np.array([[1.0], [0.0]])
    for s in [0, 1.0, 2.5j, -1.0 + 3j, 100.0]:
        assert np.allclose(transfer_eval(gm, M, s), [[1 / (s + 2)]], atol=1e-14)


def test_transfer_pole_raises():
    gm = derive_matrices(P2)
    with pytest.raises(PoleEvaluation):
        transfer_eval(gm, np.array([[1.0], [0.0]]), -2.0)


def test_transfer_example_pole(example_matrices):
    gm = example_matrices
    lam = gm.spectrum.eigvals[2]
    with pytest.raises(PoleEvaluation):
        transfer_eval(gm, np.eye(5)[:, :3], -lam)


@given(graphs_with_leaders(), st.floats(-50, 50), st.floats(0.01, 50))
def test_transfer_spectral_vs_dense(case, re, im):
    g, leaders, _ = case
    gm = derive_matrices(g)
    M = build_input_matrix(assignment_from_sets(g.n, leaders, [], leaders))
    for s in (0.0, complex(re, im), complex(0, im)):
        a = transfer_eval(gm, M, s)
        b = transfer_eval_dense(gm, M, s)
        assert np.allclose(a, b, atol=1e-10 * (1 + np.abs(b).max()))


@given(graphs_with_leaders(), st.floats(0.01, 100))
def test_transfer_conjugate_symmetry(case, w):
    g, leaders, _ = case
    gm = derive_matrices(g)
    M = build_input_matrix(assignment_from_sets(g.n, leaders, [], leaders))
    G = transfer_eval_many(gm, M, np.array([1j * w, -1j * w]))
    assert np.allclose(G[1], np.conj(G[0]), atol=1e-13)


@given(graphs_with_leaders(), st.data())
def test_transfer_frobenius_ignores_orientation(case, data):
    g, leaders, _ = case
    flips = data.draw(st.sets(st.integers(0, g.k - 1)))
    M = build_input_matrix(assignment_from_sets(g.n, leaders, [], leaders))
    s = 0.7j
    a = transfer_eval(derive_matrices(g), M, s)
    b = transfer_eval(derive_matrices(g.flipped(flips)), M, s)
    assert np.isclose(np.linalg.norm(a), np.linalg.norm(b), rtol=1e-12)


def test_parse_leader_config():
    cfg = parse_leader_config('{"leaders": [3, 1, 2], "demoted": [1]}', 5)
    assert cfg == {"leaders": [1, 2, 3], "demoted": [1], "new_leaders": None}
    with pytest.raises(InvalidVertex):
        parse_leader_config('{"leaders": [7]}', 5)
