import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfingerprint import linalg as la
from qfingerprint import width as w
from qfingerprint.errors import ConsistencyError, DecompositionMismatch, InvalidConfig, NotSquare
from qfingerprint.zoo import first_column_ones, ip_matrix, random_boolean_matrix


def boolean_family(L, M, seed, density=0.5):
    rng = np.random.default_rng(seed)
    return (rng.random((L, M, M)) < density).astype(np.uint8)


families = st.builds(
    boolean_family,
    L=st.integers(1, 8),
    M=st.integers(1, 8),
    seed=st.integers(0, 2**32 - 1),
    density=st.floats(0, 1),
)


# -- decomposition_widths / generators ---------------------------------------


@pytest.mark.parametrize("M", [1, 4, 9])
def test_trivial_widths_of_identity(M):
    assert w.decomposition_widths(w.trivial_decomposition(np.eye(M))) == (1.0, 1.0, 1.0)


def test_trivial_widths_of_ones():
    d = w.trivial_decomposition(np.ones((4, 4)))
    assert d.rw == 1
    assert d.cw == pytest.approx(2) and d.rcw == pytest.approx(2)


def test_first_column_ones_rank_one_factorization():
    M = 8
    Q = first_column_ones(M)
    E = np.ones((M, 1))
    F = np.zeros((1, M))
    F[0, 0] = 1
    d = w.Decomposition(Q, E, F)
    assert (d.rw, d.cw) == (1.0, 1.0)
    assert d.rcw <= 1


def test_trivial_random_family_bounded_by_sqrt_m():
    d = w.trivial_decomposition(boolean_family(4, 8, seed=3))
    assert d.rw == 1
    assert d.rcw <= math.sqrt(8) + 1e-12


@settings(max_examples=40, deadline=None)
@given(families)
def test_trivial_cw_formula(family):
    # cw^2 is the mean over l of the largest column sum
    d = w.trivial_decomposition(family)
    expected = math.sqrt(np.mean(family.sum(axis=1).max(axis=1)))
    assert d.cw == pytest.approx(expected, abs=1e-12)
    assert d.rcw <= math.sqrt(family.shape[1]) + 1e-12


def test_svd_decomposition_examples():
    d = w.svd_decomposition(np.eye(5))
    assert d.rcw == pytest.approx(1)
    # J = 4 u u^T with u = 1/2: E = 2u, F = 2u^T, rn(E) = cn(F) = 1
    dj = w.svd_decomposition(np.ones((4, 4)))
    assert dj.rw == pytest.approx(1) and dj.cw == pytest.approx(1)
    assert dj.rcw <= 4


@settings(max_examples=40, deadline=None)
@given(families)
def test_generators_reconstruct(family):
    for gen in (w.trivial_decomposition, w.svd_decomposition):
        d = gen(family)
        assert np.abs(d.E @ d.F - family).max() <= 1e-8
        assert d.K <= d.M**2
        assert d.rcw == pytest.approx(d.rw * d.cw)


@settings(max_examples=40, deadline=None)
@given(families)
def test_svd_rcw_bounded_by_operator_norm(family):
    d = w.svd_decomposition(family)
    assert d.rcw <= max(la.operator_norm(D) for D in family) + 1e-8


def test_decomposition_rejects_bad_factors():
    D = np.eye(3)
    with pytest.raises(DecompositionMismatch):
        w.Decomposition(D, np.eye(3), 2 * np.eye(3))
    with pytest.raises(DecompositionMismatch):
        w.Decomposition(D, np.eye(3)[:, :2], np.eye(3))
    with pytest.raises(DecompositionMismatch):
        w.Decomposition([D, D], [np.eye(3)], [D])
    with pytest.raises(DecompositionMismatch):
        w.Decomposition(np.ones((1, 1)), np.ones((1, 2)), np.full((2, 1), 0.5))
    with pytest.raises(NotSquare):
        w.trivial_decomposition(np.ones((2, 3)))


# -- cyclic / convex width ---------------------------------------------------


def test_cyclic_small_example():
    D = np.array([[1, 1], [1, 0]])
    cd = w.cyclic_diagonal_decomposition(D)
    assert cd.W == 2
    np.testing.assert_array_equal(cd.G[0], np.diag([1, 0]))
    np.testing.assert_array_equal(cd.G[1], np.diag([1, 1]))
    np.testing.assert_array_equal(cd.P[0], np.eye(2))
    np.testing.assert_array_equal(cd.P[1], [[0, 1], [1, 0]])
    np.testing.assert_array_equal(cd.G[0] @ cd.P[0], [[1, 0], [0, 0]])
    np.testing.assert_array_equal(cd.G[1] @ cd.P[1], [[0, 1], [1, 0]])
    assert w.validate_convw(D, cd)


def test_cyclic_identity_has_one_nonzero_term():
    cd = w.cyclic_diagonal_decomposition(np.eye(5))
    assert cd.W == 5
    np.testing.assert_array_equal(cd.G[0], np.eye(5))
    assert all(not G.any() for G in cd.G[1:])


@pytest.mark.parametrize("seed", range(10))
def test_cyclic_validates_and_reconstructs_exactly(seed):
    D = random_boolean_matrix(7, 0.5, seed)
    cd = w.cyclic_diagonal_decomposition(D)
    assert w.validate_convw(D, cd).ok
    total = sum(G @ P for G, P in zip(cd.G, cd.P))
    np.testing.assert_array_equal(total, D)


def test_cyclic_requires_square():
    with pytest.raises(NotSquare):
        w.cyclic_diagonal_decomposition(np.ones((2, 3)))


def test_validate_convw_failures():
    D = np.eye(2)
    ok = w.ConvwDecomposition([np.eye(2)], [np.eye(2)])
    assert w.validate_convw(D, ok).ok

    neg = np.array([[1.0, -0.5], [-0.5, 1.0]])  # PSD but negative entries
    assert w.validate_convw(neg @ np.eye(2), w.ConvwDecomposition([neg], [np.eye(2)])).reason == (
        "NonNegativity"
    )
    dup = np.array([[1, 1], [0, 0]])
    assert w.validate_convw(D, w.ConvwDecomposition([np.eye(2)], [dup])).reason == "NotPermutation"
    asym = np.array([[1.0, 1.0], [0.0, 1.0]])
    assert w.validate_convw(D, w.ConvwDecomposition([asym], [np.eye(2)])).reason == "NotSymmetric"
    notpsd = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert w.validate_convw(D, w.ConvwDecomposition([notpsd], [np.eye(2)])).reason == "NotPSD"
    assert w.validate_convw(D, w.ConvwDecomposition([2 * np.eye(2)], [np.eye(2)])).reason == (
        "Reconstruction"
    )


def test_convw_to_rcw_identity():
    d = w.convw_to_rcw(np.eye(4), w.cyclic_diagonal_decomposition(np.eye(4)))
    assert d.rcw <= 1 + 1e-12
    assert d.K == 16


def test_convw_to_rcw_rejects_invalid():
    with pytest.raises(DecompositionMismatch):
        w.convw_to_rcw(np.eye(2), w.ConvwDecomposition([2 * np.eye(2)], [np.eye(2)]))


@pytest.mark.parametrize("seed", range(10))
def test_convw_blocks_have_sqrt_max_norms(seed):
    rng = np.random.default_rng(seed)
    M = 6
    G = np.diag((rng.random(M) < 0.5).astype(float))
    P = w.cyclic_shift(M, int(rng.integers(M)))
    d = w.convw_to_rcw(G @ P, w.ConvwDecomposition([G], [P]))
    expected = math.sqrt(G.max())
    assert la.row_norm(d.E[0]) == pytest.approx(expected)
    assert la.column_norm(d.F[0]) == pytest.approx(expected)


@pytest.mark.parametrize("seed", range(5))
def test_convw_to_rcw_random_6x6(seed):
    D = random_boolean_matrix(6, 0.5, seed)
    d = w.convw_to_rcw(D, w.cyclic_diagonal_decomposition(D))
    assert la.row_norm(d.E[0]) <= math.sqrt(6) + 1e-8
    assert la.column_norm(d.F[0]) <= math.sqrt(6) + 1e-8
    assert d.rcw <= 6 + 1e-8
    # diagonal boolean blocks: rn(E)^2 is the largest row sum, cn(F)^2 the largest column sum
    assert d.rw == pytest.approx(math.sqrt(D.sum(axis=1).max()))
    assert d.cw == pytest.approx(math.sqrt(D.sum(axis=0).max()))
    assert d.rcw >= w.trivial_decomposition(D).rcw - 1e-9


# -- balancing ---------------------------------------------------------------


def test_balance_leaves_identity():
    d = w.balance_decomposition(w.svd_decomposition(np.eye(3)))
    assert d.rcw == pytest.approx(1)


def test_balance_one_by_one():
    d = w.Decomposition(np.ones((1, 1)), [[2.0]], [[0.5]])
    b = w.balance_decomposition(d)
    assert b.E[0, 0, 0] == pytest.approx(1) and b.F[0, 0, 0] == pytest.approx(1)
    assert b.rcw <= 1 + 1e-12


def test_balance_family_scalar_freedom():
    # two coins with wildly unbalanced scalings; balancing must recover mean(rn*cn)
    D = np.stack([np.eye(2), np.eye(2)])
    E = np.stack([4 * np.eye(2), np.eye(2)])
    F = np.stack([np.eye(2) / 4, np.eye(2)])
    d = w.Decomposition(D, E, F)
    assert d.rcw > 1.5
    assert w.balance_decomposition(d).rcw == pytest.approx(1)


@pytest.mark.parametrize("seed", range(5))
def test_balance_trace_is_monotone(seed):
    rng = np.random.default_rng(seed)
    D = random_boolean_matrix(4, 0.5, seed)
    base = w.svd_decomposition(D)
    S = np.diag(np.exp(rng.normal(size=4)))
    d = w.Decomposition(D, base.E[0] @ S, np.linalg.inv(S) @ base.F[0])
    history = []
    b = w.balance_decomposition(d, history=history)
    assert all(a >= c for a, c in zip(history, history[1:]))
    assert b.rcw <= d.rcw + 1e-9
    assert np.abs(b.E @ b.F - d.family).max() <= 1e-8


# -- lower bounds ------------------------------------------------------------


def test_rcw_lower_bound_examples():
    assert w.rcw_lower_bound(np.eye(6)) == pytest.approx(1)
    M = 16
    assert w.rcw_lower_bound(first_column_ones(M)) == pytest.approx(1 / math.sqrt(M))
    assert w.rcw_lower_bound(ip_matrix(2)) >= 0.5


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_holder_chain_on_generated_decompositions(M, seed):
    D = random_boolean_matrix(M, 0.5, seed)
    for d in (
        w.trivial_decomposition(D),
        w.svd_decomposition(D),
        w.convw_to_rcw(D, w.cyclic_diagonal_decomposition(D)),
    ):
        tn, fro, top = w.holder_chain(d)
        assert tn <= fro + 1e-6 and fro <= top + 1e-6
        assert w.rcw_lower_bound(D) <= d.rcw + 1e-6


def test_ip_lower_bound_check_n2():
    rep = w.ip_lower_bound_check(2)
    assert rep.M == 4
    assert rep.trace_norm_signed == pytest.approx(8)
    assert rep.trace_norm_ip_floor == pytest.approx(2)
    assert rep.sqrt_bound == pytest.approx(0.5)
    assert rep.rcw_lower_bound >= 0.5


def test_ip_lower_bound_check_n1_and_n3():
    r1 = w.ip_lower_bound_check(1)
    np.testing.assert_allclose(la.singular_values(np.array([[1, 1], [1, -1]])), [math.sqrt(2)] * 2)
    assert r1.trace_norm_signed == pytest.approx(2 * math.sqrt(2))
    r3 = w.ip_lower_bound_check(3)
    assert r3.rcw_lower_bound >= (math.sqrt(8) - 1) / 2 - 1e-9
    assert r3.trace_norm_ip == pytest.approx(4 + 6 * math.sqrt(2))


def test_ip_lower_bound_check_range():
    with pytest.raises(InvalidConfig):
        w.ip_lower_bound_check(8)


# -- report ------------------------------------------------------------------


def test_width_report_identity():
    rep = w.width_report(np.eye(6))
    assert rep.best_rcw_upper == pytest.approx(1)
    assert rep.lower_bound_trace == pytest.approx(1)
    assert rep.rank == 6


@pytest.mark.parametrize("M", [2, 4, 8])
def test_width_report_first_column_ones(M):
    rep = w.width_report(first_column_ones(M))
    assert rep.best_rcw_upper <= 1 + 1e-8
    assert rep.rank == 1


def test_width_report_ip_n2():
    rep = w.width_report(ip_matrix(2))
    assert rep.best_rcw_upper <= 2
    assert rep.lower_bound_trace >= 0.5
    assert rep.lower_bound_trace <= rep.best_rcw_upper + 1e-6


def test_width_report_family():
    fam = boolean_family(3, 5, seed=1)
    rep = w.width_report(fam)
    assert rep.L == 3 and rep.rank is None and rep.lower_bound_trace is None
    assert "cyclic" not in rep.bounds
    assert rep.best_rcw_upper <= math.sqrt(5) + 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_width_report_rank_observation(seed):
    D = random_boolean_matrix(6, 0.3, seed)
    rep = w.width_report(D)
    if rep.rank:
        assert rep.rank_observation_holds


def test_width_report_consistency_error(monkeypatch):
    monkeypatch.setattr(w, "rcw_lower_bound", lambda D: 1e9)
    with pytest.raises(ConsistencyError):
        w.width_report(np.eye(3))


def test_width_report_json_and_certificates(tmp_path):
    import json

    rep = w.width_report(ip_matrix(2))
    refs = rep.save_certificates(tmp_path)
    data = json.loads(rep.to_json(refs))
    assert data["M"] == 4 and data["rank"] == 3
    assert set(data["bounds"]) == set(rep.bounds)
    E = la.load_matrix(refs["svd"][0])
    F = la.load_matrix(refs["svd"][1])
    np.testing.assert_allclose(E @ F, ip_matrix(2), atol=1e-8)
