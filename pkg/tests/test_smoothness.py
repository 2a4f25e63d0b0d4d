import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oversmooth.graph import generate, parse_generator
from oversmooth.smoothness import mad, measure, normalized_subspace_distance, row_col_diff, subspace_distance
from oversmooth.spectral import graph_spectrum, normalized_adjacency
from oversmooth.suites import connected_er


@pytest.fixture(scope="module")
def p3():
    return graph_spectrum(generate(parse_generator("path:3")))


class TestSubspaceDistance:
    def test_in_subspace(self, p3):
        assert subspace_distance(p3.basis, p3.basis) == pytest.approx(0, abs=1e-15)

    def test_orthogonal_columns(self, p3):
        h = np.column_stack([[1.0, 0.0, -1.0], [1.0, -np.sqrt(6) * 2 / 3, 1.0]])
        assert np.allclose(p3.basis.T @ h, 0, atol=1e-15)
        assert subspace_distance(h, p3.basis) == pytest.approx(np.linalg.norm(h), rel=1e-15)

    def test_projected_features(self, p3):
        x = np.random.default_rng(0).normal(size=(3, 4))
        assert subspace_distance(p3.projector.pi @ x, p3.basis) == pytest.approx(0, abs=1e-14)

    def test_dimension_mismatch(self, p3):
        with pytest.raises(ValueError, match="rows"):
            subspace_distance(np.ones((4, 2)), p3.basis)

    def test_vector_input(self, p3):
        assert subspace_distance(np.array([1.0, 0.0, -1.0]), p3.basis) == pytest.approx(np.sqrt(2))

    def test_normalized(self, p3):
        h = np.array([[1.0], [0.0], [-1.0]])
        assert normalized_subspace_distance(3 * h, p3.basis) == pytest.approx(1.0)
        assert normalized_subspace_distance(np.zeros((3, 2)), p3.basis) == 0.0


class TestMad:
    def test_identical_rows(self):
        assert mad(np.tile([1.0, 2.0, 3.0], (5, 1))) == pytest.approx(0, abs=1e-15)

    def test_orthogonal_pair(self):
        assert mad(np.eye(2)) == pytest.approx(1.0)

    def test_three_rows(self):
        assert mad(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])) == pytest.approx(2 / 3)

    def test_zero_rows_excluded(self):
        assert mad(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])) == pytest.approx(1.0)

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            mad(np.array([[1.0, 0.0], [0.0, 0.0]]))


class TestRowColDiff:
    def test_identical_rows(self):
        row, _ = row_col_diff(np.tile([0.3, -0.2], (6, 1)))
        assert row == 0.0

    def test_two_rows(self):
        row, _ = row_col_diff(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert row == pytest.approx(2.5)

    def test_proportional_columns(self):
        base = np.array([1.0, 2.0, 0.5, 3.0])
        _, col = row_col_diff(np.column_stack([base, 2 * base, 7 * base]))
        assert col == pytest.approx(0, abs=1e-15)

    def test_col_diff_enumeration(self):
        h = np.array([[1.0, 0.0], [0.0, 1.0]])
        # unit-L1 columns e1, e2: ordered pairs (a,b),(b,a) each at distance sqrt2
        _, col = row_col_diff(h)
        assert col == pytest.approx(2 * np.sqrt(2) / 4)

    def test_insufficient(self):
        with pytest.raises(ValueError):
            row_col_diff(np.ones((1, 3)))
        with pytest.raises(ValueError):
            row_col_diff(np.ones((3, 1)))


def test_measure_collapsed_layer(p3):
    rec = measure(np.zeros((3, 4)), p3.basis, 5)
    assert (rec.layer, rec.d_m, rec.mad, rec.row_diff, rec.col_diff) == (5, 0.0, 0.0, 0.0, 0.0)


def test_measure_single_channel(p3):
    rec = measure(np.array([1.0, 2.0, 3.0]), p3.basis, 0)
    assert rec.col_diff == 0.0 and rec.row_diff > 0


feats = arrays(np.float64, (12, 3), elements=st.floats(-5, 5))


@pytest.fixture(scope="module")
def er12():
    return graph_spectrum(connected_er(12, 0.3, 1))


@given(h=feats, c=st.floats(-20, 20))
@settings(max_examples=150, deadline=None)
def test_distance_properties(er12, h, c):
    e = er12.basis
    d = subspace_distance(h, e)
    assert d <= np.linalg.norm(h) * (1 + 1e-12) + 1e-300
    assert subspace_distance(c * h, e) == pytest.approx(abs(c) * d, rel=1e-9, abs=1e-12)


@given(h=feats)
@settings(max_examples=100, deadline=None)
def test_distance_equals_norm_iff_orthogonal(er12, h):
    e = er12.basis
    h_perp = h - e @ (e.T @ h)
    assert subspace_distance(h_perp, e) == pytest.approx(np.linalg.norm(h_perp), rel=1e-9, abs=1e-12)
    if np.linalg.norm(e.T @ h) > 1e-6:
        assert subspace_distance(h, e) < np.linalg.norm(h)


@given(h=feats, scale=arrays(np.float64, 12, elements=st.floats(0.01, 100)))
@settings(max_examples=100, deadline=None)
def test_mad_row_scale_invariant(h, scale):
    assume((np.linalg.norm(h, axis=1) > 1e-3).sum() >= 2)
    h = h * (np.linalg.norm(h, axis=1, keepdims=True) > 1e-3)
    assert mad(h * scale[:, None]) == pytest.approx(mad(h), abs=1e-9)


def test_linear_smoothing_contraction():
    """d_M(S^k X) <= lam^k d_M(X) over 100 random (graph, X, k) triples."""
    rng = np.random.default_rng(7)
    for t in range(100):
        g = connected_er(int(rng.integers(5, 30)), 0.3, int(rng.integers(1000)))
        sp = graph_spectrum(g)
        s = normalized_adjacency(g)
        x = rng.normal(size=(g.n, 3))
        k = int(rng.integers(1, 15))
        h = x
        for _ in range(k):
            h = s @ h
        assert subspace_distance(h, sp.basis) <= sp.lam**k * subspace_distance(x, sp.basis) * (1 + 1e-9) + 1e-13
