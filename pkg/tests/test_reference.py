import math

import numpy as np
import pytest
import scipy.sparse.linalg
from hypothesis import given, settings, strategies as st

from lapconv.empirical import build_bundle
from lapconv.errors import DomainError
from lapconv.kernel import BallIndicator, Constant, TruncatedGaussian, degree_field
from lapconv.metric_space import Circle, Interval, sample_uniform
from lapconv.reference import circle_ball_spectrum, dense_grid_operator, m_range, match_reference
from lapconv.spectral import bundle_spectrum

TWO_PI = 2.0 * math.pi
R = math.pi / 4


def dense(kernel, space, grid, operator="T"):
    return dense_grid_operator(kernel, space, degree_field(kernel, space), grid, operator)


def test_closed_form_examples():
    s = circle_ball_spectrum(R, 3)
    assert s.eigenvalues[0] == 1.0 and s.multiplicities[0] == 1
    assert s.as_operator("Uprime").eigenvalues[0] == 0.0
    assert s.eigenvalues[2] == pytest.approx(2 / math.pi, abs=1e-15)
    assert list(s.multiplicities[1:]) == [2, 2, 2]
    assert circle_ball_spectrum(math.pi, 1).eigenvalues[1] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        circle_ball_spectrum(4.0, 2)
    with pytest.raises(DomainError):
        circle_ball_spectrum(0.0, 2)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, math.pi), st.integers(0, 30))
def test_uprime_is_one_minus_t(r, kmax):
    t = circle_ball_spectrum(r, kmax)
    u = t.as_operator("Uprime")
    assert np.array_equal(u.eigenvalues, 1.0 - t.eigenvalues)
    assert np.array_equal(u.as_operator("T").eigenvalues, 1.0 - u.eigenvalues)
    assert np.array_equal(u.multiplicities, t.multiplicities)


def test_closed_form_eigenfunctions_are_window_averages():
    # T_mu f(x) = (1 / 2r) int_{x-r}^{x+r} f, evaluated by high-order quadrature.
    s = circle_ball_spectrum(R, 4)
    x = np.linspace(0, TWO_PI, 13, endpoint=False)
    nodes, wts = np.polynomial.legendre.leggauss(40)
    for g, funcs in enumerate(s.eigenfunctions):
        for f in funcs:
            y = x[:, None] + R * nodes[None, :]
            avg = (f(np.mod(y, TWO_PI)) @ wts) / 2.0
            assert np.allclose(avg, s.eigenvalues[g] * f(x), atol=1e-12)


def test_dense_grid_constant_is_rank_one(circle):
    op = dense(Constant(1.0), circle, 64)
    w = np.linalg.eigvalsh(op.matrix)
    assert w[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(w[:-1])) <= 1e-12
    _, v = np.linalg.eigh(op.matrix)
    assert np.ptp(v[:, -1]) <= 1e-12


def test_dense_grid_variants_consistent(circle):
    k = BallIndicator(R)
    t, u, up = (dense(k, circle, 256, op) for op in ("T", "U", "Uprime"))
    assert np.allclose(up.matrix, np.eye(256) - t.matrix, atol=1e-15)
    assert np.allclose(u.matrix, np.diag(t.m_values) - t.matrix, atol=1e-15)
    assert np.allclose(t.m_values, 1.0, atol=1e-12)
    assert np.array_equal(t.matrix, t.matrix.T)


def test_dense_grid_matches_closed_form_at_2048(circle):
    op = dense(BallIndicator(R), circle, 2048)
    w = np.sort(np.linalg.eigvalsh(op.matrix))[::-1]
    ref = circle_ball_spectrum(R, 2)
    assert w[1] == pytest.approx(ref.eigenvalues[1], abs=1e-4)
    assert w[3] == pytest.approx(ref.eigenvalues[2], abs=1e-4)


def test_dense_grid_kappa_two_to_1e6(circle):
    # The quadrature error is O(h^2): about 2e-6 at 2048 nodes, 5e-7 at 4096.
    op = dense(BallIndicator(R), circle, 4096)
    v0 = np.ones(4096) + np.cos(np.arange(4096))
    w = np.sort(scipy.sparse.linalg.eigsh(op.matrix, k=5, which="LA", tol=0, v0=v0)[0])[::-1]
    assert abs(w[3] - 2 / math.pi) <= 1e-6 and abs(w[4] - 2 / math.pi) <= 1e-6


def test_dense_grid_doubling_top_five(circle):
    k = BallIndicator(R)
    tops = []
    for grid in (4096, 8192):
        op = dense(k, circle, grid)
        v0 = np.ones(grid) + np.cos(np.arange(grid))
        tops.append(np.sort(scipy.sparse.linalg.eigsh(op.matrix, k=5, which="LA", tol=0, v0=v0)[0]))
        del op
    assert np.max(np.abs(tops[0] - tops[1])) <= 1e-6


def test_dense_grid_applies_to_cosines(circle):
    op = dense(BallIndicator(R), circle, 2048)
    for kappa in range(1, 6):
        c = np.cos(kappa * op.nodes)
        lam = math.sin(kappa * R) / (kappa * R)
        assert np.max(np.abs(op.apply(c) - lam * c)) <= 5e-4


def test_dense_grid_multiplicities(circle):
    op = dense(BallIndicator(R), circle, 2048)
    w = np.linalg.eigvalsh(op.matrix)
    for kappa in (1, 2, 3, 5, 6):
        lam = math.sin(kappa * R) / (kappa * R)
        # closed-form value of this frequency is shared by no other frequency below Nyquist
        assert np.count_nonzero(np.abs(w - lam) <= 1e-4) == 2


def test_m_range_examples(circle):
    assert m_range(Constant(1.0), circle, degree_field(Constant(1.0), circle), 64) == pytest.approx((1.0, 1.0))
    lo, hi = m_range(BallIndicator(R), circle, degree_field(BallIndicator(R), circle), 512)
    assert abs(lo - 1) <= 1e-9 and abs(hi - 1) <= 1e-9
    k = TruncatedGaussian(0.05, 0.3)
    lo, hi = m_range(k, Interval(1.0), degree_field(k, Interval(1.0), 1024), 1024)
    assert lo < hi
    with pytest.raises(DomainError):
        m_range(k, Interval(1.0), degree_field(k, Interval(1.0)), 1)


def test_match_reference_on_sample(circle, ball):
    b = build_bundle(ball, sample_uniform(circle, 2048, 0))
    s = bundle_spectrum(b)
    rows = match_reference(s, circle_ball_spectrum(R, 8, "Uprime"), b.X)
    assert [r["frequency"] for r in rows][:3] == [0, 1, 2]
    assert rows[1]["max_abs_error"] <= 0.05
    assert rows[1]["max_principal_angle"] < 0.5
    with pytest.raises(DomainError):
        match_reference(s, circle_ball_spectrum(R, 8, "T"))
