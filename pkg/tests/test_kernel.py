import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapconv.errors import ConfigError, DegenerateDegreeError
from lapconv.kernel import (BallIndicator, Constant, Gaussian, TruncatedGaussian, degree, degree_field,
                            evaluate, h_kernel, kernel_from_dict, kernel_matrix, m_function,
                            modulus_estimate, verify_membership)
from lapconv.metric_space import Circle, Interval, Torus2, ball_measure, make_rng, sample_uniform

TWO_PI = 2.0 * math.pi

KERNELS = [
    BallIndicator(0.5),
    Gaussian(0.1),
    TruncatedGaussian(0.1, 0.4),
    Constant(0.7),
]


def test_eval_examples():
    iv = Interval(1.0)
    assert evaluate(BallIndicator(0.5), iv, 0.1, 0.4) == 1.0
    assert evaluate(BallIndicator(0.5), iv, 0.1, 0.8) == 0.0
    assert evaluate(Gaussian(0.3), iv, 0.25, 0.25) == 1.0


def test_ball_is_open():
    iv = Interval(1.0)
    assert evaluate(BallIndicator(0.25), iv, 0.25, 0.5) == 0.0


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.form)
def test_symmetry_and_bounds(kernel, any_space):
    rng = make_rng(21)
    x, y = any_space.draw(rng, 1000), any_space.draw(rng, 1000)
    kxy, kyx = evaluate(kernel, any_space, x, y), evaluate(kernel, any_space, y, x)
    assert np.array_equal(kxy, kyx)
    assert np.all((kxy >= 0) & (kxy <= kernel.M))


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.form)
def test_matrix_matches_elementwise(kernel, any_space):
    rng = make_rng(5)
    x, y = any_space.draw(rng, 40), any_space.draw(rng, 30)
    mat = kernel_matrix(kernel, any_space, x, y)
    if any_space.dim == 1:
        elem = evaluate(kernel, any_space, x[:, None], y[None, :])
    else:
        elem = evaluate(kernel, any_space, x[:, None, :], y[None, :, :])
    assert np.max(np.abs(mat - elem)) <= 1e-15


def test_constant_rejects_inconsistent_declaration():
    with pytest.raises(ConfigError):
        Constant(2.0)  # exceeds M = 1
    with pytest.raises(ConfigError):
        BallIndicator(0.5, a=1.5)
    with pytest.raises(ConfigError):
        Gaussian(0.1, M=0.5)


def test_degree_examples(any_space):
    x = any_space.draw(make_rng(2), 10)
    assert np.all(degree(Constant(1.0), any_space, x) == 1.0)
    assert degree(BallIndicator(math.pi / 4), Circle(TWO_PI), 1.3) == pytest.approx(0.25, abs=1e-15)


def test_ball_degree_monte_carlo():
    c = Circle(TWO_PI)
    pts = sample_uniform(c, 200_000, 17).points
    mc = np.mean(c.distance(pts, 2.0) < math.pi / 4)
    assert abs(mc - degree(BallIndicator(math.pi / 4), c, 2.0)) <= 4 * math.sqrt(0.25 * 0.75 / len(pts))


def test_gaussian_degree_grid_doubling():
    c, k = Circle(TWO_PI), Gaussian(0.1)
    x = c.probe_grid(37)
    a = degree(k, c, x, resolution=4096)
    b = degree(k, c, x, resolution=8192)
    assert np.max(np.abs(a - b)) <= 1e-8
    # Full-line Gaussian integral; the mass beyond |d| = pi is below 1e-10.
    exact = math.sqrt(4 * math.pi * 0.1) / TWO_PI
    assert np.allclose(a, exact, atol=1e-10)


def test_truncated_gaussian_degree_matches_erf():
    iv, k = Interval(1.0), TruncatedGaussian(0.05, 0.2)
    x = np.array([0.0, 0.1, 0.5, 0.93])
    s = 2.0 * math.sqrt(0.05)

    def primitive(u):
        return s * math.sqrt(math.pi) / 2.0 * math.erf(u / s)

    exact = [primitive(min(1 - xi, 0.2)) + primitive(min(xi, 0.2)) for xi in x]
    assert np.allclose(degree(k, iv, x), exact, atol=1e-7)


def test_resolution_zero_is_config_error(circle):
    with pytest.raises(ConfigError):
        degree(Gaussian(0.1), circle, 0.5, resolution=0)


def test_h_examples(circle):
    dc = degree_field(Constant(1.0), circle)
    x, y = make_rng(1).uniform(0, TWO_PI, (2, 100))
    assert np.all(h_kernel(Constant(1.0), circle, dc, x, y) == 1.0)
    ball = BallIndicator(math.pi / 4)
    db = degree_field(ball, circle)
    assert h_kernel(ball, circle, db, 1.0, 1.5) == pytest.approx(4.0, abs=1e-14)
    assert h_kernel(ball, circle, db, 1.0, 3.0) == 0.0


@pytest.mark.parametrize("kernel", [BallIndicator(0.3), Gaussian(0.05), TruncatedGaussian(0.05, 0.3)],
                         ids=lambda k: k.form)
def test_h_symmetry_exact(kernel):
    iv = Interval(1.0)
    d = degree_field(kernel, iv, resolution=1024)
    x, y = make_rng(8).uniform(0, 1, (2, 1000))
    assert np.max(np.abs(h_kernel(kernel, iv, d, x, y) - h_kernel(kernel, iv, d, y, x))) == 0.0


def test_h_degenerate_degree():
    class Zero:
        def __call__(self, x):
            return np.zeros(np.shape(x))

    with pytest.raises(DegenerateDegreeError):
        h_kernel(BallIndicator(0.1), Interval(1.0), Zero(), 0.1, 0.2)


def test_m_function_examples(circle):
    x = circle.probe_grid(16)
    assert np.allclose(m_function(Constant(1.0), circle, degree_field(Constant(1.0), circle), x), 1.0, atol=1e-14)
    ball = BallIndicator(math.pi / 4)
    assert np.allclose(m_function(ball, circle, degree_field(ball, circle), x), 1.0, atol=1e-12)
    g = Gaussian(0.1)
    m = m_function(g, circle, degree_field(g, circle), x)
    assert np.ptp(m) <= 1e-8


@pytest.mark.parametrize("kernel", [BallIndicator(0.3, a=0.25), Gaussian(0.02, a=0.2),
                                    TruncatedGaussian(0.05, 0.3, a=0.2)], ids=lambda k: k.form)
def test_h_and_m_bounds(kernel):
    iv = Interval(1.0)
    d = degree_field(kernel, iv, resolution=2048)
    x = iv.probe_grid(64)
    assert np.min(d(x)) > kernel.a
    h = h_kernel(kernel, iv, d, x[:, None], x[None, :])
    assert np.max(h) <= kernel.M / kernel.a
    assert np.min(m_function(kernel, iv, d, x, resolution=2048)) >= kernel.a / kernel.M


def test_modulus_constant_is_zero(circle):
    assert modulus_estimate(Constant(1.0), circle, 0.1) == 0.0


def test_modulus_ball_annulus(circle):
    assert modulus_estimate(BallIndicator(math.pi / 4), circle, 0.01) == pytest.approx(2 * 0.01 / math.pi, rel=1e-4)
    for delta in np.logspace(-3, -1, 7):
        est = modulus_estimate(BallIndicator(math.pi / 4), circle, float(delta))
        assert abs(est - 2 * delta / math.pi) <= 0.1 * 2 * delta / math.pi


def test_modulus_ball_grid_fallback_on_torus():
    # Quadrature route: estimate is a lower bound of the exact annulus measure.
    t = Torus2((1.0, 1.0))
    r, delta = 0.2, 0.02
    est = modulus_estimate(BallIndicator(r), t, delta, probe_count=9, resolution=128)
    annulus = math.pi * ((r + delta) ** 2 - (r - delta) ** 2)
    assert 0.5 * annulus <= est <= annulus * 1.05


def test_modulus_gaussian_lipschitz(circle):
    t = 0.1
    lip = math.sqrt(2 * t) / (2 * t) * math.exp(-0.5)
    for delta in (1e-3, 1e-2, 1e-1):
        est = modulus_estimate(Gaussian(t), circle, delta, probe_count=8, resolution=2048)
        assert 0 < est <= lip * delta


def test_verify_examples(circle):
    rep = verify_membership(Constant(1.0, a=0.5), circle)
    assert rep.passed and rep.degree_margin == pytest.approx(0.5)
    assert verify_membership(BallIndicator(math.pi / 4, a=0.2, C_omega=0.64, m_prime=1.0), circle).passed
    bad = verify_membership(BallIndicator(0.01, a=0.2), circle)
    assert not bad.passed and not bad.lower_bound_passed
    assert bad.min_degree == pytest.approx(0.01 / math.pi)


def test_verify_modulus_failure_recorded(circle):
    rep = verify_membership(BallIndicator(math.pi / 4, a=0.2, C_omega=0.1, m_prime=1.0), circle)
    assert rep.lower_bound_passed and not rep.modulus_passed
    assert rep.worst_modulus_margin < 0
    with pytest.raises(ConfigError):
        verify_membership(Constant(1.0, a=0.5), circle, grid=1)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["ball", "gaussian", "truncated_gaussian", "constant"]),
       st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_kernel_dict_round_trip(form, p, q):
    spec = {"ball": {"r": p}, "gaussian": {"t": p}, "truncated_gaussian": {"t": p, "eps": q},
            "constant": {"c": p}}[form]
    k = kernel_from_dict({"form": form, **spec, "a": q})
    assert kernel_from_dict(k.to_dict()) == k


def test_kernel_dict_strict():
    assert kernel_from_dict({"form": "ball", "r": 0.785398, "M": 1, "a": 0.2, "C_omega": 0.6366,
                             "m_prime": 1}).r == 0.785398
    with pytest.raises(ConfigError):
        kernel_from_dict({"form": "ball", "r": 0.5, "sigma": 1})
    with pytest.raises(ConfigError):
        kernel_from_dict({"form": "ball"})
    with pytest.raises(ConfigError):
        kernel_from_dict({"form": "laplace", "t": 1})
    with pytest.raises(ConfigError):
        kernel_from_dict({"form": "ball", "r": "wide"})
