import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapconv.errors import ConfigError, DomainError, UnsupportedError
from lapconv.metric_space import (Circle, Interval, PointCloud, Torus2, ball_measure, covering_number,
                                  distance, make_rng, sample_uniform, space_from_dict)

TWO_PI = 2.0 * math.pi


def test_distance_examples():
    assert distance(Circle(TWO_PI), 0.0, math.pi) == pytest.approx(math.pi, abs=0)
    assert distance(Interval(1.0), 0.2, 0.9) == pytest.approx(0.7, abs=1e-15)
    assert distance(Circle(TWO_PI), 0.1, 6.2) == pytest.approx(TWO_PI - 6.1, abs=1e-15)


def test_distance_zero_on_diagonal(any_space):
    x = any_space.draw(make_rng(3), 50)
    assert np.all(any_space.distance(x, x) == 0.0)


def test_distance_outside_space_rejected():
    with pytest.raises(DomainError):
        distance(Interval(1.0), 1.5, 0.2)
    with pytest.raises(DomainError):
        distance(Circle(TWO_PI), -0.1, 0.2)
    with pytest.raises(DomainError):
        Torus2((1.0, 1.0)).distance([0.5, 1.2], [0.1, 0.1])


def test_metric_axioms_on_random_triples(any_space):
    rng = make_rng(11)
    x, y, z = (any_space.draw(rng, 1000) for _ in range(3))
    dxy, dyx = any_space.distance(x, y), any_space.distance(y, x)
    assert np.array_equal(dxy, dyx)
    assert np.all(dxy >= 0)
    tol = 1e-12 if isinstance(any_space, Torus2) else 1e-15
    assert np.all(any_space.distance(x, z) <= dxy + any_space.distance(y, z) + tol)


def test_sample_empty_and_deterministic(circle):
    assert sample_uniform(circle, 0, 1).n == 0
    a = sample_uniform(circle, 100, 42)
    b = sample_uniform(circle, 100, 42)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, sample_uniform(circle, 100, 43).points)


def test_samples_nested_across_sizes(circle):
    small = sample_uniform(circle, 64, 5, stream=(2,))
    big = sample_uniform(circle, 256, 5, stream=(2,))
    assert np.array_equal(big.points[:64], small.points)


def test_sample_points_lie_in_space(any_space):
    pts = sample_uniform(any_space, 500, 9).points
    any_space.validate(pts)  # raises if outside


def test_ball_frequency_matches_measure_binomial(circle):
    n = 100_000
    pts = sample_uniform(circle, n, 2024).points
    frac = np.mean(circle.distance(pts, 0.0) < math.pi / 4)
    sigma = math.sqrt(0.25 * 0.75 / n)
    assert abs(frac - 0.25) <= 3 * sigma


def test_ball_frequency_concentration_over_trials(circle):
    n, p = 2000, 0.25
    hits = 0
    for t in range(200):
        pts = sample_uniform(circle, n, 0, stream=(t,)).points
        freq = np.mean(circle.distance(pts, 1.0) < math.pi / 4)
        hits += abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / n)
    assert hits >= 198


def test_ball_measure_examples():
    assert ball_measure(Circle(TWO_PI), 0.0, math.pi / 4) == pytest.approx(0.25, abs=1e-15)
    assert ball_measure(Interval(1.0), 0.0, 0.1) == pytest.approx(0.1, abs=1e-15)
    assert ball_measure(Interval(1.0), 0.5, 0.1) == pytest.approx(0.2, abs=1e-15)


def test_ball_measure_full_when_radius_exceeds_diameter(any_space):
    x = any_space.draw(make_rng(1), 5)
    assert np.allclose(ball_measure(any_space, x, any_space.diameter * 1.01), 1.0, atol=1e-9)


def test_torus_ball_measure_monte_carlo():
    t = Torus2((1.0, 1.5))
    pts = sample_uniform(t, 200_000, 8).points
    for r in (0.2, 0.6, 0.8):
        freq = np.mean(t.distance(pts, np.array([0.3, 0.7])) < r)
        exact = float(ball_measure(t, np.array([0.3, 0.7]), r))
        assert abs(freq - exact) <= 4 * math.sqrt(exact * (1 - exact) / len(pts))


def test_pointcloud_ball_measure_unsupported():
    pc = PointCloud(coordinates=np.array([[0.0], [1.0], [3.0]]))
    with pytest.raises(UnsupportedError):
        ball_measure(pc, 0, 1.5)


def test_covering_examples():
    assert covering_number(Circle(TWO_PI), math.pi / 2) == 2
    assert covering_number(Interval(1.0), 0.25) == 2
    assert covering_number(Circle(TWO_PI), 10.0) == 1
    with pytest.raises(DomainError):
        covering_number(Interval(1.0), 0.0)


def test_covering_brute_force_interval():
    # Greedy left-to-right placement is optimal on a segment.
    for delta in (0.03, 0.1, 0.17, 0.3):
        count, covered = 0, 0.0
        while covered < 1.0 - 1e-12:
            covered += 2 * delta
            count += 1
        assert covering_number(Interval(1.0), delta) == count


def test_pointcloud_cover_is_valid():
    rng = make_rng(4)
    coords = rng.uniform(size=(200, 2))
    pc = PointCloud(coordinates=coords)
    for delta in (0.05, 0.1, 0.3):
        k = covering_number(pc, delta)
        assert 1 <= k <= 200
    # every point within delta of the first k farthest-point centres
    d = pc.pairwise(np.arange(200), np.arange(200))
    order = [0]
    for _ in range(199):
        order.append(int(np.argmax(d[order].min(axis=0))))
    centres = order[:covering_number(pc, 0.1)]
    assert np.all(d[centres].min(axis=0) <= 0.1)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 4.0), st.floats(1e-3, 4.0), st.sampled_from(["interval", "circle", "torus", "cloud"]))
def test_covering_non_increasing(d1, d2, kind):
    space = {
        "interval": Interval(2.0),
        "circle": Circle(TWO_PI),
        "torus": Torus2((1.0, 2.0)),
        "cloud": PointCloud(coordinates=make_rng(0).uniform(size=(60, 2))),
    }[kind]
    lo, hi = sorted((d1, d2))
    assert covering_number(space, hi) <= covering_number(space, lo)


def test_pointcloud_distance_matrix_and_coordinates_agree():
    coords = make_rng(6).uniform(size=(30, 3))
    dm = np.sqrt(((coords[:, None] - coords[None]) ** 2).sum(-1))
    a, b = PointCloud(coordinates=coords), PointCloud(distance_matrix=dm)
    i, j = np.arange(30), np.arange(30)[::-1]
    assert np.allclose(a.distance(i, j), b.distance(i, j), atol=1e-14)
    assert a.diameter == pytest.approx(b.diameter, abs=1e-14)


def test_space_from_dict_round_trip_and_strict():
    for space in (Interval(2.0), Circle(TWO_PI), Torus2((1.0, 2.0))):
        assert space_from_dict(space.to_dict()) == space
    assert space_from_dict({"kind": "circle", "circumference": 6.283185307}).circumference == 6.283185307
    with pytest.raises(ConfigError):
        space_from_dict({"kind": "circle", "circumference": 1.0, "radius": 2})
    with pytest.raises(ConfigError):
        space_from_dict({"kind": "sphere"})
    with pytest.raises(ConfigError):
        space_from_dict({"kind": "interval"})
