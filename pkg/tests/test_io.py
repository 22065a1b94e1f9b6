import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lapconv import io as lio
from lapconv.spectral import eig_sym

finite = st.floats(-1e300, 1e300, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=finite))
def test_csv_round_trip_exact(tmp_path_factory, a):
    p = tmp_path_factory.mktemp("csv") / "m.csv"
    lio.write_matrix_csv(p, a, comment="config_hash=abc seed=1")
    assert np.array_equal(lio.read_matrix_csv(p), a)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10).flatmap(lambda n: arrays(np.float64, (n, n), elements=finite)))
def test_binary_round_trip_exact(tmp_path_factory, a):
    p = tmp_path_factory.mktemp("bin") / "m.bin"
    lio.write_matrix_bin(p, a)
    assert np.array_equal(lio.read_matrix_bin(p), a)


def test_binary_layout(tmp_path):
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    p = tmp_path / "m.bin"
    lio.write_matrix_bin(p, a)
    raw = p.read_bytes()
    assert raw[:8] == (2).to_bytes(8, "little")
    assert np.array_equal(np.frombuffer(raw[8:], "<f8"), [1.0, 3.0, 2.0, 4.0])
    with pytest.raises(ValueError):
        lio.write_matrix_bin(p, np.ones((2, 3)))
    p.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        lio.read_matrix_bin(p)


def test_spectrum_csv_round_trip(tmp_path):
    s = eig_sym(np.diag([0.0, 1.0, 1.0, 2.0]))
    p = tmp_path / "s.csv"
    lio.write_spectrum_csv(p, s, comment="x")
    vals, groups = lio.read_spectrum_csv(p)
    assert np.array_equal(vals, s.eigenvalues)
    assert list(groups) == [0, 1, 1, 2]


def test_svg_embeds_data_and_is_deterministic():
    series = {"median": [(256, 0.1), (512, 0.07)]}
    a = lio.loglog_svg(series, "t")
    assert a == lio.loglog_svg(series, "t")
    assert "median: 256:0.1 512:0.07" in a and a.startswith("<?xml")
