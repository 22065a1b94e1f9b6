import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapconv import _fallback
from lapconv._accel import BACKEND
from lapconv.metric_space import make_rng

core = pytest.importorskip("lapconv._core")

FORMS = [(0, 0.7, 0.0), (1, 0.05, 0.0), (2, 0.05, 0.4), (3, 0.6, 0.0)]


def test_backend_reported():
    assert BACKEND == "cython"


def test_env_var_forces_fallback():
    env = dict(os.environ, LAPCONV_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import lapconv; print(lapconv.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60), st.sampled_from(FORMS), st.booleans(), st.integers(0, 2**32))
def test_line_kernels_agree(n, m, form, periodic, seed):
    rng = make_rng(seed)
    period = 2 * math.pi if periodic else 0.0
    x, y = rng.uniform(0, 2 * math.pi, n), rng.uniform(0, 2 * math.pi, m)
    code, p0, p1 = form
    a = core.kernel_matrix_1d(x, y, period, code, p0, p1, 1.0 / n)
    b = _fallback.kernel_matrix_1d(x, y, period, code, p0, p1, 1.0 / n)
    assert np.max(np.abs(a - b)) <= 1e-14


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 50), st.integers(1, 50), st.sampled_from(FORMS), st.integers(0, 2**32))
def test_torus_and_distance_kernels_agree(n, m, form, seed):
    rng = make_rng(seed)
    x, y = rng.uniform(0, 1, (n, 2)), rng.uniform(0, 1, (m, 2))
    code, p0, p1 = form
    a = core.kernel_matrix_torus(x, y, 1.0, 1.0, code, p0 / 4, p1 / 4, 0.5)
    b = _fallback.kernel_matrix_torus(x, y, 1.0, 1.0, code, p0 / 4, p1 / 4, 0.5)
    assert np.max(np.abs(a - b)) <= 1e-14
    d = rng.uniform(0, 1, (n, m))
    assert np.max(np.abs(core.kernel_from_distance(d, code, p0, p1, 2.0)
                         - _fallback.kernel_from_distance(d, code, p0, p1, 2.0))) <= 1e-14


def test_degree_scale_agrees():
    rng = make_rng(3)
    k = rng.uniform(size=(30, 20))
    r, c = rng.uniform(1, 2, 30), rng.uniform(1, 2, 20)
    assert np.max(np.abs(core.symmetric_degree_scale(k, r, c) - _fallback.symmetric_degree_scale(k, r, c))) <= 1e-15
