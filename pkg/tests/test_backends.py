"""The compiled and numpy kernels must agree bit for bit."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liqhorizon import _backend, _pykernels, model3, sim_engine

cy = pytest.importorskip("liqhorizon._ckernels")


def test_cython_selected_by_default():
    if os.environ.get("LIQHORIZON_BACKEND"):
        pytest.skip("backend forced by environment")
    assert _backend.NAME == "cython"


def test_env_forces_fallback():
    out = subprocess.run(
        [sys.executable, "-c", "import liqhorizon; print(liqhorizon.BACKEND)"],
        env={**os.environ, "LIQHORIZON_BACKEND": "python"}, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    bad = subprocess.run(
        [sys.executable, "-c", "import liqhorizon"],
        env={**os.environ, "LIQHORIZON_BACKEND": "fortran"}, capture_output=True, text=True)
    assert bad.returncode != 0 and "LIQHORIZON_BACKEND" in bad.stderr


def test_unknown_backend_name():
    with pytest.raises(ValueError):
        _backend.get_kernels("rust")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 40))
def test_thomas_identical(seed, n):
    rng = np.random.default_rng(seed)
    lo, up = rng.normal(size=max(n - 1, 1)), rng.normal(size=max(n - 1, 1))
    d, b = 4 + rng.random(n), rng.normal(size=n)
    x1, k1 = _pykernels.thomas(lo, d, up, b, 1e-14)
    x2, k2 = cy.thomas(lo, d, up, b, 1e-14)
    assert k1 == k2 == -1 and np.array_equal(x1, np.asarray(x2))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rows=st.integers(2, 30), cols=st.integers(3, 30),
       iters=st.integers(1, 3))
def test_sweep_identical(seed, rows, cols, iters):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0, 1)
    adv = rng.uniform(-r / 2, r / 2)
    base = np.zeros((rows, cols))
    base[0] = -rng.uniform(0, 0.3, cols)
    ff = -rng.uniform(0, 0.3, rows)
    a, b = base.copy(), base.copy()
    args = (r, r / 2 + adv, r / 2 - adv, 1e-5, 0.1, ff, -0.2, iters, 1e-12)
    s1 = _pykernels.explicit_sweep(a, *args)
    s2 = cy.explicit_sweep(b, *args)
    assert tuple(s1) == tuple(s2) and np.array_equal(a, b)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), paths=st.integers(1, 50), steps=st.integers(1, 300))
def test_first_passage_identical(seed, paths, steps):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(paths, steps))
    x1 = rng.uniform(0, 0.5, paths)
    x2 = x1.copy()
    h1 = _pykernels.first_passage_block(x1, z, -0.01, 0.1)
    h2 = cy.first_passage_block(x2, z, -0.01, 0.1)
    assert np.array_equal(h1, np.asarray(h2))
    alive = h1 < 0
    assert np.array_equal(x1[alive], x2[alive])


def test_surface_and_replay_identical(params):
    fv = model3.FirmValueParams(beta=-1.0, y0=40.0)
    g = model3.make_grid(params, fv)
    s_py = model3.solve_value_surface(params, fv, g, backend="python")
    s_cy = model3.solve_value_surface(params, fv, g, backend="cython")
    assert np.array_equal(s_py.values, s_cy.values)
    r_py = model3.simulate_batch_m3(s_py, fv, params, seed=5, n_paths=300, backend="python")
    r_cy = model3.simulate_batch_m3(s_py, fv, params, seed=5, n_paths=300, backend="cython")
    for name in ("inventory", "rate", "price", "cash", "term_idx", "clamped", "objective"):
        assert np.array_equal(getattr(r_py, name), getattr(r_cy, name)), name
    assert (r_py.term_kind == "barrier").any()


def test_kernel_replay_matches_generic_replay(surface, params, firm):
    res = model3.simulate_batch_m3(surface, firm, params, seed=3, n_paths=50)
    paths = sim_engine.generate_paths(params, firm, seed=3, n_steps=surface.grid.n_time, n_paths=50)

    def rule(t, x, lr, i):
        k = surface.space_index(lr)
        th = -surface.values[surface.grid.n_time - i, k] * x * (1.0 / (2.0 * params.nu))
        return np.where(th < 0.0, 0.0, th)

    gen = sim_engine.replay_strategy(paths, rule, params, barrier=True)
    assert np.array_equal(gen.inventory, res.inventory)
    assert np.array_equal(gen.cash, res.cash)
    assert np.array_equal(gen.term_idx, res.term_idx)


def test_hitting_estimate_identical():
    a = sim_engine.hitting_transform_mc(1.0, 1.0, 0.5, 3000, 5000, seed=4, backend="python", block=256)
    b = sim_engine.hitting_transform_mc(1.0, 1.0, 0.5, 3000, 5000, seed=4, backend="cython", block=256)
    assert a == b
