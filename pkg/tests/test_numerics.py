import itertools
import math

import numpy as np
import pytest

from liqhorizon import _backend
from liqhorizon.errors import NumericalError, SingularSystemError
from liqhorizon.numerics import (
    TridiagonalSystem, cumulative_trapezoid, interp_linear, rk4_backward, solve_tridiagonal, trapezoid,
)

BACKENDS = sorted(_backend.AVAILABLE)


@pytest.mark.parametrize("backend", BACKENDS)
def test_identity_system(backend):
    b = np.array([1.0, -2.0, 3.5])
    x = solve_tridiagonal(TridiagonalSystem(np.zeros(2), np.ones(3), np.zeros(2), b), backend)
    assert np.array_equal(x, b)


@pytest.mark.parametrize("backend", BACKENDS)
def test_three_by_three(backend):
    # oracle: dense elimination by hand gives (1/2, 0, 3/2)
    s = TridiagonalSystem([1, 1], [2, 2, 2], [1, 1], [1, 2, 3])
    x = solve_tridiagonal(s, backend)
    assert np.allclose(x, [0.5, 0.0, 1.5], atol=1e-15)
    assert np.allclose(s.matvec(x), [1, 2, 3], atol=1e-15)


@pytest.mark.parametrize("backend", BACKENDS)
def test_random_dominant_residual(backend):
    rng = np.random.default_rng(5)
    n = 50
    lo, up = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
    d = 3.0 + rng.uniform(0, 1, n)
    s = TridiagonalSystem(lo, d, up, rng.normal(size=n))
    x = solve_tridiagonal(s, backend)
    assert np.max(np.abs(s.matvec(x) - s.rhs)) <= 1e-10 * np.max(np.abs(s.rhs))


def test_single_unknown():
    assert solve_tridiagonal(TridiagonalSystem([], [4.0], [], [2.0]))[0] == 0.5


def test_exhaustive_small_systems_match_dense():
    # all coefficient combinations in {-2..2} for n = 2 and a strided sample for n up to 8
    vals = (-2.0, -1.0, 0.0, 1.0, 2.0)
    checked = 0
    for combo in itertools.product(vals, repeat=5):
        s = TridiagonalSystem([combo[0]], [combo[1], combo[2]], [combo[3]], [combo[4], 1.0])
        checked += _compare(s)
    rng = np.random.default_rng(0)
    for n in range(3, 9):
        for _ in range(400):
            pick = lambda k: rng.choice(vals, size=k)
            checked += _compare(TridiagonalSystem(pick(n - 1), pick(n), pick(n - 1), pick(n)))
    assert checked > 1000


def _compare(s):
    try:
        x = solve_tridiagonal(s)
    except SingularSystemError:
        return 0
    a = s.dense()
    if abs(np.linalg.det(a)) < 1e-9:
        return 0
    ref = np.linalg.solve(a, s.rhs)
    assert np.allclose(x, ref, rtol=1e-8, atol=1e-8 * (1 + np.max(np.abs(ref))))
    return 1


def test_singular_pivot_reported():
    with pytest.raises(SingularSystemError, match="row 1"):
        solve_tridiagonal(TridiagonalSystem([1.0], [1.0, 1.0], [1.0], [1.0, 1.0]))
    with pytest.raises(SingularSystemError):
        solve_tridiagonal(TridiagonalSystem([1.0], [0.0, 0.0], [1.0], [1.0, 1.0]))


def test_system_shape_validation():
    with pytest.raises(ValueError):
        TridiagonalSystem([1.0, 1.0], [1.0, 1.0], [1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        TridiagonalSystem([], [], [], [])


def test_rk4_zero_and_constant_rhs():
    t, y = rk4_backward(lambda t, y: 0.0, 2.5, 1.0, 10)
    assert np.all(y == 2.5) and t[0] == 0.0 and t[-1] == 1.0
    _, y = rk4_backward(lambda t, y: 1.0, 3.0, 2.0, 7)
    assert y[0] == pytest.approx(1.0, abs=1e-13)


def test_rk4_exponential():
    _, y = rk4_backward(lambda t, y: -y, 1.0, 1.0, 1000)
    assert abs(y[0] - math.e) / math.e <= 1e-10


def test_rk4_order_on_logistic():
    # y' = y(1-y) backward from y(T)=0.3; exact y(t) = 1/(1+(1/0.3-1)e^{T-t})
    T = 2.0
    exact = 1.0 / (1.0 + (1 / 0.3 - 1) * math.exp(T))
    errs = [abs(rk4_backward(lambda t, y: y * (1 - y), 0.3, T, n)[1][0] - exact) for n in (10, 20, 40)]
    orders = [math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])]
    assert all(3.7 <= o <= 4.3 for o in orders)


def test_rk4_blowup_raises():
    with pytest.raises(NumericalError):
        rk4_backward(lambda t, y: -y * y, 1.0, 10.0, 100, abort=lambda y: abs(y) > 1e6)
    with pytest.raises(ValueError):
        rk4_backward(lambda t, y: 0.0, 0.0, 1.0, 0)


def test_trapezoid_examples():
    g = np.linspace(0, 1, 1000)
    assert trapezoid(np.ones_like(g), g) == pytest.approx(1.0, abs=1e-15)
    assert trapezoid(g, g) == pytest.approx(0.5, abs=1e-15)
    assert abs(trapezoid(g**2, g) - 1 / 3) <= 1e-6
    with pytest.raises(ValueError):
        trapezoid([1.0, 2.0], [0.0])


def test_cumulative_trapezoid_and_interp():
    g = np.linspace(0, 2, 5)
    c = cumulative_trapezoid(g, g)
    assert c[0] == 0.0 and c[-1] == pytest.approx(2.0)
    assert interp_linear(0.5, [0.0, 1.0], [2.0, 4.0]) == 3.0
    assert interp_linear(5.0, [0.0, 1.0], [2.0, 4.0]) == 4.0
