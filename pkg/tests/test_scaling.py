import math

import numpy as np
import pytest
from scipy.integrate import quad

from bdls.bd_system import BDState, mass
from bdls.errors import DomainError, ValidationError
from bdls.scaling import (
    MONITOR_COLUMNS, MomentFunction, SteppedDensity, TestFunctionFamily, check_entropy_delta,
    density_of, entropy_functional, laplace, moment, monitor_rows, rescaled_small_cluster,
    weak_star_distance, write_csv,
)


def state(eps, c, u=0.0):
    return BDState(t=0.0, eps=eps, u=u, c=np.asarray(c, dtype=float))


def test_density_one_cell():
    d = density_of(state(0.1, [3.0, 0.0, 0.0]))
    assert d.total() == pytest.approx(0.3)
    assert d.edges[0] == pytest.approx(0.15) and d.edges[1] == pytest.approx(0.25)
    assert d(0.1501) == 3.0 and d(0.2499) == 3.0 and d(0.2501) == 0.0 and d(0.1) == 0.0


def test_zero_density():
    d = density_of(state(0.1, np.zeros(5)))
    assert d.total() == 0.0 and np.all(d(np.linspace(0, 1, 11)) == 0.0)


def test_stepped_density_rejects_negative():
    with pytest.raises(ValidationError):
        SteppedDensity(0.1, np.array([1.0, -1.0]))


def test_first_moment_is_mass_minus_u():
    rng = np.random.default_rng(0)
    for _ in range(50):
        eps = rng.uniform(0.01, 0.5)
        st = state(eps, rng.uniform(0, 2, int(rng.integers(2, 300))), u=rng.uniform(0, 1))
        mx = moment(density_of(st), MomentFunction.power(1.0))
        assert st.u + mx == pytest.approx(mass(st), rel=1e-13)


def test_laplace_example():
    st = state(0.5, [2.0, 1.0])
    assert laplace(st, 0.999999999, 0.0) == pytest.approx(2 * math.exp(-2) + math.exp(-3), rel=1e-8)
    # z = 1 itself is outside the open interval; the two-term sum is 0.3204576...
    assert 2 * math.exp(-2) + math.exp(-3) == pytest.approx(0.32046, abs=1e-5)
    assert laplace(state(0.5, [0.0, 0.0]), 0.3, 0.5) == 0.0
    with pytest.raises(DomainError):
        laplace(st, 1.0, 0.0)
    with pytest.raises(DomainError):
        laplace(st, 0.0, 0.0)


def test_laplace_bound_by_first_moment():
    # e**(-jz) <= 1 <= j/2 for j >= 2 gives F <= eps**(r-2) / 2 * int x f
    rng = np.random.default_rng(1)
    for _ in range(100):
        eps = rng.uniform(0.005, 0.3)
        r_a = rng.uniform(0, 0.99)
        st = state(eps, rng.exponential(1.0, int(rng.integers(2, 400))))
        mx = moment(density_of(st), MomentFunction.power(1.0))
        for z in (0.05, 0.4, 0.9):
            assert laplace(st, z, r_a) <= 0.5 * eps ** (r_a - 2) * mx * (1 + 1e-12)


def test_laplace_nonincreasing_in_z():
    rng = np.random.default_rng(2)
    st = state(0.02, rng.exponential(1.0, 500))
    vals = [laplace(st, z, 0.5) for z in np.linspace(0.01, 0.99, 50)]
    assert np.all(np.diff(vals) <= 0.0)


def test_rescaled_small_cluster():
    st = state(0.01, [30.0, 1.0])
    assert rescaled_small_cluster(st, 2, 0.5) == pytest.approx(3.0, rel=1e-15)
    assert rescaled_small_cluster(st, 3, 0.0) == 1.0
    with pytest.raises(DomainError):
        rescaled_small_cluster(st, 4, 0.0)


def test_moment_examples():
    eps, c = 0.2, 1.7
    st = state(eps, [0.0, 0.0, c, 0.0])      # size 4
    d = density_of(st)
    assert moment(d, MomentFunction.power(1.0)) == pytest.approx(eps * (4 * eps) * c, rel=1e-14)
    st = state(0.3, [1.0, 2.0, 3.0])
    assert moment(density_of(st), MomentFunction.power(0.0)) == pytest.approx(0.3 * 6.0, rel=1e-14)
    one = density_of(state(1.0, [1.0, 0.0]))
    expect = 0.4 * (2.5**2.5 - 1.5**2.5)
    assert moment(one, MomentFunction.default()) == pytest.approx(expect, rel=1e-14)
    assert moment(one, MomentFunction.default()) == pytest.approx(2.8506, abs=5e-5)


def test_moment_quadrature_fallback():
    phi = MomentFunction(func=lambda x: np.asarray(x) ** 1.5)
    st = state(0.1, np.linspace(0.0, 1.0, 40))
    exact = moment(density_of(st), MomentFunction.default())
    assert moment(density_of(st), phi) == pytest.approx(exact, rel=1e-12)


def test_default_moment_in_admissible_class():
    assert MomentFunction.default().check_on_grid()
    assert not MomentFunction(func=lambda x: np.asarray(x) ** 0.5).check_on_grid()
    assert not MomentFunction(func=lambda x: np.asarray(x) ** 3).check_on_grid()


def test_test_family_default():
    fam = TestFunctionFamily.default(4.0)
    assert fam.n_test == 16
    assert fam.width == 0.5
    assert fam.centers[0] == 0.0
    assert fam.centers[-1] + fam.width == pytest.approx(4.0)
    x = np.linspace(-1, 5, 6001)
    for k in range(fam.n_test):
        y = fam.evaluate(k, x)
        assert y.max() == pytest.approx(1.0, abs=1e-3)
        assert np.all(y[(x < 0.0) | (x > 4.0)] == 0.0)
    np.testing.assert_allclose(fam.weights, 2.0 ** -np.arange(1, 17) / 3.0)


def test_hat_integrals_exact():
    fam = TestFunctionFamily.default(4.0)
    st = state(0.05, np.random.default_rng(3).uniform(0, 1, 90))
    d = density_of(st)
    got = fam.integrals(d)
    for k in (0, 3, 15):
        ref = math.fsum(
            h * quad(lambda y: float(fam.evaluate(k, y)), lo, hi, points=[fam.centers[k]], epsabs=1e-15)[0]
            for lo, hi, h in zip(d.edges[:-1], d.edges[1:], d.heights)
        )
        assert got[k] == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_distance_identity_symmetry():
    fam = TestFunctionFamily.default(4.0)
    rng = np.random.default_rng(4)
    a = density_of(state(0.05, rng.uniform(0, 1, 70)))
    b = density_of(state(0.05, rng.uniform(0, 1, 70)))
    assert weak_star_distance(a, a, fam) == 0.0
    assert weak_star_distance(a, b, fam) == weak_star_distance(b, a, fam)


def test_distance_two_one_cell_masses():
    # two unit-height cells [0.15,0.25) and [0.25,0.35) inside hat 2 only partly; hand quadrature
    fam = TestFunctionFamily(centers=np.array([0.3]), width=0.2)
    a = density_of(state(0.1, [1.0, 0.0, 0.0]))
    b = density_of(state(0.1, [0.0, 2.0, 0.0]))
    phi = lambda x: max(0.0, 1.0 - abs(x - 0.3) / 0.2)
    ia = quad(phi, 0.15, 0.25, epsabs=1e-15)[0]
    ib = 2.0 * quad(phi, 0.25, 0.35, points=[0.3], epsabs=1e-15)[0]
    expect = 0.5 / (1.0 + 5.0) * abs(ia - ib)
    assert weak_star_distance(a, b, fam) == pytest.approx(expect, rel=1e-12)


def test_entropy_examples():
    assert entropy_functional(density_of(state(0.1, np.zeros(5))), 0.5, 0.5) == 0.0
    c = np.array([1.0, 2.0, 3.0])
    got = entropy_functional(density_of(state(0.1, c)), 0.7, 0.0)
    assert got == pytest.approx(0.1 * np.sum(c ** 1.7), rel=1e-14)


def test_entropy_against_fine_quadrature():
    rng = np.random.default_rng(5)
    for _ in range(5):
        eps = rng.uniform(0.02, 0.2)
        r_a, delta = 0.5, rng.uniform(0.05, 0.95)
        d = density_of(state(eps, rng.uniform(0, 3, 40)))
        w = lambda x: min(1.0, x ** (r_a * delta))
        ref = math.fsum(h ** (1 + delta) * quad(w, lo, hi, points=[1.0] if lo < 1 < hi else None,
                                                 epsabs=0.0, epsrel=1e-13)[0]
                        for lo, hi, h in zip(d.edges[:-1], d.edges[1:], d.heights))
        assert entropy_functional(d, delta, r_a) == pytest.approx(ref, rel=1e-10)


def test_entropy_delta_range():
    with pytest.raises(DomainError):
        check_entropy_delta(1.0, 0.5)
    with pytest.raises(DomainError):
        check_entropy_delta(0.0, 0.5)
    check_entropy_delta(50.0, 0.0)


def test_monitor_rows_and_csv(tmp_path):
    st = state(0.1, [1.0, 2.0, 0.5], u=0.3)
    rows = monitor_rows([st], 0.5, z_grid=(0.1, 0.2), delta=0.5, r_a=0.5)
    assert len(rows) == 2 and len(rows[0]) == len(MONITOR_COLUMNS)
    assert rows[0][2] == pytest.approx(laplace(st, 0.1, 0.5))
    path = tmp_path / "m.csv"
    write_csv(path, MONITOR_COLUMNS, rows)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.splitlines()[0] == b"t,z,F_eps,moment_1,moment_x,moment_phi,entropy"
