import math

import numpy as np
import pytest

from mch import besov, exact
from mch.grid import Field, make_grid
from mch.timestep import StepControl


@pytest.fixture(scope="module")
def pi_grid():
    return make_grid(np.pi, 1024)


@pytest.fixture(scope="module")
def spec(pi_grid):
    return besov.build_cutoffs(pi_grid)


def _random_band_limited(grid, rng, kmax=None):
    kmax = kmax or grid.n // 3
    c = np.zeros(grid.n // 2 + 1, complex)
    c[1:kmax] = rng.standard_normal(kmax - 1) + 1j * rng.standard_normal(kmax - 1)
    c[0] = rng.standard_normal()
    return Field(grid, np.fft.irfft(c, n=grid.n))


def test_low_pass_at_origin():
    assert besov.chi(0.0) == 1.0
    assert besov.chi(1.0) == 1.0 and besov.chi(4 / 3) == 0.0


def test_annulus_support():
    xi = np.linspace(0, 4, 4001)
    ph = besov.phi(xi)
    assert np.all(ph[(xi < 0.75) | (xi > 8 / 3)] == 0)
    assert np.all(ph >= 0)


def test_telescoping():
    xi = np.linspace(0, 500, 20001)
    total = besov.chi(xi) + sum(besov.phi(xi / 2**q) for q in range(0, 10))
    assert np.max(np.abs(total - 1)) < 1e-14


def test_block_count(spec):
    assert spec.q_max == 7
    assert 2**7 * 8 / 3 <= 512
    assert spec.q_top >= spec.q_max


def test_partition_and_quadratic_bound(spec):
    assert spec.partition_error() < 1e-12
    quad = spec.quadratic_sum()
    assert quad.min() >= 1 / 3 - 1e-12 and quad.max() <= 1 + 1e-12


@pytest.mark.parametrize("L,n", [(np.pi, 64), (20 * np.pi, 1024), (8 * np.pi, 4096)])
def test_cutoffs_on_other_grids(L, n):
    s = besov.build_cutoffs(make_grid(L, n))
    assert s.partition_error() < 1e-12


def test_single_mode_blocks(pi_grid, spec):
    f = Field(pi_grid, np.cos(2 * pi_grid.x))
    nonzero = {q for q in spec.block_range() if besov.dyadic_block(f, q, spec).sup() > 1e-14}
    assert nonzero and nonzero <= {0, 1}


def test_blocks_sum_to_field(pi_grid, spec):
    f = _random_band_limited(pi_grid, np.random.default_rng(3))
    total = sum(besov.dyadic_block(f, q, spec).values for q in spec.block_range())
    assert np.max(np.abs(total - f.values)) < 1e-12 * max(1.0, f.sup())


def test_zero_field(pi_grid, spec):
    z = Field.zeros(pi_grid)
    assert besov.dyadic_block(z, 2, spec).sup() == 0
    assert besov.besov_norm(z, 1.5, 2, 1, spec) == 0


def test_block_index_guard(pi_grid, spec):
    with pytest.raises(ValueError):
        besov.dyadic_block(Field.zeros(pi_grid), spec.q_top + 1, spec)
    with pytest.raises(ValueError):
        besov.dyadic_block(Field.zeros(pi_grid), -2, spec)


@pytest.mark.parametrize("q", [1, 2, 3, 5])
@pytest.mark.parametrize("s,p", [(0.0, 2.0), (1.5, 2.0), (2.5, 1.0), (1.0, math.inf)])
def test_single_block_norm(pi_grid, spec, q, s, p):
    # xi = 1.5 * 2^q sits where block q equals one and its neighbours vanish
    f = Field(pi_grid, np.cos(1.5 * 2**q * pi_grid.x))
    expect = 2 ** (q * s) * besov.lp_norm(pi_grid, f.values, p)
    # FFT round-off in the empty top blocks is weighted by up to 2^(q_top s)
    rel = 1e-15 * 2 ** (spec.q_top * s) * pi_grid.n
    for r in (1.0, 2.0, math.inf):
        assert besov.besov_norm(f, s, p, r, spec) == pytest.approx(expect, rel=max(rel, 1e-12))


def test_exponent_guards(pi_grid, spec):
    f = Field.zeros(pi_grid)
    with pytest.raises(ValueError):
        besov.besov_norm(f, 1.0, 0.5, 1, spec)
    with pytest.raises(ValueError):
        besov.besov_norm(f, 1.0, 2, float("nan"), spec)


def test_b0_22_against_l2(pi_grid, spec):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        f = _random_band_limited(pi_grid, rng)
        ratio = besov.besov_norm(f, 0.0, 2, 2, spec) / besov.lp_norm(pi_grid, f.values, 2)
        assert 1 / math.sqrt(3) - 1e-12 <= ratio <= 1 + 1e-12


def test_monotone_in_s(pi_grid, spec):
    rng = np.random.default_rng(7)
    for _ in range(10):
        c = np.zeros(pi_grid.n // 2 + 1, complex)
        c[2:300] = rng.standard_normal(298)  # modes >= 2 put nothing in the low-pass block
        f = Field(pi_grid, np.fft.irfft(c, n=pi_grid.n))
        vals = [besov.besov_norm(f, s, 2, 1, spec) for s in (-1.0, 0.0, 0.5, 1.5, 2.5)]
        assert np.all(np.diff(vals) >= -1e-12 * vals[-1])


@pytest.mark.parametrize("theta", [0.25, 0.5, 0.75])
def test_interpolation(pi_grid, spec, theta):
    rng = np.random.default_rng(11)
    s1, s2 = 0.5, 2.5
    for _ in range(20):
        f = _random_band_limited(pi_grid, rng, kmax=rng.integers(5, 340))
        mid = besov.besov_norm(f, theta * s1 + (1 - theta) * s2, 2, 1, spec)
        bound = besov.besov_norm(f, s1, 2, 1, spec) ** theta * besov.besov_norm(
            f, s2, 2, 1, spec) ** (1 - theta)
        assert mid <= bound * (1 + 1e-12)


@pytest.fixture(scope="module")
def stab_grid():
    return make_grid(8 * np.pi, 1024)


def test_identical_data_stay_identical(stab_grid):
    u0 = exact.gaussian(stab_grid, 0.5)
    rep = besov.stability_experiment(u0, u0, 0.0, StepControl(), 0.2, samples=5)
    assert np.all(rep.distance == 0)
    assert rep.complete


def test_perturbation_growth_is_dominated(stab_grid):
    u0 = exact.gaussian(stab_grid, 0.5)
    bump = exact.gaussian(stab_grid).values
    a = besov.stability_experiment(u0, u0 + 1e-6 * bump, 0.0, StepControl(), 0.5, samples=11)
    b = besov.stability_experiment(u0, u0 + 5e-7 * bump, 0.0, StepControl(), 0.5, samples=11)
    assert a.complete and a.dominated()
    assert 0 < a.C_hat < math.inf
    assert b.C_hat == pytest.approx(a.C_hat, rel=0.05)


def test_larger_data_grow_faster(stab_grid):
    u0 = exact.gaussian(stab_grid, 0.5)
    bump = 1e-6 * exact.gaussian(stab_grid).values
    small = besov.stability_experiment(u0, u0 + bump, 0.0, StepControl(), 0.3, samples=7)
    big = besov.stability_experiment(u0 * 2.0, u0 * 2.0 + 2 * bump, 0.0, StepControl(), 0.3, samples=7)
    g_small = small.distance[-1] / small.distance[0]
    g_big = big.distance[-1] / big.distance[0]
    assert big.accumulated[-1] > small.accumulated[-1]
    assert g_big > g_small
