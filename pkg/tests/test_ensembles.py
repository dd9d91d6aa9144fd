"""Ensemble sampler tests: exactness in law at small N (Monte Carlo against
closed forms), determinism, and scaling-map round trips."""

import math

import numpy as np
import pytest

from loggas import ensembles as E
from loggas.errors import DomainError
from loggas.stats import ks_statistic, semicircle_cdf


def test_determinism_bitwise():
    spec = E.EnsembleSpec("gaussian-beta", 16, 2.0, seed=123)
    assert (E.sample(spec) == E.sample(spec)).all()
    assert (E.sample(spec, 3) == E.sample(spec, 3)).all()
    assert not (E.sample(spec, 3) == E.sample(spec, 4)).all()


def test_sorted_strictly_increasing():
    for beta in (1.0, 2.0, 4.0, 0.7):
        x = E.sample(E.EnsembleSpec("gaussian-beta", 64, beta, seed=9))
        assert (np.diff(x) > 0).all()


def test_n1_is_standard_gaussian():
    # N = 1 closed form: a single N(0,1) value for every beta
    spec = E.EnsembleSpec("gaussian-beta", 1, 3.3, seed=17)
    v = np.array([E.sample(spec, k)[0] for k in range(100_000)])
    se_var = math.sqrt(2.0 / v.size)
    assert abs(v.var() - 1.0) <= 3 * se_var
    assert abs(v.mean()) <= 3 / math.sqrt(v.size)


def test_gue_semicircle_ks():
    x = E.sample(E.EnsembleSpec("gaussian-beta", 1000, 2.0, seed=7))
    assert ks_statistic(x / math.sqrt(1000), semicircle_cdf) <= 0.03


def test_spectra_symmetric_about_zero():
    spec = E.EnsembleSpec("gaussian-beta", 8, 2.0, seed=31)
    means = np.array([E.sample(spec, k).mean() for k in range(10_000)])
    # per-eigenvalue variance is O(1); the replica mean has SE ~ std/sqrt(R)
    assert abs(means.mean()) <= 3 * means.std() / math.sqrt(means.size)


def test_ginibre_circular_law():
    z = E.sample(E.EnsembleSpec("ginibre", 500, seed=3))
    r = np.abs(z) / math.sqrt(500)
    assert ks_statistic(r[r <= 1.0], lambda u: u**2) <= 0.05


def test_ginibre_lexsorted_and_deterministic():
    spec = E.EnsembleSpec("ginibre", 50, seed=5)
    z = E.sample(spec)
    assert (z == E.sample(spec)).all()
    order = np.lexsort((z.imag, z.real))
    assert (order == np.arange(50)).all()


def test_laguerre_positive_and_hard_edge_scale():
    spec = E.EnsembleSpec("laguerre-beta", 80, 2.0, a=1.0, seed=11)
    x = E.sample(spec)
    assert (x > 0).all() and (np.diff(x) > 0).all()
    # smallest eigenvalue lives on the 1/N hard-edge scale
    smallest = np.array([E.sample(spec, k)[0] for k in range(200)])
    assert np.median(smallest) * 80 < 50.0


def test_spec_validation():
    with pytest.raises(DomainError):
        E.EnsembleSpec("gaussian-beta", 0, 2.0)
    with pytest.raises(DomainError):
        E.EnsembleSpec("ginibre", 8, beta=4.0)
    with pytest.raises(DomainError):
        E.EnsembleSpec("laguerre-beta", 8, 2.0, a=0.5)
    with pytest.raises(DomainError):
        E.EnsembleSpec("circular", 8)


def test_scaling_round_trips():
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(-30, 30, 64))
    for regime in ("bulk", "soft-edge", "hard-edge"):
        m = E.ScalingMap(regime, 200)
        back = m.invert(m.apply(x))
        assert np.abs(back - x).max() <= 1e-12
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    g = E.ScalingMap("ginibre-bulk", 200)
    assert (g.invert(g.apply(z)) == z).all()


def test_soft_edge_maps_edge_to_zero():
    n = 400
    m = E.ScalingMap("soft-edge", n)
    assert m.apply(np.array([2.0 * math.sqrt(n)]))[0] == 0.0


def test_bulk_scaling_gives_unit_mean_spacing():
    # GUE N = 200 center after bulk unfolding: mean nearest-neighbour
    # spacing 1 +- 0.05 (averaged over replicas)
    n = 200
    m = E.ScalingMap("bulk", n)
    spacings = []
    for k in range(40):
        x = E.sample(E.EnsembleSpec("gaussian-beta", n, 2.0, seed=77), k)
        y = m.apply(x)
        mid = y[(n // 2 - 25):(n // 2 + 25)]
        spacings.append(np.diff(mid).mean())
    assert np.mean(spacings) == pytest.approx(1.0, abs=0.05)


def test_regime_family_mismatch():
    z = E.sample(E.EnsembleSpec("ginibre", 10, seed=1))
    with pytest.raises(DomainError):
        E.ScalingMap("bulk", 10).apply(z)
    with pytest.raises(DomainError):
        E.ScalingMap("ginibre-bulk", 10).apply(np.array([1.0, 2.0]))


def test_batch_sampler_matches_law():
    # batched tridiagonal path: same semicircle law as the per-replica path
    from loggas.rng import chunk_rng

    X = E.gaussian_beta_batch(64, 2.0, 400, chunk_rng(5, 0))
    assert X.shape == (400, 64)
    pooled = X.ravel() / math.sqrt(64)
    assert ks_statistic(pooled, semicircle_cdf) <= 0.05
