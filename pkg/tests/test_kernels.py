"""Kernel and Fredholm-determinant tests.

Frozen constants were computed with an mpmath oracle at 40 digits
(scripts kept inline where cheap): closed forms Ai(0) = 3^{-2/3}/Gamma(2/3),
Ai'(0) = -3^{-1/3}/Gamma(1/3), integral identities, and direct
arbitrary-precision quadrature of the extended kernel.
"""

import numpy as np
import pytest

from loggas import kernels as K
from loggas.errors import ConvergenceError, DivergenceError, DomainError

AI0 = 0.3550280538878172392600632
AIP0 = -0.2588194037928067984051836
INT_AI_SQ = 0.06698748377966397414368454          # int_0^inf Ai^2 = Ai'(0)^2
K_AIRY_0_07 = 0.03141982846221851179736016        # equal-time Airy K(0, 0.7)
K_EXT_FWD = 0.06253544497286228604168393          # K(s=0, -0.5; t=0.8, 0.3)
K_EXT_BWD = -0.2211457420691537921095902          # K(s=0.8, -0.5; t=0, 0.3)
RANK1_DET = -0.3780246135473637741735698          # 1 - int_0^1 e^x cos x dx


def test_airy_closed_forms():
    v = K.airy_fn(0.0)
    assert abs(v.ai - AI0) < 1e-14
    assert abs(v.aip - AIP0) < 1e-14
    assert not v.underflow


def test_airy_against_mpmath_grid():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    xs = np.linspace(-20.0, 20.0, 81)
    ai, aip, _ = K.airy_fn(xs)
    for x, a, ap in zip(xs, ai, aip):
        ma = float(mp.airyai(mp.mpf(x)))
        map_ = float(mp.airyai(mp.mpf(x), 1))
        env = (abs(x) + 1.0) ** -0.25
        if abs(ma) > 1e-3 * env:
            assert abs(a - ma) <= 1e-12 * abs(ma)
        if abs(map_) > 1e-3 * (abs(x) + 1.0) ** 0.25:
            assert abs(ap - map_) <= 1e-12 * abs(map_)


def test_airy_decay_monotone_and_ode():
    xs = np.linspace(1.0, 12.0, 45)
    ai = K.airy_fn(xs).ai
    assert (np.diff(ai) < 0).all() and (ai > 0).all()
    # defining ODE Ai'' = x Ai via central differences at x = 1.5
    h = 1e-4
    vals = K.airy_fn(np.array([1.5 - h, 1.5, 1.5 + h])).ai
    second = (vals[0] - 2 * vals[1] + vals[2]) / h**2
    assert abs(second - 1.5 * vals[1]) <= 1e-6


def test_airy_overflow_region_flagged():
    v = K.airy_fn(200.0)
    assert v.ai == 0.0 and not np.isnan(v.aip) and v.underflow
    arr = K.airy_fn(np.array([0.0, 150.0, 300.0]))
    assert not np.isnan(arr.ai).any()
    assert arr.underflow.tolist() == [False, True, True]


def test_airy_rejects_nonfinite():
    with pytest.raises(DomainError):
        K.airy_fn(np.inf)


def test_sine_kernel_values():
    spec = K.KernelSpec("sine")
    assert K.eval_kernel(spec, 0.0, 0.5, 0.0, 0.0) == pytest.approx(2.0 / np.pi, abs=1e-15)
    assert K.eval_kernel(spec, 0.0, 0.3, 0.0, 0.3) == 1.0


def test_equal_time_airy_matches_oracle():
    spec = K.KernelSpec("airy")
    assert K.eval_kernel(spec, 0.0, 0.0, 0.0, 0.7) == pytest.approx(K_AIRY_0_07, abs=1e-14)


def test_extended_airy_branches_match_oracle():
    spec = K.KernelSpec("extended-airy")
    assert K.eval_kernel(spec, 0.0, -0.5, 0.8, 0.3) == pytest.approx(K_EXT_FWD, abs=1e-9)
    assert K.eval_kernel(spec, 0.8, -0.5, 0.0, 0.3) == pytest.approx(K_EXT_BWD, abs=1e-9)


def test_extended_airy_diagonal_is_airy_prime_sq():
    spec = K.KernelSpec("extended-airy")
    assert K.eval_kernel(spec, 0.3, 0.0, 0.3, 0.0) == pytest.approx(INT_AI_SQ, abs=1e-10)


def test_extended_airy_equal_time_reduction():
    ext, eq = K.KernelSpec("extended-airy"), K.KernelSpec("airy")
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        x, y = rng.uniform(-3.0, 3.0, 2)
        if abs(x - y) <= 1e-3:
            continue
        worst = max(worst, abs(K.eval_kernel(ext, 0.0, x, 0.0, y) - K.eval_kernel(eq, 0.0, x, 0.0, y)))
    assert worst <= 1e-8


def test_extended_airy_divergent_backward_branch_rejected():
    spec = K.KernelSpec("extended-airy")
    with pytest.raises(DivergenceError) as err:
        K.eval_kernel(spec, 1e-4, 0.0, 0.0, 0.0)
    assert err.value.details["required_cutoff"] > 0


@pytest.mark.parametrize("family,domain,params", [
    ("sine", (-1.0, 1.0), {}),
    ("airy", (-2.0, 1.0), {}),
    ("bessel", (1e-4, 4.0), {"a": 1.5}),
])
def test_equal_time_symmetry(family, domain, params):
    spec = K.KernelSpec(family, params)
    rng = np.random.default_rng(5)
    for _ in range(50):
        x, y = rng.uniform(*domain, 2)
        assert abs(K.eval_kernel(spec, 0.0, x, 0.0, y)
                   - K.eval_kernel(spec, 0.0, y, 0.0, x)) <= 1e-12


def test_bessel_diagonal_limit_consistency():
    spec = K.KernelSpec("bessel", {"a": 1.5})
    # off-diagonal formula approaches the closed-form diagonal
    lim = K.eval_kernel(spec, 0.0, 2.0, 0.0, 2.0)
    near = K.eval_kernel(spec, 0.0, 2.0, 0.0, 2.0 + 1e-5)
    assert lim == pytest.approx(near, abs=1e-7)
    assert K.eval_kernel(spec, 0.0, 0.0, 0.0, 0.0) == 0.0   # alpha > 0 hard edge


def test_bessel_requires_a_geq_1():
    with pytest.raises(DomainError):
        K.KernelSpec("bessel", {"a": 0.5})
    with pytest.raises(DomainError):
        K.KernelSpec("bessel")


def test_bessel_rejects_negative_domain():
    spec = K.KernelSpec("bessel", {"a": 1.0})
    with pytest.raises(DomainError):
        K.eval_kernel(spec, 0.0, -1.0, 0.0, 2.0)


def test_equal_time_family_rejects_distinct_times():
    with pytest.raises(DomainError):
        K.eval_kernel(K.KernelSpec("sine"), 0.0, 0.1, 0.5, 0.2)


def test_ginibre_kernel_gauge_modulus():
    spec = K.KernelSpec("ginibre")
    assert K.eval_kernel(spec, 0.0, 0j, 0.0, 0j) == pytest.approx(1.0 / np.pi, abs=1e-15)
    v = K.eval_kernel(spec, 0.0, 1 + 1j, 0.0, 2 - 0.5j)
    d2 = abs((1 + 1j) - (2 - 0.5j)) ** 2
    assert v == pytest.approx(np.exp(-d2 / 2) / np.pi, abs=1e-15)
    # accepts length-2 points too
    assert K.eval_kernel(spec, 0.0, [1.0, 1.0], 0.0, [2.0, -0.5]) == pytest.approx(v)


def test_quadrature_grid_invariants():
    g = K.gauss_legendre(0.0, 2.0, 12)
    assert (g.weights > 0).all() and (np.diff(g.nodes) > 0).all()
    assert g.weights.sum() == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(DomainError):
        K.gauss_legendre(1.0, 1.0, 8)
    with pytest.raises(DomainError):
        K.QuadratureGrid(np.array([0.0, 1.0]), np.array([1.0, -1.0]), (0, 1))


def test_fredholm_empty_domain_is_one():
    assert K.fredholm_det(K.KernelSpec("sine"), (), 8, -1.0).value == 1.0


def test_fredholm_rank_one_oracle():
    def rank1(xs, ys):
        return np.exp(xs)[:, None] * np.cos(ys)[None, :]

    assert K.nystrom_det(rank1, (0.0, 1.0), 24, -1.0) == pytest.approx(RANK1_DET, abs=1e-12)


def test_fredholm_sine_gap_small_interval():
    res = K.fredholm_det(K.KernelSpec("sine"), (0.0, 0.01), 16, -1.0)
    assert res.value == pytest.approx(0.99, abs=1e-3)
    assert res.converged


def test_fredholm_grid_doubling_stable():
    res = K.fredholm_det(K.KernelSpec("sine"), (0.0, 1.0), 20, -1.0)
    assert res.refinement_error <= 1e-6
    K.require_converged(res)


def test_fredholm_rejects_low_order():
    with pytest.raises(DomainError):
        K.fredholm_det(K.KernelSpec("sine"), (0.0, 1.0), 3, -1.0)


def test_require_converged_raises():
    bad = K.FredholmResult(1.0, 8, 1e-3, False)
    with pytest.raises(ConvergenceError):
        K.require_converged(bad)


@pytest.mark.parametrize("family,domain,params", [
    ("sine", (-1.5, 1.5), {}),
    ("airy", (-3.0, 1.0), {}),
    ("bessel", (1e-6, 5.0), {"a": 2.0}),
])
def test_projection_eigenvalues_in_unit_interval(family, domain, params):
    ev = K.projection_eigenvalues(K.KernelSpec(family, params), domain, 40)
    assert ev.min() >= -1e-8 and ev.max() <= 1.0 + 1e-8


def test_multitime_m1_equals_fredholm():
    spec = K.KernelSpec("extended-airy")
    r1 = K.multitime_mgf(spec, [0.0], [-0.5], (-2.0, 1.0), 16)
    r2 = K.fredholm_det(spec, (-2.0, 1.0), 16, -0.5)
    assert abs(r1.value - r2.value) <= 1e-8


def test_multitime_zero_chi_is_one():
    spec = K.KernelSpec("extended-airy")
    assert K.multitime_mgf(spec, [0.0, 0.7], [0.0, 0.0], (-2.0, 1.0), 10).value == 1.0


def test_multitime_coincident_times_merge():
    spec = K.KernelSpec("extended-airy")
    c = -0.3
    merged = K.multitime_mgf(spec, [0.2, 0.2], [c, c], (-2.0, 1.0), 14)
    union = K.multitime_mgf(spec, [0.2], [2 * c + c * c], (-2.0, 1.0), 14)
    assert merged.value == pytest.approx(union.value, abs=1e-12)


def test_multitime_two_distinct_times_runs():
    spec = K.KernelSpec("extended-airy")
    res = K.multitime_mgf(spec, [0.0, 0.6], [-0.4, -0.4], (-2.0, 1.0), 14)
    assert 0.0 < res.value < 1.0
    assert res.refinement_error <= 1e-6


def test_multitime_validation():
    spec = K.KernelSpec("extended-airy")
    with pytest.raises(DomainError):
        K.multitime_mgf(K.KernelSpec("sine"), [0.0], [0.0], (0, 1))
    with pytest.raises(DomainError):
        K.multitime_mgf(spec, [0.0] * 5, [0.0] * 5, (0, 1))
    with pytest.raises(DomainError):
        K.multitime_mgf(spec, [0.5, 0.0], [0.0, 0.0], (0, 1))
