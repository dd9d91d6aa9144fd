"""Correlation kernels of the random-matrix equilibrium point processes and
Fredholm determinants built from them.

Implemented families
--------------------
* ``sine``           -- bulk kernel  sin(pi(x-y)) / (pi(x-y)),  density 1.
* ``airy``           -- soft-edge kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x-y).
* ``extended-airy``  -- space-time kernel

      K(s,x;t,y) =  int_0^inf   e^{-u(t-s)/2} Ai(u+x) Ai(u+y) du   (t >= s)
                 = -int_-inf^0  e^{-u(t-s)/2} Ai(u+x) Ai(u+y) du   (t <  s)

  with equality of times assigned to the first branch.  At t == s it reduces
  to the equal-time Airy kernel.
* ``bessel``         -- hard-edge kernel of order ``alpha = a - 1`` on [0, inf):

      K(x,y) = [J_a(sx) g(sy) - g(sx) J_a(sy)] / (2(x-y)),   s* = sqrt(*),
      g(s)   = s J_a'(s) = alpha J_a(s) - s J_{a+1}(s).

* ``ginibre``        -- planar kernel; :func:`eval_kernel` returns the
  gauge-invariant modulus  exp(-|z-w|^2/2)/pi  (the phase factor
  exp(i Im(z conj(w))) drops out of the 1- and 2-point functions, which are
  the only statistics consumed downstream).

Determinants use Nystrom discretisation on composite Gauss-Legendre panels;
semi-infinite Airy integrals are truncated where the classical envelope
bound  |Ai(v)| <= exp(-(2/3)v^{3/2})/(2 sqrt(pi) v^{1/4})  (v > 0) and, on
the oscillatory side, |Ai(-v)| <= 0.6 v^{-1/4}, push the tail below 1e-14.

All functions are pure; there is no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import airy as _scipy_airy
from scipy.special import jv as _jv

from .errors import ConvergenceError, DivergenceError, DomainError

FAMILIES = ("sine", "airy", "extended-airy", "bessel", "ginibre")

# Kernel-value matching of the two equal-time Airy code paths (closed form
# vs. the tau=0 quadrature branch) and the x == y removable singularity.
_AIRY_DIAG_SWITCH = 1e-6
_BESSEL_DIAG_SWITCH = 1e-6

# Truncation cap for the oscillatory (t < s) branch; combinations needing a
# longer range are rejected with the bound that was computed.
_EXT_AIRY_UMAX = 2000.0


@dataclass(frozen=True)
class KernelSpec:
    """Descriptor of a correlation kernel.

    ``params`` carries the Bessel order parameter ``a`` (>= 1); sine, Airy and
    Ginibre take no parameters beyond the standard normalisation.
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "bessel":
            a = self.params.get("a")
            if a is None or not (a >= 1):
                raise DomainError("bessel kernel requires parameter a >= 1")

    @property
    def bessel_alpha(self) -> float:
        return float(self.params["a"]) - 1.0


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and positive weights discretising one or more intervals."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple

    def __post_init__(self):
        w = np.asarray(self.weights)
        if not (w > 0).all():
            raise DomainError("quadrature weights must be strictly positive")
        n = np.asarray(self.nodes)
        if n.ndim == 1 and n.size > 1 and not (np.diff(n) > 0).all():
            raise DomainError("quadrature nodes must be strictly increasing")


class AiryValue(NamedTuple):
    ai: np.ndarray | float
    aip: np.ndarray | float
    underflow: np.ndarray | bool


def airy_fn(x):
    """Airy function of the first kind and its derivative.

    Elementwise on arrays.  In the deep-decay region the value underflows to
    exactly zero and the ``underflow`` flag is set; NaN is never returned.
    """
    xs = np.asarray(x, dtype=float)
    if not np.isfinite(xs).all():
        raise DomainError("airy_fn requires finite arguments")
    ai, aip, _, _ = _scipy_airy(xs)
    bad = ~(np.isfinite(ai) & np.isfinite(aip))
    if np.any(bad):
        ai = np.where(bad, 0.0, ai)
        aip = np.where(bad, 0.0, aip)
    underflow = bad | ((xs > 100.0) & (ai == 0.0))
    if np.isscalar(x) or xs.ndim == 0:
        return AiryValue(float(ai), float(aip), bool(underflow))
    return AiryValue(ai, aip, underflow)


# ---------------------------------------------------------------------------
# Gauss-Legendre panels
# ---------------------------------------------------------------------------

def gauss_legendre(a: float, b: float, order: int) -> QuadratureGrid:
    """Gauss-Legendre rule mapped to [a, b]."""
    if not order >= 1:
        raise DomainError("quadrature order must be >= 1")
    if not b > a:
        raise DomainError(f"empty or inverted interval [{a}, {b}]")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureGrid(half * nodes + 0.5 * (a + b), half * weights, (a, b))


def _composite(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = (half[:, None] * nodes[None, :] + mid[:, None]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()
    return xs, ws


# ---------------------------------------------------------------------------
# equal-time kernels, vectorised over point grids
# ---------------------------------------------------------------------------

def _sine_matrix(xs, ys):
    return np.sinc(np.subtract.outer(xs, ys))


def _airy_matrix(xs, ys):
    ax, apx, _ = airy_fn(xs)
    ay, apy, _ = airy_fn(ys)
    dx = np.subtract.outer(xs, ys)
    num = np.multiply.outer(ax, apy) - np.multiply.outer(apx, ay)
    near = np.abs(dx) <= _AIRY_DIAG_SWITCH
    xm = np.broadcast_to(np.asarray(xs)[..., None], dx.shape)
    diag = apx[..., None] ** 2 - xm * ax[..., None] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / dx
    return np.where(near, diag, out)


def _bessel_matrix(xs, ys, alpha):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if (xs < 0).any() or (ys < 0).any():
        raise DomainError("bessel kernel domain is [0, inf)")
    sx, sy = np.sqrt(xs), np.sqrt(ys)
    jx, jy = _jv(alpha, sx), _jv(alpha, sy)
    # g(s) = s J_a'(s) = alpha J_a(s) - s J_{a+1}(s): regular at s = 0.
    gx = alpha * jx - sx * _jv(alpha + 1, sx)
    gy = alpha * jy - sy * _jv(alpha + 1, sy)
    dx = np.subtract.outer(xs, ys)
    num = np.multiply.outer(jx, gy) - np.multiply.outer(gx, jy)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (2.0 * dx)
        # diagonal: [J_a^2 + J_{a+1}^2 - (2 alpha / s) J_a J_{a+1}] / 4
        j1x = _jv(alpha + 1, sx)
        cross = np.where(sx > 0, 2.0 * alpha * jx * j1x / np.where(sx > 0, sx, 1.0), 0.0)
        diag = (jx**2 + j1x**2 - cross) / 4.0
        if alpha == 0.0:
            diag = np.where(sx == 0.0, 0.25, diag)
        else:
            diag = np.where(sx == 0.0, 0.0, diag)
    near = np.abs(dx) <= _BESSEL_DIAG_SWITCH
    return np.where(near, diag[..., None] * np.ones_like(dx), out)


def _ginibre_matrix(zs, ws):
    zs = np.asarray(zs, dtype=complex)
    ws = np.asarray(ws, dtype=complex)
    d2 = np.abs(np.subtract.outer(zs, ws)) ** 2
    return np.exp(-0.5 * d2) / math.pi


# ---------------------------------------------------------------------------
# extended Airy kernel
# ---------------------------------------------------------------------------

def _ext_airy_grid_forward(tau: float, lo: float) -> tuple[np.ndarray, np.ndarray]:
    """Panels on [0, u*] for the t >= s branch; ``lo`` = min over x and y."""
    ustar = 12.0 + max(0.0, -lo)
    edges = np.arange(0.0, ustar + 1.0, 1.0)
    return _composite(edges, 20)


def _ext_airy_grid_backward(tau: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Panels on [-U, 0] for the t < s branch (tau < 0).

    The cutoff solves  exp(-U|tau|/2) / (sqrt(U) |tau|) <= 1e-14; panel
    lengths track the local Airy oscillation wavelength 2 pi / sqrt(|u| + c).
    """
    at = abs(tau)
    U = 64.0 / at
    for _ in range(3):
        U = (2.0 / at) * (32.0 + max(0.0, -math.log(max(math.sqrt(U) * at, 1e-300))))
    if U > _EXT_AIRY_UMAX:
        raise DivergenceError(
            "extended Airy integral needs truncation at |u| = "
            f"{U:.3g} > {_EXT_AIRY_UMAX:.3g} for t - s = {tau:.3g}; "
            "the t < s branch diverges as t -> s",
            required_cutoff=U,
            tau=tau,
        )
    shift = 30.0 + max(0.0, hi)
    edges = [0.0]
    while edges[-1] < U:
        step = 4.7 / math.sqrt(edges[-1] + shift)
        edges.append(min(edges[-1] + step, U))
    return _composite(-np.asarray(edges[::-1]), 16)


def extended_airy_block(tau: float, xs, ys) -> np.ndarray:
    """Matrix  K(s, x_i; s + tau, y_j)  of the extended Airy kernel."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if tau >= 0.0:
        u, w = _ext_airy_grid_forward(tau, min(xs.min(), ys.min()))
        sign = 1.0
    else:
        u, w = _ext_airy_grid_backward(tau, max(xs.max(), ys.max()))
        sign = -1.0
    damp = np.exp(-0.5 * u * tau) * w
    ax = _scipy_airy(np.add.outer(xs, u))[0]
    ay = _scipy_airy(np.add.outer(ys, u))[0]
    return sign * ((ax * damp[None, :]) @ ay.T)


def kernel_matrix(spec: KernelSpec, s: float, xs, t: float, ys) -> np.ndarray:
    """Kernel values on a product grid; scalar core of :func:`eval_kernel`."""
    if spec.family != "extended-airy" and s != t:
        raise DomainError(f"family {spec.family!r} is an equal-time kernel; got s={s}, t={t}")
    if spec.family == "sine":
        return _sine_matrix(xs, ys)
    if spec.family == "airy":
        return _airy_matrix(xs, ys)
    if spec.family == "bessel":
        return _bessel_matrix(xs, ys, spec.bessel_alpha)
    if spec.family == "ginibre":
        return _ginibre_matrix(xs, ys)
    return extended_airy_block(t - s, xs, ys)


def eval_kernel(spec: KernelSpec, s: float, x, t: float, y) -> float:
    """Evaluate the kernel at a single argument pair.

    For the planar Ginibre family ``x`` and ``y`` may be complex numbers or
    length-2 sequences.
    """
    if spec.family == "ginibre":
        x = complex(x[0], x[1]) if np.ndim(x) == 1 else complex(x)
        y = complex(y[0], y[1]) if np.ndim(y) == 1 else complex(y)
        return float(kernel_matrix(spec, s, [x], t, [y])[0, 0])
    return float(kernel_matrix(spec, s, [float(x)], t, [float(y)])[0, 0])


# ---------------------------------------------------------------------------
# Fredholm determinants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FredholmResult:
    value: float
    order: int
    refinement_error: float
    converged: bool


def _as_intervals(domain) -> list[tuple[float, float]]:
    if len(domain) == 0:
        return []
    if np.isscalar(domain[0]):
        domain = [domain]
    out = []
    for a, b in domain:
        if not b > a:
            raise DomainError(f"empty or inverted interval [{a}, {b}]")
        out.append((float(a), float(b)))
    return out


def _chi_values(chi, nodes: np.ndarray) -> np.ndarray:
    if chi is None:
        return np.ones_like(nodes)
    if callable(chi):
        return np.asarray([chi(v) for v in nodes], dtype=float)
    return np.full_like(nodes, float(chi))


def build_grid(domain, order: int) -> QuadratureGrid:
    """Gauss-Legendre grid of the given order on each interval of ``domain``."""
    intervals = _as_intervals(domain)
    xs, ws = [], []
    for a, b in intervals:
        g = gauss_legendre(a, b, order)
        xs.append(g.nodes)
        ws.append(g.weights)
    if not xs:
        return QuadratureGrid(np.empty(0), np.empty(0), ())
    return QuadratureGrid(np.concatenate(xs), np.concatenate(ws), tuple(intervals))


def nystrom_det(kernel_fn: Callable, domain, order: int, chi) -> float:
    """det(I + K chi) on ``domain`` by Nystrom discretisation.

    ``kernel_fn(xs, ys)`` must return the kernel matrix on a product grid.
    """
    grid = build_grid(domain, order)
    if grid.nodes.size == 0:
        return 1.0
    K = kernel_fn(grid.nodes, grid.nodes)
    cw = _chi_values(chi, grid.nodes) * grid.weights
    return float(np.linalg.det(np.eye(grid.nodes.size) + K * cw[None, :]))


def fredholm_det(spec: KernelSpec, domain, grid_order: int, chi) -> FredholmResult:
    """Fredholm determinant det(I + K chi) with a grid-doubling refinement check.

    The returned value is the doubled-order one; ``refinement_error`` is the
    difference between the two resolutions, and ``converged`` records whether
    it fell below 1e-6.  An empty domain gives exactly 1.
    """
    if grid_order < 4:
        raise DomainError("grid_order must be >= 4")
    if spec.family == "extended-airy":
        def kfn(xs, ys):
            return extended_airy_block(0.0, xs, ys)
    else:
        def kfn(xs, ys):
            return kernel_matrix(spec, 0.0, xs, 0.0, ys)
    coarse = nystrom_det(kfn, domain, grid_order, chi)
    fine = nystrom_det(kfn, domain, 2 * grid_order, chi)
    err = abs(fine - coarse)
    return FredholmResult(fine, grid_order, err, err <= 1e-6)


def require_converged(result: FredholmResult, tolerance: float = 1e-6) -> FredholmResult:
    if result.refinement_error > tolerance:
        raise ConvergenceError(
            f"grid refinement changed the determinant by {result.refinement_error:.3e} "
            f"> {tolerance:.1e}",
            refinement_error=result.refinement_error,
        )
    return result


def projection_eigenvalues(spec: KernelSpec, domain, order: int) -> np.ndarray:
    """Eigenvalues of the symmetrically weighted Nystrom matrix.

    For projection-type equal-time kernels these lie in [0, 1] up to
    discretisation error.
    """
    grid = build_grid(domain, order)
    K = kernel_matrix(spec, 0.0, grid.nodes, 0.0, grid.nodes)
    sw = np.sqrt(grid.weights)
    return np.linalg.eigvalsh(sw[:, None] * K * sw[None, :])


# ---------------------------------------------------------------------------
# multi-time block determinants
# ---------------------------------------------------------------------------

def _merge_coincident(times: Sequence[float], chis: Sequence) -> tuple[list[float], list]:
    """Coalesce duplicate times, composing their test factors.

    Two slots at the same time represent a single linear statistic with
    e^{f1+f2} - 1 = chi1 + chi2 + chi1*chi2, so the merged factor is
    (1+chi1)(1+chi2) - 1.  Without merging, the degenerate block determinant
    does not correspond to any moment generating function (the t < s branch
    diverges as the two times coincide).
    """
    merged_t: list[float] = []
    merged_c: list = []
    for tm, cm in zip(times, chis):
        if merged_t and tm == merged_t[-1]:
            prev = merged_c[-1]
            if callable(prev) or callable(cm):
                pf = prev if callable(prev) else (lambda _y, _v=prev: _v)
                cf = cm if callable(cm) else (lambda _y, _v=cm: _v)
                merged_c[-1] = lambda y, pf=pf, cf=cf: pf(y) + cf(y) + pf(y) * cf(y)
            else:
                merged_c[-1] = prev + cm + prev * cm
        else:
            merged_t.append(float(tm))
            merged_c.append(cm)
    return merged_t, merged_c


def multitime_mgf(
    spec: KernelSpec,
    times: Sequence[float],
    chi_per_time: Sequence,
    domain,
    grid_order: int = 24,
) -> FredholmResult:
    """Block Fredholm determinant Det[delta_st delta(x-y) + K(s,x;t,y) chi_t(y)].

    Extended-Airy only; at most four distinct times.  Times must be supplied
    in nondecreasing order; coincident times are merged per the delta_st
    convention (see :func:`_merge_coincident`).
    """
    if spec.family != "extended-airy":
        raise DomainError("multitime_mgf is defined for the extended-airy family only")
    if len(times) != len(chi_per_time):
        raise DomainError("times and chi_per_time must have equal length")
    if len(times) == 0 or len(times) > 4:
        raise DomainError("need 1 <= M <= 4 times")
    if any(b < a for a, b in zip(times, times[1:])):
        raise DomainError("times must be nondecreasing")
    times, chis = _merge_coincident(times, chi_per_time)

    def det_at(order: int) -> float:
        grid = build_grid(domain, order)
        P = grid.nodes.size
        if P == 0:
            return 1.0
        M = len(times)
        A = np.eye(M * P)
        for a in range(M):
            for b in range(M):
                blk = extended_airy_block(times[b] - times[a], grid.nodes, grid.nodes)
                cw = _chi_values(chis[b], grid.nodes) * grid.weights
                A[a * P:(a + 1) * P, b * P:(b + 1) * P] += blk * cw[None, :]
        return float(np.linalg.det(A))

    coarse = det_at(grid_order)
    fine = det_at(2 * grid_order)
    err = abs(fine - coarse)
    return FredholmResult(fine, grid_order, err, err <= 1e-6)
