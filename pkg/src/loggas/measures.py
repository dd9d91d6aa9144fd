"""Monte Carlo checks of the measure-theoretic identities behind the
dynamics: the logarithmic-derivative integration-by-parts formula and a
finite-volume quasi-Gibbs density-ratio diagnostic.

The 1-Campbell integrals are sampled by point summation: for a configuration
drawn from the ensemble, sum the integrand over its points.  Both sides of

    int grad_x f dmu^[1]  =  - int f d^mu dmu^[1]

become plain ensemble averages this way, estimated with a common stream so
their difference carries an honest standard error.

The logarithmic-derivative field shares its pairwise implementation with
:func:`loggas.dynamics.drift_field` (the field is exactly twice the drift
when the diffusion matrix is the identity); a quadratic confinement
gradient is added on top for the finite-N Gaussian ensembles, whose density
prod |dx|^beta exp(-sum x^2/2) is explicit.

All quantities are finite-N truncations; the quasi-Gibbs spread reported
here is a finite-volume diagnostic, not an infinite-volume statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DriftModel, drift_field
from .ensembles import EnsembleSpec, gaussian_beta_batch
from .errors import DomainError, InconclusiveError
from .rng import CHUNK, chunk_rng


@dataclass(frozen=True)
class PotentialPair:
    """Free + pair potential of the implemented Hamiltonians.

    Psi(x, y) = -beta log|x - y|; Phi is 0 or the quadratic x^2/2 (matching
    the Gaussian ensemble weight).
    """

    beta: float
    quadratic_confinement: bool = True

    def phi(self, x):
        return 0.5 * np.square(x) if self.quadratic_confinement else np.zeros_like(x)

    def psi(self, x, y):
        return -self.beta * np.log(np.abs(x - y))


@dataclass(frozen=True)
class LogDerivativeField:
    """d^mu(x, s) = 2 b(x, s) - c x  with b the family drift and c the
    quadratic-confinement coefficient (0 for the pure interaction field)."""

    family: str
    beta: float
    r: float = math.inf
    a: float | None = None
    confinement: float = 0.0

    def _model(self) -> DriftModel:
        return DriftModel(self.family, self.beta, self.r, self.a)

    def evaluate_batch(self, states: np.ndarray) -> np.ndarray:
        """Field at every point of every configuration; shape (B, N)."""
        out = 2.0 * drift_field(self._model(), states)
        if self.confinement != 0.0:
            out = out - self.confinement * states
        return out


class SmoothBump:
    """Compactly supported mollifier f(x) = exp(1 - 1/(1 - u^2)), u = (x-c)/w."""

    def __init__(self, center: float = 0.0, width: float = 1.0):
        if not width > 0:
            raise DomainError("bump width must be > 0")
        self.center = center
        self.width = width

    def value(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(u) < 1.0
        out = np.zeros_like(u)
        ui = u[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui**2))
        return out

    def grad(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(u) < 1.0
        out = np.zeros_like(u)
        ui = u[inside]
        out[inside] = (
            np.exp(1.0 - 1.0 / (1.0 - ui**2)) * (-2.0 * ui / (1.0 - ui**2) ** 2) / self.width
        )
        return out


class FnSum:
    """Pointwise sum of test functions (for the linearity property)."""

    def __init__(self, *fns):
        self.fns = fns

    def value(self, x):
        return sum(f.value(x) for f in self.fns)

    def grad(self, x):
        return sum(f.grad(x) for f in self.fns)


@dataclass(frozen=True)
class IbpResult:
    lhs: float
    rhs: float
    stderr: float
    replicas: int
    inconclusive: bool


def verify_ibp(
    ensemble: EnsembleSpec,
    field: LogDerivativeField,
    test_fn,
    replicas: int,
) -> IbpResult:
    """Monte Carlo estimate of both sides of the integration-by-parts
    identity over the 1-Campbell measure of the finite-N ensemble.

    lhs = E[sum_i f'(x_i)], rhs = -E[sum_i f(x_i) d^mu(x_i, s minus x_i)];
    stderr is the standard error of the per-replica difference.  Replicas
    are drawn in fixed-size chunks from streams derived from the ensemble
    seed (see loggas.rng).
    """
    if ensemble.family != "gaussian-beta":
        raise DomainError("verify_ibp is implemented for the gaussian-beta ensemble")
    if replicas < 2:
        raise DomainError("need at least 2 replicas")
    sum_l = sum_r = sum_d = sum_d2 = 0.0
    done = 0
    chunk_index = 0
    while done < replicas:
        count = min(CHUNK, replicas - done)
        rng = chunk_rng(ensemble.seed, chunk_index)
        X = gaussian_beta_batch(ensemble.n, ensemble.beta, count, rng)
        D = field.evaluate_batch(X)
        L = test_fn.grad(X).sum(axis=1)
        R = -(test_fn.value(X) * D).sum(axis=1)
        diff = L - R
        sum_l += float(L.sum())
        sum_r += float(R.sum())
        sum_d += float(diff.sum())
        sum_d2 += float((diff**2).sum())
        done += count
        chunk_index += 1
    lhs = sum_l / replicas
    rhs = sum_r / replicas
    var = max(sum_d2 / replicas - (sum_d / replicas) ** 2, 0.0)
    stderr = math.sqrt(var / replicas)
    return IbpResult(lhs, rhs, stderr, replicas, inconclusive=stderr > abs(lhs))


# ---------------------------------------------------------------------------
# quasi-Gibbs finite-volume diagnostic
# ---------------------------------------------------------------------------

def _free_pair(points: np.ndarray) -> tuple[float, float]:
    """(sum x^2/2, sum_{i<j} log|x_i - x_j|) of a 1-D configuration."""
    pts = np.asarray(points, dtype=float)
    free = float(0.5 * np.sum(pts**2))
    if pts.size < 2:
        return free, 0.0
    iu = np.triu_indices(pts.size, k=1)
    pair = float(np.log(np.abs(pts[:, None] - pts[None, :])[iu]).sum())
    return free, pair


def hamiltonian_window(inside: np.ndarray, beta: float) -> float:
    """H_r of the inside points: sum Phi + sum Psi with the logarithmic pair."""
    free, pair = _free_pair(inside)
    return free - beta * pair


def corrected_log_density(inside: np.ndarray, outside: np.ndarray, beta: float) -> float:
    """log p(inside | outside) + H_r(inside), up to inside-independent
    constants.

    The singular inside-inside terms of the conditional log density and of
    H_r cancel exactly (they are computed from shared sums), leaving the
    inside-outside interaction: the quantity whose spread bounds log(c^2)
    in the quasi-Gibbs sandwich.
    """
    f_in, p_in = _free_pair(inside)
    a = beta * p_in - f_in                 # inside block of the log density
    c = f_in - beta * p_in                 # H_r of the inside block
    cross = 0.0
    if np.size(outside):
        cross = float(
            np.log(np.abs(np.subtract.outer(np.asarray(inside), np.asarray(outside)))).sum()
        )
    return (a + c) + beta * cross


def _inside_grids(r: float, m: int, grid: int) -> np.ndarray:
    """(grid^m, m) staggered evaluation points in (-r, r)^m, no coincidences."""
    axes = []
    for k in range(m):
        offset = (k + 1) / (m + 1)
        axes.append(-r + (np.arange(grid) + offset) * (2.0 * r / grid))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True)
class QuasiGibbsResult:
    spread_min: float
    spread_max: float
    spreads: np.ndarray
    conditioned: int
    sampled: int

    def quantiles(self, qs=(0.0, 0.25, 0.5, 0.75, 1.0)) -> dict:
        return {f"q{int(100 * q)}": float(np.quantile(self.spreads, q)) for q in qs}


def quasi_gibbs_ratio(
    ensemble: EnsembleSpec,
    r: float,
    samples: int,
    m: int = 2,
    grid: int = 24,
) -> QuasiGibbsResult:
    """Spread (max - min over inside configurations) of the corrected log
    density, per sampled outside configuration with exactly ``m`` inside
    points; finite spread across samples is the quasi-Gibbs diagnostic.

    For an exact finite Gibbs density the spread equals the variation of the
    inside-outside interaction alone (zero when nothing is outside or when
    beta = 0).
    """
    if ensemble.family != "gaussian-beta":
        raise DomainError("quasi_gibbs_ratio is implemented for the gaussian-beta ensemble")
    if not 1 <= m <= ensemble.n:
        raise DomainError(f"inside count m = {m} out of range 1..{ensemble.n}")
    if not r > 0:
        raise DomainError("window radius must be > 0")
    if grid < 2 or grid**m > 400_000:
        raise DomainError("grid resolution out of range")
    pts = _inside_grids(r, m, grid)
    spreads = []
    done = 0
    chunk_index = 0
    while done < samples:
        count = min(CHUNK, samples - done)
        rng = chunk_rng(ensemble.seed, chunk_index)
        X = gaussian_beta_batch(ensemble.n, ensemble.beta, count, rng)
        for row in X:
            inside = np.abs(row) < r
            if int(inside.sum()) != m:
                continue
            outside = row[~inside]
            vals = np.array(
                [corrected_log_density(p, outside, ensemble.beta) for p in pts]
            )
            # quadrature normalisation of the conditional density: constant in
            # the inside configuration, so it cancels from the spread; kept
            # here to make the conditional-density construction explicit.
            logz = _logsumexp(vals)
            vals = vals - logz
            spreads.append(float(vals.max() - vals.min()))
        done += count
        chunk_index += 1
    if not spreads:
        raise InconclusiveError(
            f"empty conditioning event: no sample had exactly {m} points in (-{r}, {r})"
        )
    arr = np.asarray(spreads)
    return QuasiGibbsResult(float(arr.min()), float(arr.max()), arr, len(arr), samples)


def _logsumexp(v: np.ndarray) -> float:
    hi = v.max()
    return float(hi + np.log(np.exp(v - hi).sum()))
