"""Estimators and hypothesis checks connecting simulations to the
equilibrium and rigidity claims: spectral density, unfolded spacings,
number variance, stationarity, tagged-particle mean squared displacement.

Conventions
-----------
* Pooled random-matrix points are strongly correlated within a replica, so
  the stationarity test computes its p-value by replica-level permutation
  (or, for paired initial/terminal data of reversible dynamics, by replica
  swaps).  That keeps the null calibration exact without any independence
  assumption on points.
* Spacing unfolding uses the closed-form semicircle law, never empirical
  smoothing.
* "Bulk" tagging selects the particle starting nearest the sample median;
  the acceptance runs keep it within half the spectral radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2 as _chi2

from .errors import DomainError
from .dynamics import LabeledPath


# ---------------------------------------------------------------------------
# closed-form reference laws
# ---------------------------------------------------------------------------

def semicircle_pdf(u):
    """Density of the semicircle law on [-2, 2]."""
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 2.0, np.sqrt(np.clip(4.0 - u**2, 0.0, None)) / (2.0 * math.pi), 0.0)


def semicircle_cdf(u):
    u = np.clip(np.asarray(u, dtype=float), -2.0, 2.0)
    return 0.5 + u * np.sqrt(4.0 - u**2) / (4.0 * math.pi) + np.arcsin(u / 2.0) / math.pi


def wigner_surmise_pdf(s, beta: float = 2.0):
    s = np.asarray(s, dtype=float)
    if beta == 1:
        return (math.pi / 2.0) * s * np.exp(-math.pi * s**2 / 4.0)
    if beta == 2:
        return (32.0 / math.pi**2) * s**2 * np.exp(-4.0 * s**2 / math.pi)
    if beta == 4:
        return (2.0**18 / (3.0**6 * math.pi**3)) * s**4 * np.exp(-64.0 * s**2 / (9.0 * math.pi))
    raise DomainError("surmise implemented for beta in {1, 2, 4}")


def wigner_surmise_cdf(s, beta: float = 2.0):
    from scipy.special import erf

    s = np.asarray(s, dtype=float)
    if beta == 2:
        return erf(2.0 * s / math.sqrt(math.pi)) - (4.0 * s / math.pi) * np.exp(-4.0 * s**2 / math.pi)
    raise DomainError("surmise CDF implemented for beta = 2")


def exponential_cdf(s):
    return 1.0 - np.exp(-np.asarray(s, dtype=float))


# ---------------------------------------------------------------------------
# KS machinery
# ---------------------------------------------------------------------------

def ks_statistic(points: np.ndarray, cdf) -> float:
    """sup |ECDF - F| against a closed-form CDF."""
    x = np.sort(np.asarray(points, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    k = np.arange(1, n + 1) / n
    return float(max(np.abs(k - f).max(), np.abs(k - 1.0 / n - f).max()))


def two_sample_ks(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    both = np.concatenate([a, b])
    ca = np.searchsorted(a, both, side="right") / a.size
    cb = np.searchsorted(b, both, side="right") / b.size
    return float(np.abs(ca - cb).max())


@dataclass(frozen=True)
class KsTestResult:
    statistic: float
    p_value: float
    permutations: int
    mode: str


def stationarity_test(
    group_a: list[np.ndarray],
    group_b: list[np.ndarray],
    permutations: int = 500,
    seed: int = 0,
    paired: bool = False,
) -> KsTestResult:
    """Two-sample KS between pooled point marginals with a replica-level
    permutation p-value.

    ``paired`` mode swaps the (a, b) pair of each replica independently
    (valid when each pair is exchangeable under the null, e.g. initial and
    terminal states of reversible dynamics); pooled mode permutes replica
    labels across the two groups.
    """
    if paired and len(group_a) != len(group_b):
        raise DomainError("paired test needs equally many replicas per group")
    sizes = {arr.shape[0] for arr in group_a} | {arr.shape[0] for arr in group_b}
    if len(sizes) != 1:
        raise DomainError(f"mismatched particle counts across replicas: {sorted(sizes)}")
    ga = [np.asarray(a, dtype=float) for a in group_a]
    gb = [np.asarray(b, dtype=float) for b in group_b]
    obs = two_sample_ks(np.concatenate(ga), np.concatenate(gb))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x5757,)))
    hits = 0
    if paired:
        stacked_a = np.stack(ga)
        stacked_b = np.stack(gb)
        for _ in range(permutations):
            flip = rng.random(len(ga)) < 0.5
            pa = np.where(flip[:, None], stacked_b, stacked_a).ravel()
            pb = np.where(flip[:, None], stacked_a, stacked_b).ravel()
            if two_sample_ks(pa, pb) >= obs:
                hits += 1
    else:
        pool = ga + gb
        na = len(ga)
        idx = np.arange(len(pool))
        for _ in range(permutations):
            rng.shuffle(idx)
            pa = np.concatenate([pool[i] for i in idx[:na]])
            pb = np.concatenate([pool[i] for i in idx[na:]])
            if two_sample_ks(pa, pb) >= obs:
                hits += 1
    p = (1.0 + hits) / (permutations + 1.0)
    return KsTestResult(obs, p, permutations, "paired" if paired else "pooled")


# ---------------------------------------------------------------------------
# histograms and densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HistogramEstimate:
    edges: np.ndarray
    counts: np.ndarray
    mode: str            # "density" | "probability"
    replicas: int

    @property
    def values(self) -> np.ndarray:
        widths = np.diff(self.edges)
        total = self.counts.sum()
        if total == 0:
            return np.zeros_like(widths)
        if self.mode == "density":
            return self.counts / (total * widths)
        return self.counts / total

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def histogram(points: np.ndarray, bins, range=None, mode="density", replicas=1) -> HistogramEstimate:
    counts, edges = np.histogram(np.asarray(points, dtype=float), bins=bins, range=range)
    return HistogramEstimate(edges, counts.astype(float), mode, replicas)


def spectral_density(
    samples: list[np.ndarray],
    scaling=None,
    bins: int = 80,
    range=None,
) -> HistogramEstimate:
    """Replica-averaged density of (optionally rescaled) points."""
    if not samples:
        raise DomainError("need at least one configuration")
    pts = []
    for cfg in samples:
        arr = scaling.apply(cfg) if scaling is not None else np.asarray(cfg)
        if np.iscomplexobj(arr):
            raise DomainError("spectral_density expects 1-D configurations; "
                              "use radial_density for planar samples")
        pts.append(arr)
    return histogram(np.concatenate(pts), bins=bins, range=range, replicas=len(samples))


def radial_density(samples: list[np.ndarray], bins: int = 40, r_max=None) -> HistogramEstimate:
    if not samples:
        raise DomainError("need at least one configuration")
    radii = np.concatenate([np.abs(np.asarray(c)) for c in samples])
    return histogram(radii, bins=bins, range=(0.0, r_max) if r_max else None,
                     replicas=len(samples))


def radial_chi2_pvalue(radii: np.ndarray, bins: int = 16, r_max: float = 1.0) -> float:
    """Chi-squared p-value for 'radial density linear in r' on [0, r_max]."""
    radii = np.asarray(radii, dtype=float)
    radii = radii[radii <= r_max]
    counts, edges = np.histogram(radii, bins=bins, range=(0.0, r_max))
    expected = np.diff(edges**2) / r_max**2 * counts.sum()
    stat = float(((counts - expected) ** 2 / expected).sum())
    return float(_chi2.sf(stat, bins - 1))


# ---------------------------------------------------------------------------
# spacings
# ---------------------------------------------------------------------------

def central_indices(n: int, fraction: float) -> np.ndarray:
    k = int(round(n * fraction))
    lo = (n - k) // 2
    return np.arange(lo, lo + k)


def unfolded_spacings(
    config: np.ndarray,
    fraction: float = 0.5,
    unfolding: str | None = "semicircle",
    beta: float = 2.0,
) -> np.ndarray:
    """Nearest-neighbour spacings of the central ``fraction`` of a sorted
    1-D configuration, unfolded and normalised to unit mean.

    ``unfolding="semicircle"`` maps points through N F((x - c)/R) with the
    closed-form semicircle CDF and support radius R = sqrt(2 beta N);
    ``None`` applies mean normalisation only.
    """
    x = np.asarray(config, dtype=float)
    if x.ndim != 1:
        raise DomainError("need a 1-D configuration")
    if (np.diff(x) <= 0).any():
        raise DomainError("configuration must be sorted strictly increasing")
    n = x.size
    if unfolding == "semicircle":
        radius = math.sqrt(2.0 * beta * n)
        e = n * semicircle_cdf(2.0 * (x - x.mean()) / radius)
    elif unfolding is None:
        e = x
    else:
        raise DomainError(f"unknown unfolding {unfolding!r}")
    idx = central_indices(n, fraction)
    if idx.size < 2:
        raise DomainError("window too small")
    s = np.diff(e[idx])
    if s.size < 10:
        raise DomainError(f"need at least 10 spacings in the window, got {s.size}")
    return s / s.mean()


def spacing_distribution(
    config: np.ndarray,
    fraction: float = 0.5,
    unfolding: str | None = "semicircle",
    beta: float = 2.0,
    bins: int = 40,
    s_max: float = 4.0,
) -> HistogramEstimate:
    s = unfolded_spacings(config, fraction, unfolding, beta)
    return histogram(s, bins=bins, range=(0.0, s_max))


def pooled_spacings(configs: list[np.ndarray], **kw) -> np.ndarray:
    return np.concatenate([unfolded_spacings(c, **kw) for c in configs])


# ---------------------------------------------------------------------------
# number variance
# ---------------------------------------------------------------------------

def number_variance(samples: list[np.ndarray], radii) -> dict:
    """Mean and variance of point counts in centred disks, per radius."""
    radii = np.asarray(radii, dtype=float)
    if not samples:
        raise DomainError("need at least one configuration")
    support = min(float(np.abs(np.asarray(c)).max()) for c in samples)
    if (radii > 0.7 * support).any():
        raise DomainError(
            f"radii must stay within 0.7 x sample support ({0.7 * support:.3g})"
        )
    counts = np.empty((len(samples), radii.size))
    for i, cfg in enumerate(samples):
        d = np.abs(np.asarray(cfg))
        counts[i] = (d[None, :] < radii[:, None]).sum(axis=1)
    return {
        "radii": radii,
        "mean": counts.mean(axis=0),
        "variance": counts.var(axis=0, ddof=1),
    }


def growth_exponent(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log y against log x, with rms residual."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((ly - A @ coef) ** 2)))
    return float(coef[0]), resid


def poisson_disk_samples(
    intensity: float, box_radius: float, replicas: int, seed: int = 0
) -> list[np.ndarray]:
    """Planar Poisson point configurations in a disk (control process)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x901,)))
    out = []
    area = math.pi * box_radius**2
    for _ in range(replicas):
        k = rng.poisson(intensity * area)
        r = box_radius * np.sqrt(rng.random(k))
        th = 2.0 * math.pi * rng.random(k)
        out.append(r * np.exp(1j * th))
    return out


# ---------------------------------------------------------------------------
# tagged-particle MSD
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MsdFit:
    lags: np.ndarray
    msd: np.ndarray
    exponent: float
    residual: float
    tagged: list[int]


def msd_tagged(paths: list[LabeledPath], particle="bulk", fit_window=None) -> MsdFit:
    """Replica-averaged squared displacement of a tagged particle with its
    log-log fitted growth exponent.

    Displacements are averaged over all time origins on the grid (the
    equilibrium runs have stationary increments), which tames the noise at
    short lags.  ``particle="bulk"`` averages over every particle starting
    within half the spectral radius of the configuration centre (a single
    tag is far too noisy for a slope estimate at desk scale); an integer
    tags that one particle.  For unconfined families whose cloud dilates
    (pure dyson), tag the centre particle explicitly: off-centre particles
    ride the ballistic expansion and mask the interaction slowdown.
    ``fit_window=(lo, hi)`` restricts the exponent fit to lags in [lo, hi];
    the window must still span a decade.
    """
    if len(paths) < 50:
        raise DomainError("need at least 50 replicas for a tagged-particle fit")
    times = paths[0].times
    if any(p.times.shape != times.shape or not np.allclose(p.times, times) for p in paths):
        raise DomainError("replica paths must share one time grid")
    lags = times[1:]
    fit_mask = np.ones(lags.size, dtype=bool)
    if fit_window is not None:
        fit_mask = (lags >= fit_window[0]) & (lags <= fit_window[1])
    fit_lags = lags[fit_mask]
    if fit_lags.size < 2 or fit_lags[-1] / fit_lags[0] < 10.0:
        raise DomainError("lag times must span at least one decade")
    disp = np.zeros(lags.size)
    norm = np.zeros(lags.size)
    tags = []
    for p in paths:
        x0 = p.positions[0]
        if particle == "bulk":
            center = np.median(x0.real) + (1j * np.median(x0.imag) if np.iscomplexobj(x0) else 0.0)
            radius = np.abs(x0 - center).max()
            sel = np.flatnonzero(np.abs(x0 - center) < 0.5 * radius)
            if sel.size == 0:
                sel = np.array([int(np.argmin(np.abs(x0 - center)))])
        else:
            sel = np.array([int(particle)])
        tags.extend(sel.tolist())
        traj = p.positions[:, sel]
        for k in range(1, times.size):
            d = np.abs(traj[k:] - traj[:-k]) ** 2
            disp[k - 1] += d.sum()
            norm[k - 1] += d.size
    msd = disp / norm
    exponent, resid = growth_exponent(lags[fit_mask], msd[fit_mask])
    return MsdFit(lags, msd, exponent, resid, tags)
