"""Labeled interacting-Brownian-motion integrators with truncated
logarithmic drifts.

Families (sigma = identity in all of them):

* ``dyson``    (d=1)  b_i = (beta/2) sum_{j != i, |x_i-x_j| < r} 1/(x_i-x_j)
* ``airy``     (d=1)  b_i = (beta/2) [ sum_{j != i, |x_j| < r} 1/(x_i-x_j) - 2 sqrt(r)/pi ]
                      (the compensator integral (1/pi) int_-r^0 sqrt(-x)/(-x) dx
                      evaluates to 2 sqrt(r)/pi in closed form)
* ``bessel``   (d=1)  b_i = a/(2 x_i) + (beta/2) sum_{j != i} 1/(x_i-x_j),  x in (0,inf)^N
* ``ginibre1`` (d=2)  b_i = sum_{j != i, |z_i-z_j| < r} (z_i-z_j)/|z_i-z_j|^2
* ``ginibre2`` (d=2)  b_i = -z_i + sum_{j != i, |z_j| < r} (z_i-z_j)/|z_i-z_j|^2

Planar states are complex arrays; (z-w)/|z-w|^2 is 1/conj(z-w).

Time stepping is Euler-Maruyama with rejection: a step that breaks the label
ordering (d=1), leaves (0,inf) (bessel), or produces a non-finite or
coincident state is retried on the two halves of the interval, with the
midpoint increment drawn from the Brownian bridge (dB_half = dB/2 +
sqrt(h)/2 Z).  The driving Brownian path is therefore refined, never
redrawn, which is what makes the frozen-tail re-solve of
:mod:`loggas.ifc` an exact replay.  After the pending halves are consumed
the step size relaxes multiplicatively toward the nominal value.

Particles outside a finite interaction window (airy / ginibre2 source
windows, dyson pair windows) do not repel each other, so with r smaller
than the populated region the ordering constraint can become genuinely
unenforceable; such trajectories end in the documented step-underflow
abort.  Collision-free runs need r to cover the support (r = inf for
dyson/bessel/ginibre1, r beyond the soft-edge depth for airy).

Pairwise sums are accumulated in sorted-position order (a label-free order,
well defined because accepted states are collision-free), so permuting the
particle labels together with their noise streams permutes the output path
bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CollisionError, DomainError, StepUnderflowError
from .rng import noise_rng

DRIFT_FAMILIES = ("dyson", "airy", "bessel", "ginibre1", "ginibre2")

RELAX = 1.5           # post-success multiplicative step-size recovery
DT_MIN_SHIFT = 20     # default dt_min = dt_nominal * 2**-20


@dataclass(frozen=True)
class DriftModel:
    family: str
    beta: float = 2.0
    r: float = math.inf
    a: float | None = None

    def __post_init__(self):
        if self.family not in DRIFT_FAMILIES:
            raise DomainError(
                f"unknown drift family {self.family!r}; expected one of {DRIFT_FAMILIES}"
            )
        if not self.beta > 0:
            raise DomainError("beta must be > 0")
        if not self.r > 0:
            raise DomainError("truncation radius r must be > 0")
        if self.family == "airy" and not math.isfinite(self.r):
            raise DomainError("the airy drift needs a finite truncation radius "
                              "(its compensator grows like sqrt(r))")
        if self.family == "bessel" and (self.a is None or not (self.a >= 1)):
            raise DomainError("bessel drift requires parameter a >= 1")
        if self.family.startswith("ginibre") and self.beta != 2:
            raise DomainError("the planar (d = 2) models require beta = 2")

    @property
    def dim(self) -> int:
        return 2 if self.family.startswith("ginibre") else 1


def _sorted_order(x: np.ndarray) -> np.ndarray:
    """Label-free column order of one configuration (1-D or planar)."""
    if np.iscomplexobj(x):
        return np.lexsort((x.imag, x.real))
    return np.argsort(x, kind="stable")


def drift_field(model: DriftModel, states: np.ndarray) -> np.ndarray:
    """Drift of every particle for a batch of configurations.

    ``states`` has shape (B, N): float for 1-D families, complex for planar
    ones.  Raises :class:`CollisionError` on a zero gap.
    """
    X = np.atleast_2d(states)
    B, N = X.shape
    planar = model.family.startswith("ginibre")
    if planar != np.iscomplexobj(X):
        raise DomainError(f"{model.family} expects a {'planar' if planar else '1-D'} state")
    if model.family == "bessel" and (X <= 0).any():
        raise DomainError("bessel state must lie in (0, inf)^N")

    if N == 1:
        pair = np.zeros_like(X)
        order = None
    else:
        if planar:
            order = np.empty((B, N), dtype=np.intp)
            for b in range(B):
                order[b] = _sorted_order(X[b])
        else:
            order = np.argsort(X, axis=1, kind="stable")
        Xs = np.take_along_axis(X, order, axis=1)
        diff = X[:, :, None] - Xs[:, None, :]
        dist = np.abs(diff)
        invperm = np.argsort(order, axis=1)
        rows = np.arange(B)[:, None], np.arange(N)[None, :]
        self_cols = invperm
        dist_check = dist.copy()
        dist_check[rows[0], rows[1], self_cols] = np.inf
        gap = dist_check.min()
        if gap == 0.0:
            raise CollisionError("zero gap in configuration; step size violation")
        with np.errstate(divide="ignore", invalid="ignore"):
            # planar Coulomb field (z-w)/|z-w|^2 as a complex number
            inv = diff / dist**2 if planar else 1.0 / diff
        inv[rows[0], rows[1], self_cols] = 0.0
        if model.family in ("dyson", "ginibre1") and math.isfinite(model.r):
            inv[dist >= model.r] = 0.0
        elif model.family in ("airy", "ginibre2") and math.isfinite(model.r):
            colmask = np.abs(Xs) >= model.r
            inv[np.broadcast_to(colmask[:, None, :], inv.shape)] = 0.0
        pair = inv.sum(axis=2)

    if planar:
        out = pair.astype(complex)
        if model.family == "ginibre2":
            out = out - X
        return out
    out = 0.5 * model.beta * pair
    if model.family == "airy":
        out = out - 0.5 * model.beta * (2.0 * math.sqrt(model.r) / math.pi)
    elif model.family == "bessel":
        out = out + model.a / (2.0 * X)
    return out


def drift(model: DriftModel, i: int, state: np.ndarray) -> np.ndarray:
    """Drift vector (length d) of particle ``i`` in ``state``."""
    x = np.asarray(state)
    if not (0 <= i < x.shape[-1]):
        raise DomainError(f"particle index {i} out of range")
    v = drift_field(model, x[None, :])[0, i]
    if model.dim == 2:
        return np.array([v.real, v.imag])
    return np.array([v])


def min_gap(positions: np.ndarray) -> float:
    """Smallest pairwise distance of a configuration."""
    x = np.asarray(positions)
    n = x.shape[0]
    if n < 2:
        return math.inf
    if np.iscomplexobj(x):
        d = np.abs(x[:, None] - x[None, :])
        d[np.diag_indices(n)] = np.inf
        return float(d.min())
    xs = np.sort(x)
    return float(np.diff(xs).min())


@dataclass
class SimState:
    """State of one trajectory between steps."""

    t: float
    positions: np.ndarray
    dt_current: float
    dt_nominal: float
    dt_min: float
    label_order: np.ndarray | None     # 1-D: ordering the labels must keep
    rejections: int = 0
    min_gap: float = math.inf
    steps: int = 0

    def stats(self) -> dict:
        return {"rejections": self.rejections, "min_gap": self.min_gap, "steps": self.steps}


def init_state(model: DriftModel, positions: np.ndarray, dt: float, dt_min: float | None = None) -> SimState:
    x = np.asarray(positions, dtype=complex if model.dim == 2 else float).copy()
    if x.ndim != 1:
        raise DomainError("initial configuration must be one particle per entry")
    if not np.isfinite(x.view(float)).all():
        raise DomainError("initial configuration must be finite")
    if model.family == "bessel" and (x.real <= 0).any():
        raise DomainError("bessel initial configuration must be positive")
    g = min_gap(x)
    if g == 0.0:
        raise CollisionError("initial configuration has coincident particles")
    order = None if model.dim == 2 else np.argsort(x, kind="stable")
    if not dt > 0:
        raise DomainError("dt must be > 0")
    return SimState(
        t=0.0,
        positions=x,
        dt_current=dt,
        dt_nominal=dt,
        dt_min=dt * 2.0**-DT_MIN_SHIFT if dt_min is None else dt_min,
        label_order=order,
        min_gap=g,
    )


def _acceptable(model: DriftModel, state: SimState, prop: np.ndarray) -> tuple[bool, float]:
    if not np.isfinite(prop.view(float)).all():
        return False, 0.0
    if state.label_order is not None:
        ordered = prop[state.label_order]
        if model.family == "bessel" and ordered[0] <= 0.0:
            return False, 0.0
        gaps = np.diff(ordered)
        if gaps.size and gaps.min() <= 0.0:
            return False, 0.0
        return True, float(gaps.min()) if gaps.size else math.inf
    g = min_gap(prop)
    return g > 0.0, g


def gaussian_increments(rng: np.random.Generator, n: int, h: float, planar: bool) -> np.ndarray:
    if planar:
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return math.sqrt(h) * z
    return math.sqrt(h) * rng.standard_normal(n)


def step(
    state: SimState,
    model: DriftModel,
    noise: np.ndarray,
    rng: np.random.Generator,
    record: list | None = None,
) -> SimState:
    """Advance the configuration across one nominal interval of length
    ``state.dt_current`` driven by ``noise``.

    Rejections bisect the interval with bridge-consistent increments, so the
    whole increment is always consumed and the underlying Brownian path is
    independent of the acceptance history.  Accepted sub-steps are appended
    to ``record`` as (t_start, h, dB, state_after).
    """
    x = state.positions.copy()
    planar = model.dim == 2
    if noise.shape != x.shape:
        raise DomainError("noise increments must match the configuration shape")
    t = state.t
    rejections = state.rejections
    mgap = state.min_gap
    steps = state.steps
    pending = [(float(state.dt_current), np.asarray(noise))]
    last_h = float(state.dt_current)
    while pending:
        h, dB = pending.pop()
        b = drift_field(model, x[None, :])[0]
        prop = x + h * b + dB
        ok, gap = _acceptable(model, state, prop)
        if ok:
            if record is not None:
                record.append((t, h, dB, prop.copy()))
            x = prop
            t += h
            last_h = h
            steps += 1
            mgap = min(mgap, gap)
            continue
        half = 0.5 * h
        if half < state.dt_min:
            raise StepUnderflowError(
                f"step size underflow below dt_min = {state.dt_min:.3e} at t = {t:.6g} "
                "(near-collision hard failure)",
                t=t,
                dt=half,
                min_gap=min_gap(x),
            )
        rejections += 1
        z = gaussian_increments(rng, x.shape[0], 1.0, planar)
        first = 0.5 * dB + 0.5 * math.sqrt(h) * z
        pending.append((half, dB - first))
        pending.append((half, first))
    return replace(
        state,
        t=t,
        positions=x,
        dt_current=min(state.dt_nominal, RELAX * last_h),
        rejections=rejections,
        min_gap=mgap,
        steps=steps,
    )


@dataclass
class LabeledPath:
    """Grid-sampled trajectory of N labeled particles plus, when recorded,
    the accepted step schedule and its driving increments."""

    model: DriftModel
    times: np.ndarray                      # (G,)
    positions: np.ndarray                  # (G, N)
    seed: int | None = None
    replica: int = 0
    step_times: np.ndarray | None = None   # (S,) start time of each accepted step
    step_sizes: np.ndarray | None = None   # (S,)
    step_increments: np.ndarray | None = None  # (S, N)
    step_states: np.ndarray | None = None  # (S+1, N), row 0 = initial state
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_particles(self) -> int:
        return self.positions.shape[1]

    def has_noise_record(self) -> bool:
        return self.step_increments is not None


def evolve(
    initial: np.ndarray,
    model: DriftModel,
    t_final: float,
    dt: float,
    seed: int = 0,
    replica: int = 0,
    grid_points: int = 101,
    dt_min: float | None = None,
    record_noise: bool = True,
    rng: np.random.Generator | None = None,
) -> LabeledPath:
    """Integrate the labeled SDE on [0, t_final]; deterministic given
    (seed, replica).

    Grid samples hold the nearest accepted state at or before each grid
    time.  With ``record_noise`` the accepted schedule (times, sizes,
    increments, states) is retained for the frozen-tail re-solve.
    """
    if t_final < 0:
        raise DomainError("t_final must be >= 0")
    state = init_state(model, initial, dt, dt_min)
    x0 = state.positions.copy()
    if t_final == 0.0:
        return LabeledPath(model, np.zeros(1), x0[None, :], seed, replica,
                           diagnostics=state.stats() | {"max_abs": float(np.abs(x0).max())})
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2 when t_final > 0")
    if rng is None:
        rng = noise_rng(seed, replica)
    grid = np.linspace(0.0, t_final, grid_points)
    out = np.empty((grid_points, x0.shape[0]), dtype=x0.dtype)
    out[0] = x0
    filled = 1
    record: list = []
    max_abs = float(np.abs(x0).max())
    eps = 1e-12 * t_final
    x_last = x0
    while state.t < t_final - eps:
        h = min(state.dt_current, t_final - state.t)
        state = replace(state, dt_current=h)
        noise = gaussian_increments(rng, x0.shape[0], h, model.dim == 2)
        seg: list = []
        state = step(state, model, noise, rng, seg)
        for tk, hk, _dbk, xk in seg:
            while filled < grid_points and grid[filled] < tk + hk - eps:
                out[filled] = x_last
                filled += 1
            x_last = xk
            max_abs = max(max_abs, float(np.abs(xk).max()))
        if record_noise:
            record.extend(seg)
    while filled < grid_points:
        out[filled] = state.positions
        filled += 1
    path = LabeledPath(
        model, grid, out, seed, replica,
        diagnostics=state.stats() | {"max_abs": max_abs},
    )
    if record_noise:
        S = len(record)
        n = x0.shape[0]
        st = np.empty(S)
        hs = np.empty(S)
        inc = np.empty((S, n), dtype=x0.dtype)
        states = np.empty((S + 1, n), dtype=x0.dtype)
        states[0] = x0
        for k, (tk, hk, dbk, xk) in enumerate(record):
            st[k], hs[k], inc[k], states[k + 1] = tk, hk, dbk, xk
        path.step_times, path.step_sizes = st, hs
        path.step_increments, path.step_states = inc, states
    return path


def replay(
    initial: np.ndarray,
    model: DriftModel,
    step_sizes: np.ndarray,
    step_increments: np.ndarray,
) -> np.ndarray:
    """Re-run a recorded accepted schedule; returns states (S+1, N).

    Bitwise identical to the original integration because drift sums are
    accumulated in the label-free sorted order.
    """
    x = np.asarray(initial).copy()
    states = np.empty((len(step_sizes) + 1, x.shape[0]), dtype=x.dtype)
    states[0] = x
    for k, (h, dB) in enumerate(zip(step_sizes, step_increments)):
        x = x + h * drift_field(model, x[None, :])[0] + dB
        states[k + 1] = x
    return states
