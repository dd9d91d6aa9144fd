"""Command line entry point: one binary, six subcommands.

    loggas sample     draw ensemble configurations            -> samples.csv
    loggas evolve     integrate a labeled SDE                  -> trajectory.csv [+ noise.csv]
    loggas ifc-check  frozen-tail re-solve consistency table   -> ifc.csv
    loggas kernel     kernel values / Fredholm determinants    -> kernel.csv | det.json
    loggas measures   ibp | qg-ratio identity checks           -> ibp.json | qg.json
    loggas stats      estimators + verdicts over run manifests -> *.csv + verdict.json

Every subcommand writes a manifest.json naming each output with its SHA-256
hash; identical configs reproduce identical data bytes.  A flat key=value
config file (keys spelled like the long flags) can seed any subcommand via
--config; explicit flags override file values and unknown keys are
rejected.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, dynamics, ensembles, ifc, io, kernels, measures, stats
from .errors import LoggasError, DomainError

_CONFIG_KEY_CACHE: dict[str, set] = {}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, default=None,
                   help="flat key=value file; flags override file values")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(prog="loggas", description=__doc__,
                                   formatter_class=argparse.RawDescriptionHelpFormatter)
    root.add_argument("--version", action="version", version=f"loggas {__version__}")
    sub = root.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("sample", help="draw random-matrix ensemble configurations")
    _add_common(p)
    p.add_argument("--family", choices=ensembles.ENSEMBLE_FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--replicas", type=int, default=1)

    p = sub.add_parser("evolve", help="integrate a labeled interacting SDE")
    _add_common(p)
    p.add_argument("--model", choices=dynamics.DRIFT_FAMILIES, required=True)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, default=math.inf, help="drift truncation radius")
    p.add_argument("--a", type=float, default=None, help="bessel parameter (a >= 1)")
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--dt-min", type=float, default=None)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--grid-points", type=int, default=101)
    p.add_argument("--record-noise", action="store_true",
                   help="write noise.csv (required for ifc-check)")
    p.add_argument("--init", default="equilibrium",
                   help='"equilibrium" or "scaled:<factor>"')

    p = sub.add_parser("ifc-check", help="frozen-tail re-solve consistency table")
    _add_common(p)
    p.add_argument("--trajectory", type=Path, required=True,
                   help="evolve manifest (or its directory)")
    p.add_argument("--ms", type=str, required=True, help="comma list of head sizes")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--replica", type=int, default=0)

    p = sub.add_parser("kernel", help="kernel evaluations and Fredholm determinants")
    _add_common(p)
    p.add_argument("--family", choices=kernels.FAMILIES, required=True)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--mode", choices=("grid", "det"), default="grid")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--x-min", type=float, default=-2.0)
    p.add_argument("--x-max", type=float, default=2.0)
    p.add_argument("--x-num", type=int, default=41)
    p.add_argument("--y-min", type=float, default=None)
    p.add_argument("--y-max", type=float, default=None)
    p.add_argument("--y-num", type=int, default=None)
    p.add_argument("--domain-min", type=float, default=0.0)
    p.add_argument("--domain-max", type=float, default=1.0)
    p.add_argument("--chi", type=float, default=-1.0)
    p.add_argument("--order", type=int, default=24)

    p = sub.add_parser("measures", help="measure-theoretic identity checks")
    _add_common(p)
    p.add_argument("action", choices=("ibp", "qg-ratio"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--replicas", type=int, default=100000)
    p.add_argument("--bump-center", type=float, default=0.5)
    p.add_argument("--bump-width", type=float, default=2.0)
    p.add_argument("--r", type=float, default=0.5, help="qg-ratio window radius")
    p.add_argument("--m", type=int, default=2, help="qg-ratio inside count")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--grid", type=int, default=24)

    p = sub.add_parser("stats", help="estimators and verdicts over run outputs")
    _add_common(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--analysis",
                   choices=("density", "spacing", "msd", "variance", "stationarity", "radial"),
                   required=True)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--normalize", choices=("none", "global"), default="global")
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--radii", type=str, default="2,4,8")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--exponent-below", type=float, default=None)
    p.add_argument("--exponent-near", type=str, default=None, help="CENTER,TOL")
    p.add_argument("--permutations", type=int, default=399)
    p.add_argument("--against", type=Path, default=None,
                   help="sample manifest to test terminal states against (pooled mode)")
    p.add_argument("--particle", default="bulk")
    p.add_argument("--fit-window", type=str, default=None,
                   help="LO,HI lag window for the msd exponent fit")
    return root


def _parser_keys(subcommand: str) -> set:
    if subcommand not in _CONFIG_KEY_CACHE:
        parser = build_parser()
        subaction = next(a for a in parser._actions
                         if isinstance(a, argparse._SubParsersAction))
        sp = subaction.choices[subcommand]
        keys = set()
        for act in sp._actions:
            for opt in act.option_strings:
                if opt.startswith("--"):
                    keys.add(opt[2:])
        _CONFIG_KEY_CACHE[subcommand] = keys
    return _CONFIG_KEY_CACHE[subcommand]


def _load_config_file(path: Path, subcommand: str) -> list[str]:
    """Turn key=value lines into an argv prefix (flags still override)."""
    known = _parser_keys(subcommand)
    argv = []
    for ln, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{ln}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise DomainError(f"{path}:{ln}: unknown key {key!r} for subcommand {subcommand!r}")
        if value.lower() in ("true", "yes", "on"):
            argv.append(f"--{key}")
        elif value.lower() in ("false", "no", "off"):
            pass
        else:
            argv.extend([f"--{key}", value])
    return argv


def _find_config_flag(argv: list[str]) -> Path | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return Path(argv[i + 1])
        if tok.startswith("--config="):
            return Path(tok.split("=", 1)[1])
    return None


def parse_config(argv: list[str]) -> argparse.Namespace:
    """Parse flags and optional config file; file values act as defaults."""
    parser = build_parser()
    if not argv:
        parser.error("missing subcommand")
    cfg_path = _find_config_flag(argv)
    if cfg_path is not None:
        injected = _load_config_file(cfg_path, argv[0])
        argv = [argv[0]] + injected + argv[1:]
    args = parser.parse_args(argv)
    _validate(args)
    return args


def _validate(args: argparse.Namespace):
    if getattr(args, "replicas", 1) is not None and getattr(args, "replicas", 1) < 1:
        raise DomainError("--replicas must be >= 1")
    # constraint-naming validation is delegated to the spec types
    if args.subcommand == "sample":
        ensembles.EnsembleSpec(args.family, args.n, args.beta, args.a, args.seed)
    elif args.subcommand == "evolve":
        dynamics.DriftModel(args.model, args.beta, args.r, args.a)
        if args.t_final < 0:
            raise DomainError("--t-final must be >= 0")
    elif args.subcommand == "kernel":
        kernels.KernelSpec(args.family, {"a": args.a} if args.a is not None else {})


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"config", "out"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, Path):
            v = str(v)
        if isinstance(v, float) and math.isinf(v):
            v = "inf"
        out[k] = v
    return out


def run_sample(args) -> list[Path]:
    spec = ensembles.EnsembleSpec(args.family, args.n, args.beta, args.a, args.seed)
    planar = args.family == "ginibre"
    header = ["replica", "index", "x", "y"] if planar else ["replica", "index", "x"]
    rows = []
    for k in range(args.replicas):
        cfg = ensembles.sample(spec, k)
        for i, v in enumerate(cfg):
            rows.append((k, i, v.real, v.imag) if planar else (k, i, v))
    return [io.write_csv(args.out / "samples.csv", header, rows)], {"replicas": args.replicas}


def _initial_for(args, replica: int) -> np.ndarray:
    if args.model in ("dyson", "airy"):
        spec = ensembles.EnsembleSpec("gaussian-beta", args.n, args.beta, None, args.seed)
        x = ensembles.sample(spec, replica)
        if args.model == "airy":
            x = ensembles.ScalingMap("soft-edge", args.n).apply(x)
    elif args.model == "bessel":
        spec = ensembles.EnsembleSpec("laguerre-beta", args.n, args.beta, args.a, args.seed)
        x = ensembles.sample(spec, replica)
    else:
        spec = ensembles.EnsembleSpec("ginibre", args.n, 2.0, None, args.seed)
        x = ensembles.sample(spec, replica)
    if args.init == "equilibrium":
        return x
    if args.init.startswith("scaled:"):
        return float(args.init.split(":", 1)[1]) * x
    raise DomainError(f'unknown --init {args.init!r}; use "equilibrium" or "scaled:<factor>"')


def run_evolve(args) -> tuple[list[Path], dict]:
    model = dynamics.DriftModel(args.model, args.beta, args.r, args.a)
    planar = model.dim == 2
    traj_header = ["replica", "time_index", "time", "particle"] + (["x", "y"] if planar else ["x"])
    noise_header = ["replica", "step", "t", "h", "particle"] + (["dbx", "dby"] if planar else ["dbx"])
    traj_rows, noise_rows = [], []
    total_rej = 0
    gmin = math.inf
    max_abs = 0.0
    violations = 0
    incomplete = []
    for k in range(args.replicas):
        x0 = _initial_for(args, k)
        try:
            path = dynamics.evolve(
                x0, model, args.t_final, args.dt, seed=args.seed, replica=k,
                grid_points=args.grid_points, dt_min=args.dt_min,
                record_noise=args.record_noise,
            )
        except LoggasError as exc:
            incomplete.append({"replica": k, "error": str(exc)})
            continue
        total_rej += path.diagnostics["rejections"]
        gmin = min(gmin, path.diagnostics["min_gap"])
        max_abs = max(max_abs, path.diagnostics["max_abs"])
        for j, t in enumerate(path.times):
            state = path.positions[j]
            ordered = np.sort(state.real) if not planar else None
            if not planar:
                if (np.diff(ordered) <= 0).any():
                    violations += 1
                if model.family == "bessel" and (state.real <= 0).any():
                    violations += 1
            for i in range(path.n_particles):
                v = state[i]
                traj_rows.append(
                    (k, j, t, i, v.real, v.imag) if planar else (k, j, t, i, v)
                )
        if args.record_noise:
            for s in range(len(path.step_sizes)):
                for i in range(path.n_particles):
                    v = path.step_increments[s, i]
                    noise_rows.append(
                        (k, s, path.step_times[s], path.step_sizes[s], i, v.real, v.imag)
                        if planar
                        else (k, s, path.step_times[s], path.step_sizes[s], i, v)
                    )
    outputs = [io.write_csv(args.out / "trajectory.csv", traj_header, traj_rows)]
    if args.record_noise:
        outputs.append(io.write_csv(args.out / "noise.csv", noise_header, noise_rows))
    diag = {
        "rejections": total_rej,
        "min_gap": gmin,
        "max_abs": max_abs,
        "ordering_violations": violations,
        "failed_replicas": incomplete,
    }
    return outputs, diag


def _load_trajectory(manifest_path: Path, replica: int):
    """Rebuild a LabeledPath (with bitwise-replayed step states) from CSVs."""
    manifest, base = io.read_manifest(manifest_path)
    if manifest["subcommand"] != "evolve":
        raise DomainError("--trajectory must point at an evolve manifest")
    io.verify_outputs(manifest, base)
    cfg = manifest["config"]
    r = math.inf if cfg["r"] == "inf" else float(cfg["r"])
    model = dynamics.DriftModel(cfg["model"], float(cfg["beta"]), r,
                                None if cfg["a"] is None else float(cfg["a"]))
    planar = model.dim == 2
    traj = io.read_csv(io.manifest_output(manifest, base, "trajectory.csv"))
    sel = traj["replica"] == replica
    if not sel.any():
        raise DomainError(f"replica {replica} not present in trajectory")
    times_idx = traj["time_index"][sel].astype(int)
    particles = traj["particle"][sel].astype(int)
    vals = traj["x"][sel] + 1j * traj["y"][sel] if planar else traj["x"][sel]
    n = particles.max() + 1
    g = times_idx.max() + 1
    positions = np.empty((g, n), dtype=complex if planar else float)
    positions[times_idx, particles] = vals
    times = np.empty(g)
    times[times_idx] = traj["time"][sel]

    npath = [e for e in manifest["outputs"] if e["path"].endswith("noise.csv")]
    if not npath:
        raise DomainError("trajectory was recorded without noise "
                          "(re-run evolve with record-noise = true)")
    noise = io.read_csv(base / npath[0]["path"])
    nsel = noise["replica"] == replica
    steps = noise["step"][nsel].astype(int)
    pidx = noise["particle"][nsel].astype(int)
    nvals = noise["dbx"][nsel] + 1j * noise["dby"][nsel] if planar else noise["dbx"][nsel]
    S = steps.max() + 1
    inc = np.empty((S, n), dtype=complex if planar else float)
    inc[steps, pidx] = nvals
    st = np.empty(S)
    hs = np.empty(S)
    st[steps] = noise["t"][nsel]
    hs[steps] = noise["h"][nsel]

    states = dynamics.replay(positions[0], model, hs, inc)
    # integrity: the replay must regenerate the recorded grid states bitwise
    ends = st + hs
    eps = 1e-12 * times[-1]
    idx = np.searchsorted(ends, times + eps, side="right")
    if not (states[idx] == positions).all():
        raise DomainError("trajectory/noise record mismatch: replay does not "
                          "reproduce the recorded grid states")
    return dynamics.LabeledPath(
        model, times, positions, int(cfg["seed"]), replica,
        step_times=st, step_sizes=hs, step_increments=inc, step_states=states,
    )


def run_ifc_check(args) -> tuple[list[Path], dict]:
    path = _load_trajectory(args.trajectory, args.replica)
    ms = [int(s) for s in str(args.ms).split(",") if s]
    rows = ifc.consistency_report(path, ms=ms, epsilon=args.epsilon)
    out = io.write_csv(
        args.out / "ifc.csv",
        ["m", "max_dev", "perturbed_dev", "epsilon", "perturbed_index", "status"],
        [(r.m, r.max_dev, r.perturbed_dev, r.epsilon,
          -1 if r.perturbed_index is None else r.perturbed_index, r.status)
         for r in rows],
    )
    return [out], {"max_dev": max(r.max_dev for r in rows)}


def run_kernel(args) -> tuple[list[Path], dict]:
    params = {"a": args.a} if args.a is not None else {}
    spec = kernels.KernelSpec(args.family, params)
    if args.mode == "grid":
        xs = np.linspace(args.x_min, args.x_max, args.x_num)
        ys = np.linspace(
            args.y_min if args.y_min is not None else args.x_min,
            args.y_max if args.y_max is not None else args.x_max,
            args.y_num if args.y_num is not None else args.x_num,
        )
        mat = kernels.kernel_matrix(spec, args.s, xs, args.t, ys)
        rows = [
            (args.s, xs[i], args.t, ys[j], mat[i, j])
            for i in range(xs.size) for j in range(ys.size)
        ]
        out = io.write_csv(args.out / "kernel.csv", ["s", "x", "t", "y", "value"], rows)
        return [out], {"points": len(rows)}
    res = kernels.fredholm_det(spec, (args.domain_min, args.domain_max), args.order, args.chi)
    payload = {
        "family": args.family,
        "domain": [args.domain_min, args.domain_max],
        "order": args.order,
        "value": res.value,
        "refinement_error": res.refinement_error,
        "converged": res.converged,
    }
    return [io.write_json(args.out / "det.json", payload)], {"converged": res.converged}


def run_measures(args) -> tuple[list[Path], dict]:
    spec = ensembles.EnsembleSpec("gaussian-beta", args.n, args.beta, None, args.seed)
    if args.action == "ibp":
        field = measures.LogDerivativeField("dyson", args.beta, confinement=1.0)
        fn = measures.SmoothBump(args.bump_center, args.bump_width)
        res = measures.verify_ibp(spec, field, fn, args.replicas)
        payload = {
            "lhs": res.lhs,
            "rhs": res.rhs,
            "stderr": res.stderr,
            "replicas": res.replicas,
            "abs_diff": abs(res.lhs - res.rhs),
            "inconclusive": res.inconclusive,
            "pass_3sigma": abs(res.lhs - res.rhs) <= 3.0 * res.stderr,
        }
        return [io.write_json(args.out / "ibp.json", payload)], {"pass": payload["pass_3sigma"]}
    res = measures.quasi_gibbs_ratio(spec, args.r, args.samples, args.m, args.grid)
    payload = {
        "spread_min": res.spread_min,
        "spread_max": res.spread_max,
        "spread_quantiles": res.quantiles(),
        "conditioned": res.conditioned,
        "samples": res.sampled,
    }
    return [io.write_json(args.out / "qg.json", payload)], {"conditioned": res.conditioned}


# -- stats ------------------------------------------------------------------

def _load_sample_configs(manifest_path: Path) -> tuple[list[np.ndarray], dict]:
    manifest, base = io.read_manifest(manifest_path)
    io.verify_outputs(manifest, base)
    cfg = manifest["config"]
    if manifest["subcommand"] == "sample":
        data = io.read_csv(io.manifest_output(manifest, base, "samples.csv"))
        planar = cfg["family"] == "ginibre"
        vals = data["x"] + 1j * data["y"] if planar else data["x"]
        reps = data["replica"].astype(int)
        return [vals[reps == k] for k in np.unique(reps)], cfg
    if manifest["subcommand"] == "evolve":
        data = io.read_csv(io.manifest_output(manifest, base, "trajectory.csv"))
        planar = cfg["model"].startswith("ginibre")
        vals = data["x"] + 1j * data["y"] if planar else data["x"]
        reps = data["replica"].astype(int)
        last = data["time_index"].astype(int).max()
        sel = data["time_index"].astype(int) == last
        return [np.sort(vals[sel & (reps == k)]) if not planar else vals[sel & (reps == k)]
                for k in np.unique(reps)], cfg
    raise DomainError(f"stats cannot read a {manifest['subcommand']!r} manifest")


def _load_paths(manifest_path: Path) -> list[dynamics.LabeledPath]:
    manifest, base = io.read_manifest(manifest_path)
    io.verify_outputs(manifest, base)
    cfg = manifest["config"]
    if manifest["subcommand"] != "evolve":
        raise DomainError("this analysis needs an evolve manifest")
    data = io.read_csv(io.manifest_output(manifest, base, "trajectory.csv"))
    planar = cfg["model"].startswith("ginibre")
    r = math.inf if cfg["r"] == "inf" else float(cfg["r"])
    model = dynamics.DriftModel(cfg["model"], float(cfg["beta"]), r,
                                None if cfg["a"] is None else float(cfg["a"]))
    vals = data["x"] + 1j * data["y"] if planar else data["x"]
    reps = data["replica"].astype(int)
    out = []
    for k in np.unique(reps):
        sel = reps == k
        ti = data["time_index"][sel].astype(int)
        pi = data["particle"][sel].astype(int)
        g, n = ti.max() + 1, pi.max() + 1
        pos = np.empty((g, n), dtype=complex if planar else float)
        pos[ti, pi] = vals[sel]
        times = np.empty(g)
        times[ti] = data["time"][sel]
        out.append(dynamics.LabeledPath(model, times, pos, int(cfg["seed"]), int(k)))
    return out


def _verdict(name: str, statistic: float, threshold, passed: bool) -> dict:
    return {"name": name, "statistic": statistic, "threshold": threshold, "pass": bool(passed)}


def run_stats(args) -> tuple[list[Path], dict]:
    verdicts = []
    outputs = []
    if args.analysis == "density":
        configs, cfg = _load_sample_configs(args.manifest)
        if args.normalize == "global":
            n = int(cfg["n"])
            beta = float(cfg.get("beta", 2.0))
            scale = ensembles.semicircle_radius(n, beta) / 2.0
            configs = [c / scale for c in configs]
        hist = stats.spectral_density(configs, bins=args.bins)
        outputs.append(io.write_csv(
            args.out / "density.csv", ["bin_lo", "bin_hi", "density"],
            zip(hist.edges[:-1], hist.edges[1:], hist.values),
        ))
        if args.normalize == "global":
            ks = stats.ks_statistic(np.concatenate(configs), stats.semicircle_cdf)
            thr = args.threshold if args.threshold is not None else 0.03
            verdicts.append(_verdict("semicircle-ks", ks, thr, ks <= thr))
    elif args.analysis == "radial":
        configs, cfg = _load_sample_configs(args.manifest)
        n = int(cfg["n"])
        radii = np.concatenate([np.abs(c) for c in configs]) / math.sqrt(n)
        hist = stats.histogram(radii, bins=args.bins, range=(0.0, 1.2))
        outputs.append(io.write_csv(
            args.out / "radial.csv", ["bin_lo", "bin_hi", "density"],
            zip(hist.edges[:-1], hist.edges[1:], hist.values),
        ))
        p = stats.radial_chi2_pvalue(radii, bins=16, r_max=0.95)
        thr = args.threshold if args.threshold is not None else 0.01
        verdicts.append(_verdict("radial-chi2-pvalue", p, thr, p > thr))
    elif args.analysis == "spacing":
        configs, cfg = _load_sample_configs(args.manifest)
        beta = float(cfg.get("beta", 2.0))
        sp = stats.pooled_spacings(configs, fraction=args.fraction,
                                   unfolding="semicircle", beta=beta)
        hist = stats.histogram(sp, bins=args.bins, range=(0.0, 4.0))
        outputs.append(io.write_csv(
            args.out / "spacing.csv", ["bin_lo", "bin_hi", "density"],
            zip(hist.edges[:-1], hist.edges[1:], hist.values),
        ))
        if beta == 2.0:
            sup = stats.ks_statistic(sp, stats.wigner_surmise_cdf)
            thr = args.threshold if args.threshold is not None else 0.05
            verdicts.append(_verdict("surmise-sup-distance", sup, thr, sup <= thr))
    elif args.analysis == "msd":
        paths = _load_paths(args.manifest)
        window = None
        if args.fit_window is not None:
            window = tuple(float(v) for v in args.fit_window.split(","))
        fit = stats.msd_tagged(paths, args.particle, fit_window=window)
        outputs.append(io.write_csv(
            args.out / "msd.csv", ["lag", "msd"], zip(fit.lags, fit.msd),
        ))
        if args.exponent_below is not None:
            verdicts.append(_verdict("msd-exponent-below", fit.exponent,
                                     args.exponent_below, fit.exponent < args.exponent_below))
        if args.exponent_near is not None:
            center, tol = (float(v) for v in args.exponent_near.split(","))
            verdicts.append(_verdict("msd-exponent-near", fit.exponent,
                                     [center, tol], abs(fit.exponent - center) <= tol))
        if not verdicts:
            verdicts.append(_verdict("msd-exponent", fit.exponent, None, True))
    elif args.analysis == "variance":
        configs, _cfg = _load_sample_configs(args.manifest)
        radii = [float(v) for v in args.radii.split(",")]
        nv = stats.number_variance(configs, radii)
        outputs.append(io.write_csv(
            args.out / "variance.csv", ["radius", "mean", "variance"],
            zip(nv["radii"], nv["mean"], nv["variance"]),
        ))
        expo, _ = stats.growth_exponent(nv["radii"], nv["variance"])
        if args.exponent_below is not None:
            verdicts.append(_verdict("variance-exponent-below", expo,
                                     args.exponent_below, expo < args.exponent_below))
        if args.exponent_near is not None:
            center, tol = (float(v) for v in args.exponent_near.split(","))
            verdicts.append(_verdict("variance-exponent-near", expo,
                                     [center, tol], abs(expo - center) <= tol))
        if not verdicts:
            verdicts.append(_verdict("variance-exponent", expo, None, True))
    else:  # stationarity
        paths = _load_paths(args.manifest)
        terminal = [np.sort(p.positions[-1].real) for p in paths]
        if args.against is not None:
            eq, _ = _load_sample_configs(args.against)
            res = stats.stationarity_test(terminal, [np.sort(c.real) for c in eq],
                                          permutations=args.permutations,
                                          seed=args.seed, paired=False)
        else:
            initial = [np.sort(p.positions[0].real) for p in paths]
            res = stats.stationarity_test(terminal, initial,
                                          permutations=args.permutations,
                                          seed=args.seed, paired=True)
        thr = args.threshold if args.threshold is not None else 0.08
        verdicts.append(_verdict("stationarity-ks", res.statistic, thr, res.statistic <= thr))
        verdicts.append(_verdict("stationarity-pvalue", res.p_value, None, True))
    outputs.append(io.write_json(args.out / "verdict.json", {"verdicts": verdicts}))
    return outputs, {"verdicts": verdicts}


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_RUNNERS = {
    "sample": run_sample,
    "evolve": run_evolve,
    "ifc-check": run_ifc_check,
    "kernel": run_kernel,
    "measures": run_measures,
    "stats": run_stats,
}


def run(args: argparse.Namespace) -> Path:
    """Execute a parsed config; returns the manifest path."""
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    outputs, diag = _RUNNERS[args.subcommand](args)
    incomplete = bool(diag.get("failed_replicas"))
    return io.write_manifest(
        args.out, args.subcommand, _config_echo(args), outputs,
        diagnostics=diag, incomplete=incomplete,
        wall_time_s=time.perf_counter() - t0,
    )


def main(argv=None) -> int:
    try:
        args = parse_config(list(sys.argv[1:] if argv is None else argv))
        manifest = run(args)
    except LoggasError as exc:
        print(f"loggas: error: {exc}", file=sys.stderr)
        return 2
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
