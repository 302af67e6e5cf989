"""Command-line front end: ``mcrd <subcommand> [options]``.

Parameters come from a flat ``key=value`` file (``--config``) overlaid by
flags; a flag always wins. Physical keys (``k_N`` ...) and reduced keys
(``kappa`` ...) may be mixed. Tables are written as CSV with 17 significant
digits, summaries as JSON, and each run writes one manifest.

Exit status: 0 on success, 2 on usage or parameter errors, 1 on numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__

PHYSICAL = ("k_N", "k_I", "D_N", "D_I", "A", "L")
REDUCED = ("kappa", "tau", "d", "eps", "M", "ell")
# reduced key -> physical keys it is derived from
DERIVED_FROM = {
    "kappa": ("k_N", "k_I"),
    "tau": ("k_I",),
    "d": ("D_N",),
    "eps": ("D_I",),
    "M": ("A",),
    "ell": ("L",),
}


class UsageError(Exception):
    """Bad command line; reported with exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# parameter resolution
# --------------------------------------------------------------------------


def _layered(args) -> dict[str, tuple[float, int]]:
    """Raw parameter values with their priority (1 config, 2 flag)."""
    from .params import read_config

    merged: dict[str, tuple[float, int]] = {}
    if args.config:
        for k, v in read_config(args.config).items():
            merged[k] = (float(v), 1)
    for k in PHYSICAL + REDUCED:
        val = getattr(args, f"p_{k}", None)
        if val is not None:
            merged[k] = (float(val), 2)
    return merged


def resolve_reduced(args, needed, defaults=None) -> dict[str, float]:
    """Reduced parameters for ``needed`` keys.

    A reduced key is taken as given unless its physical source was set with
    higher priority, in which case it is derived (``kappa = k_N/k_I``,
    ``tau = k_I``, ``d = D_N``, ``eps = D_I``, ``M = kappa A``, ``ell = L``).
    """
    raw = _layered(args)
    out: dict[str, float] = {}

    def prio(keys):
        return min(raw[k][1] for k in keys) if all(k in raw for k in keys) else 0

    for key in ("kappa",) + tuple(k for k in REDUCED if k != "kappa"):
        src = DERIVED_FROM[key]
        p_direct = raw[key][1] if key in raw else 0
        p_phys = prio(src)
        if p_direct and p_direct >= p_phys:
            out[key] = raw[key][0]
        elif p_phys:
            if key == "kappa":
                out[key] = raw["k_N"][0] / raw["k_I"][0]
            elif key == "M":
                if "kappa" not in out:
                    continue
                out[key] = out["kappa"] * raw["A"][0]
            else:
                out[key] = raw[src[0]][0]
    for k, v in (defaults or {}).items():
        out.setdefault(k, v)
    missing = [k for k in needed if k not in out]
    if missing:
        flags = ", ".join(f"--{k}" for k in missing)
        raise UsageError(f"missing parameter(s): {flags} (or their physical counterparts)")
    return out


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, columns: list[str], rows) -> Path:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


class Run:
    """Collects output paths and parameters for the manifest."""

    def __init__(self, args):
        self.args = args
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.params: dict = {}
        self.seed: int | None = None
        self.t0 = time.perf_counter()

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.outputs.append(str(p))
        return p

    def manifest(self, status: str) -> Path:
        path = Path(self.args.manifest) if self.args.manifest else self.out_dir / "manifest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        data = {
            "subcommand": self.args.command,
            "parameters": self.params,
            "version": __version__,
            "wall_time_s": time.perf_counter() - self.t0,
            "outputs": self.outputs,
            "seed": self.seed,
            "status": status,
            "threads": self.args.threads,
            "argv": self.args.argv,
        }
        return write_json(path, data)


def _emit(summary: dict) -> None:
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_equilibria(args, run: Run) -> int:
    from .equilibria import (Nonlinearity, constant_equilibria, critical_mass, mu_bar,
                             mu_critical, mu_one)

    p = resolve_reduced(args, ("kappa", "M"))
    kappa, M = p["kappa"], p["M"]
    eqs = constant_equilibria(M, kappa)
    out = {"kappa": kappa, "M": M, "M_c": critical_mass(kappa), "zero": eqs[0]}
    if len(eqs) == 3:
        out["u_plus"], out["u_minus"] = eqs[1][0], eqs[2][0]
        out["plus"], out["minus"] = eqs[1], eqs[2]
    if "d" in p:
        d = p["d"]
        out |= {"d": d, "mu_c": mu_critical(d, kappa), "mu_bar": mu_bar(d, kappa),
                "mu_1": mu_one(d, kappa)}
        if args.mu is not None:
            nl = Nonlinearity(args.mu, d, kappa)
            out |= {"mu": args.mu, "alpha": nl.alpha, "beta": nl.beta, "branch": nl.branch}
            if nl.branch == "spike":
                out["gamma"] = nl.gamma
    run.params = {k: v for k, v in out.items() if k in ("kappa", "M", "d", "mu")}
    write_json(run.path("equilibria.json"), out)
    width = max(len(k) for k in out)
    lines = [f"{k:<{width}}  {v}" for k, v in out.items()]
    run.path("equilibria.txt").write_text("\n".join(lines) + "\n")
    _emit(out)
    return 0


def cmd_dispersion(args, run: Run) -> int:
    from .stability import LinearizationData, dispersion_scan, subsystem_classification

    p = resolve_reduced(args, ("kappa", "tau", "d", "eps", "M"))
    run.params = p
    lin = LinearizationData.at(p["M"], p["kappa"], p["tau"], p["d"], p["eps"])
    rep = dispersion_scan(lin, args.sigma_max, args.n_sigma, ell=p.get("ell"))
    rows = []
    for pt in rep.points:
        lam = sorted(pt.eigenvalues, key=lambda z: (-z.real, -z.imag))
        rows.append([pt.sigma] + [z.real for z in lam] + [z.imag for z in lam])
    cols = ["sigma [1/length^2]"] + [f"re_lambda{i} [1/time]" for i in (1, 2, 3)] + \
           [f"im_lambda{i} [1/time]" for i in (1, 2, 3)]
    write_csv(run.path("dispersion.csv"), cols, rows)
    summary = rep.summary()
    summary["scanKind"] = summary.pop("kind")
    if lin.uniformly_stable:
        summary["kind"] = subsystem_classification(lin).kind
    else:
        summary["kind"] = "not-uniformly-stable"
    summary["modes"] = [{"j": j, "sigma": s, "maxRe": g} for j, s, g in rep.modes]
    write_json(run.path("dispersion.json"), summary)
    _emit(summary)
    return 0


def _stationary(args, p, branch):
    from .timemap import (profile_for_length, solve_mass_constraint,
                          solve_mass_constraint_increasing)

    d, kappa, ell = p["d"], p["kappa"], p["ell"]
    if args.mu is not None:
        prof = profile_for_length(args.mu, ell, d, kappa, n=args.n)
        if branch and prof.branch != branch:
            raise UsageError(f"--mu {args.mu} lies on the {prof.branch} branch, not {branch}")
        return prof, args.mu - d * prof.us, prof.us, None
    if "M" not in p:
        raise UsageError("give --M (mass constraint) or --mu (fixed parameter)")
    if branch == "front":
        raise UsageError("the front branch has fixed mu = mu_bar; use --mu instead of --M")
    if branch == "increasing":
        trip = solve_mass_constraint_increasing(p["M"], ell, d, kappa, n=args.n)
    else:
        trip = solve_mass_constraint(p["M"], ell, d, kappa, n=args.n, eps_rel=args.eps_rel,
                                     select=args.root)
    return trip.u, trip.v, trip.w, trip


def _profile_summary(prof, v, trip) -> dict:
    import numpy as np

    from .timemap import stationary_residual

    ru, rv = stationary_residual(prof.us, v, prof.ell, prof.d, prof.kappa, "spectral")
    fu, fv = stationary_residual(prof.us, v, prof.ell, prof.d, prof.kappa, "fd2")
    out = {
        "mu": prof.mu, "branch": prof.branch, "ell": prof.ell, "n": len(prof.us),
        "mean_u": prof.mean(),
        "residual_spectral": float(max(np.abs(ru).max(), np.abs(rv).max())),
        "residual_fd2": float(max(np.abs(fu).max(), np.abs(fv).max())),
        "energy_spread": prof.energy_spread("spectral"),
        "energy_spread_fd2": prof.energy_spread("fd2"),
        "strictly_monotone": prof.is_strictly_monotone(),
        "v_min": float(np.min(v)),
    }
    if trip is not None:
        out |= {"M": trip.M, "mass_residual": trip.mass_residual,
                "mean_u_quadrature": trip.mean_u_quadrature, "roots_found": trip.roots_found}
    return out


def cmd_stationary(args, run: Run) -> int:
    p = resolve_reduced(args, ("kappa", "d", "ell"))
    run.params = p | {"mu": args.mu, "branch": args.branch, "n": args.n}
    prof, v, w, trip = _stationary(args, p, args.branch)
    summary = _profile_summary(prof, v, trip)
    if args.out == "csv":
        write_csv(run.path("stationary.csv"), ["x [length]", "u [1]", "v [1]", "w [1]"],
                  zip(prof.xs, prof.us, v, w))
        write_json(run.path("stationary.json"), summary)
    else:
        write_json(run.path("stationary.json"),
                   summary | {"x": prof.xs, "u": prof.us, "v": v, "w": w})
    _emit(summary)
    return 0


def cmd_multimode(args, run: Run) -> int:
    import numpy as np

    from .discrete import trapezoid_mean
    from .multimode import assemble

    p = resolve_reduced(args, ("kappa", "d", "ell", "M"))
    run.params = p | {"pattern": args.pattern, "j": args.j, "n": args.n}
    args.mu = None
    prof, v, w, trip = _stationary(args, p, "spike")
    mm = assemble(trip, args.pattern, args.j)
    base_means = [trapezoid_mean(a) for a in (prof.us, v, w)]
    summary = {
        "pattern": args.pattern, "j": args.j, "total_length": mm.total_length,
        "segment_length": prof.ell, "mu": trip.mu, "M": trip.M,
        "means": mm.means(), "base_means": base_means,
        "residual_fd2": float(np.abs(mm.residual("fd2")).max()),
        "base_residual_fd2": float(np.abs(prof.residual("fd2")).max()),
    }
    if args.out == "csv":
        write_csv(run.path("multimode.csv"), ["x [length]", "u [1]", "v [1]", "w [1]"],
                  zip(mm.xs, mm.us, mm.vs, mm.ws))
        write_json(run.path("multimode.json"), summary)
    else:
        write_json(run.path("multimode.json"),
                   summary | {"x": mm.xs, "u": mm.us, "v": mm.vs, "w": mm.ws})
    _emit(summary)
    return 0


def cmd_simulate(args, run: Run) -> int:
    import numpy as np

    from .params import to_physical, ReducedParams
    from .pdesim import (AuxModel, Grid1D, SimConfig, ThreeComponentModel, step_initial,
                         simulate, uniform_perturbed_initial)

    p = resolve_reduced(args, ("kappa", "tau", "d", "eps", "M", "ell"), defaults={"eps": 0.0})
    phys = to_physical(ReducedParams(**{k: p[k] for k in REDUCED}))
    model = ThreeComponentModel(phys) if args.model == "three" else AuxModel(phys)
    grid = Grid1D(args.n, phys.L)
    nf = len(model.names)
    if args.init == "fig8-step":
        init = step_initial(phys, grid)
        if nf == 3:
            init = np.vstack([init, np.zeros(grid.n)])
    elif args.init == "uniform-perturbed":
        if args.seed is None:
            raise UsageError("--init uniform-perturbed needs --seed")
        run.seed = args.seed
        init = uniform_perturbed_initial(phys, grid, args.seed, amplitude=args.amplitude,
                                         symmetric=args.symmetric, n_fields=nf)
    else:
        if not args.init_file:
            raise UsageError("--init file needs --init-file PATH")
        data = np.loadtxt(args.init_file, delimiter=",", skiprows=1, ndmin=2)
        if data.shape != (grid.n, nf + 1):
            raise UsageError(f"--init-file must have {grid.n} rows and columns x,"
                             f"{','.join(model.names)}; got shape {data.shape}")
        init = data[:, 1:].T.copy()
    snaps = tuple(float(s) for s in args.snap.split(",")) if args.snap else ()
    cfg = SimConfig(dt=args.dt, t_end=args.t_end, scheme=args.scheme,
                    output_every=args.output_every, steady_tol=args.steady_tol,
                    snapshots=snaps, stop_when_steady=not args.no_stop)
    run.params = phys.as_dict() | {"model": args.model, "init": args.init, "n": args.n,
                                   "dt": args.dt, "t_end": args.t_end, "scheme": args.scheme}
    traj = simulate(model, init, grid, cfg)
    cols = ["x [length]"] + [f"{nm} [concentration]" for nm in model.names]
    for t, y in sorted(traj.snapshots.items()):
        write_csv(run.path(f"snapshot_t{t:g}.csv"), cols, zip(grid.x, *y))
    write_csv(run.path("final.csv"), cols, zip(grid.x, *traj.final.fields))
    write_csv(run.path("mass.csv"), ["t [time]", "mean_N_plus_S [concentration]"],
              zip(traj.times, traj.mass))
    meta = {
        "params": phys.as_dict(), "reduced": p, "model": args.model, "seed": args.seed,
        "dt": traj.dt, "t_final": traj.final.t, "mass_drift": traj.mass_drift,
        "clamp_count": traj.final.clamp_count, "steady": traj.steady,
    }
    write_json(run.path("simulate.json"), meta)
    _emit(meta)
    return 0


def cmd_asymptote(args, run: Run) -> int:
    from .equilibria import mu_bar, mu_critical
    from .timemap import profile_for_length, mean_u_limit

    p = resolve_reduced(args, ("kappa", "d"), defaults={"kappa": 2.0, "d": 0.1})
    d, kappa = p["d"], p["kappa"]
    if args.mu is not None:
        mu = args.mu
    elif args.at == "bar":
        mu = mu_bar(d, kappa)
    else:
        mu = 0.5 * (mu_critical(d, kappa) + mu_bar(d, kappa))
    ells = [float(s) for s in args.ells.split(",")]
    limit = mean_u_limit(mu, d, kappa)
    rows = []
    for ell in ells:
        m = profile_for_length(mu, ell, d, kappa, n=args.n).mean()
        rel = abs(m - limit) / abs(limit) if limit else abs(m)
        rows.append((ell, m, limit, rel))
    run.params = {"kappa": kappa, "d": d, "mu": mu, "ells": ells, "n": args.n}
    write_csv(run.path("asymptote.csv"), ["ell [length]", "mean_u [1]", "limit [1]", "rel_error [1]"],
              rows)
    summary = {"mu": mu, "limit": limit, "table": [dict(zip(("ell", "mean_u", "limit", "rel_error"), r))
                                                   for r in rows]}
    write_json(run.path("asymptote.json"), summary)
    _emit(summary)
    return 0


def cmd_selftest(args, run: Run) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    write_json(run.path("selftest.json"),
               [{"check": n, "passed": ok, "detail": det} for n, ok, det in results])
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {
    "equilibria": cmd_equilibria,
    "dispersion": cmd_dispersion,
    "stationary": cmd_stationary,
    "multimode": cmd_multimode,
    "simulate": cmd_simulate,
    "asymptote": cmd_asymptote,
    "selftest": cmd_selftest,
}


def _add_params(sp) -> None:
    g = sp.add_argument_group("parameters (flags override --config)")
    for k in REDUCED + PHYSICAL:
        g.add_argument(f"--{k}", dest=f"p_{k}", type=float, default=None, metavar="X")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mcrd", description="Mass-conserved reaction-diffusion toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--manifest", default=None, help="manifest path (default OUT_DIR/manifest.json)")
    common.add_argument("--config", default=None, help="key=value parameter file")
    common.add_argument("--threads", type=int, default=1, help="cap on worker threads")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("equilibria", parents=[common], help="constant equilibria and thresholds")
    _add_params(sp)
    sp.add_argument("--mu", type=float, default=None, help="also report alpha, beta, gamma here")

    sp = sub.add_parser("dispersion", parents=[common], help="dispersion relation at u_+")
    _add_params(sp)
    sp.add_argument("--sigma-max", type=float, default=10.0)
    sp.add_argument("--n-sigma", type=int, default=1001)

    for name in ("stationary", "multimode"):
        sp = sub.add_parser(name, parents=[common], help=f"{name} solutions")
        _add_params(sp)
        sp.add_argument("--n", type=int, default=2048, help="samples per segment")
        sp.add_argument("--out", choices=("csv", "json"), default="csv")
        sp.add_argument("--eps-rel", type=float, default=1e-3,
                        help="smallest scanned offset mu - mu_bar relative to M - mu_bar")
        sp.add_argument("--root", type=int, default=0, help="which mass-constraint root to take")
        if name == "stationary":
            sp.add_argument("--branch", choices=("spike", "increasing", "front"), default=None)
            sp.add_argument("--mu", type=float, default=None, help="fixed mu instead of --M")
        else:
            sp.add_argument("--pattern", choices=("Lambda", "V", "U", "N"), required=True)
            sp.add_argument("--j", type=int, default=1)

    sp = sub.add_parser("simulate", parents=[common], help="method-of-lines simulation")
    _add_params(sp)
    sp.add_argument("--model", choices=("three", "aux"), default="three")
    sp.add_argument("--init", choices=("fig8-step", "uniform-perturbed", "file"),
                    default="uniform-perturbed")
    sp.add_argument("--init-file", default=None, help="CSV with columns x and one per field")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--amplitude", type=float, default=0.01)
    sp.add_argument("--symmetric", action="store_true")
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--snap", default="", help="comma-separated snapshot times")
    sp.add_argument("--scheme", choices=("imex-cn", "explicit-rk4"), default="imex-cn")
    sp.add_argument("--output-every", type=float, default=1.0)
    sp.add_argument("--steady-tol", type=float, default=1e-8)
    sp.add_argument("--no-stop", action="store_true", help="keep running after steady detection")

    sp = sub.add_parser("asymptote", parents=[common], help="<u> against its large-ell limit")
    _add_params(sp)
    sp.add_argument("--at", choices=("mid", "bar"), default="mid",
                    help="mu = (mu_c + mu_bar)/2 or mu = mu_bar")
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--ells", default="40,80,160")
    sp.add_argument("--n", type=int, default=2048)

    sub.add_parser("selftest", parents=[common], help="oracle-equivalence checks")
    return ap


def _cap_threads(n: int) -> None:
    # honoured by BLAS/OpenMP only if set before numpy loads
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if not argv:
            raise UsageError(parser.format_usage().strip())
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    args.argv = argv
    _cap_threads(args.threads)

    from ._roots import BracketError
    from .params import ParameterError

    run = Run(args)
    try:
        status = COMMANDS[args.command](args, run)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        run.manifest("usage-error")
        return 2
    except (BracketError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure in {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        run.manifest("numerical-failure")
        return 1
    except (ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        run.manifest("usage-error")
        return 2
    run.manifest("ok" if status == 0 else "failed")
    return status


if __name__ == "__main__":
    sys.exit(main())
