"""Command-line driver.

Exit codes: 0 success, 1 check failure, 2 usage or config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bohm, checks, snapshot
from .config import RunConfig, initial_field, load_config
from .currents import conserved_scales, killing_X, pi_vector, relative_drift
from .dynamics import EvolutionPlan, evolve, mode_hamiltonian
from .errors import ConfigError, NullTotalCurrent, PhotonWaveError, SnapshotError
from .field import GridSpec, PhysicsConfig
from .identities import run_suite
from .spectral import lattice_index

log = logging.getLogger("photonwave")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

TRAJECTORY_COLUMNS = ("trajectory_id", "t", "x", "y", "z", "vx", "vy", "vz", "flag")


def _fmt(v):
    if isinstance(v, str):
        return v
    return repr(float(v))


def _csv_bytes(columns, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        values = [row[c] for c in columns] if isinstance(row, dict) else row
        w.writerow([v if isinstance(v, (int, np.integer)) and not isinstance(v, bool) else _fmt(v)
                    for v in values])
    return buf.getvalue().encode()


def _write_json(path: Path, obj):
    snapshot.atomic_write_bytes(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")


def _parse_k(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed wave vector {text!r}; expected kx,ky,kz") from None
    if len(parts) != 3 or not all(np.isfinite(parts)):
        raise argparse.ArgumentTypeError(f"malformed wave vector {text!r}; expected three finite numbers")
    return np.array(parts)


# --- identities --------------------------------------------------------------


def cmd_identities(args) -> int:
    results = run_suite(seed=args.seed, sabotage=args.sabotage)
    ok = all(r.passed for r in results)
    _emit({"passed": ok, "identities": [r.to_dict() for r in results]})
    return EXIT_OK if ok else EXIT_FAIL


# --- modes -------------------------------------------------------------------

DIAG_SECTOR = np.array([4 * r + c for r in range(4) for c in range(4) if (r < 2) == (c < 2)])


def spectrum(k, which, physics, tol=1e-8):
    """Eigenvalues with multiplicities; the diagonal operator is restricted to Pi-space."""
    op = mode_hamiltonian(k, which, physics)
    H = op.matrix
    if which == "diagonal":
        H = H[np.ix_(DIAG_SECTOR, DIAG_SECTOR)]
    n = H.shape[0]
    E = op.energy
    ev = np.linalg.eigvals(H)
    h2 = np.linalg.norm(H @ H - E**2 * np.eye(n), 2)
    # H^2 = E^2 forces eigenvalues +-E; the trace fixes their multiplicities
    if E > 0:
        n_plus = int(round((n + np.trace(H).real / E) / 2))
        levels = [(E, n_plus), (-E, n - n_plus)]
    else:
        levels = [(0.0, n)]
    numeric = np.sort(ev.real)
    groups = []
    for v in numeric:
        if groups and abs(v - groups[-1][0]) <= tol * max(1.0, E):
            groups[-1][1] += 1
        else:
            groups.append([float(v), 1])
    return {
        "k": [float(x) for x in k],
        "which": which,
        "dimension": n,
        "energy_scale": E,
        "eigenvalues": [g[0] for g in groups],
        "multiplicities": [g[1] for g in groups],
        "levels_from_trace": [{"value": v, "multiplicity": m} for v, m in levels if m],
        "max_abs_eigenvalue": float(np.max(np.abs(ev))),
        "max_imag_eigenvalue": float(np.max(np.abs(ev.imag))),
        "h2_residual": float(h2 / E**2) if E > 0 else float(h2),
        "nilpotent": bool(E == 0 and h2 <= 1e-12 * max(1.0, np.linalg.norm(H, 2)) ** 2),
        # omega = lambda/hbar for every numeric eigenvalue against c^2 |k|^2
        "dispersion_residual": float(np.max(np.abs((ev / physics.hbar) ** 2 - physics.c**2 * float(np.dot(k, k))))),
    }


def cmd_modes(args) -> int:
    physics = PhysicsConfig()
    if args.config:
        cfg = load_config(args.config)
        physics = cfg.physics
        if not args.no_grid and lattice_index(cfg.grid, args.k) is None:
            raise ConfigError(f"k = {args.k.tolist()} is not on the configured lattice", "/grid")
    elif not args.no_grid:
        grid = GridSpec((16, 16, 16))
        if lattice_index(grid, args.k) is None:
            raise ConfigError(f"k = {args.k.tolist()} is not on the default 16^3 lattice "
                              "(pass --no-grid for a freestanding mode)", "")
    _emit(spectrum(args.k, args.which, physics))
    return EXIT_OK


# --- evolve ------------------------------------------------------------------


def run_evolution(cfg: RunConfig, write_snapshots: bool = True):
    psi0 = initial_field(cfg)
    X = checks.safe_X(psi0)
    if X is None and np.any(psi0.values):
        log.warning("pi is null or spacelike; probability columns are written as nan")
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    rows = []

    def on_snapshot(s):
        n = int(round((s.time - psi0.time) / cfg.dt))
        if write_snapshots:
            snapshot.save(s, out / f"snapshot_{n:06d}.phwf")
        rows.append(checks.diagnostics_row(s, X, cfg.dt))

    evolve(psi0, EvolutionPlan(cfg.dt, cfg.steps), stride=cfg.output_stride, callback=on_snapshot)
    snapshot.atomic_write_bytes(out / "diagnostics.csv", _csv_bytes(checks.DIAGNOSTIC_COLUMNS, rows))
    return rows


def cmd_evolve(args) -> int:
    cfg = load_config(args.config)
    rows = run_evolution(cfg, write_snapshots=not args.no_snapshots)
    sc = conserved_scales(initial_field(cfg))
    scales = {"energy": sc.energy, "norm": sc.norm}
    scales.update({f"p{i + 1}": sc.momentum[i] for i in range(3)})
    scales.update({f"pi{i}": sc.pi[i] for i in range(4)})
    _emit({
        "snapshots": len(rows),
        "output_dir": str(cfg.out_dir),
        "relative_drift": {k: relative_drift([r[k] for r in rows], v) for k, v in scales.items()},
        "max_trace_linf": max(r["trace_linf"] for r in rows),
        "max_transversality_linf": max(r["transversality_linf"] for r in rows),
    })
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def _spectrum_params(cfg):
    p = cfg.init_params
    if cfg.init_type == "random":
        b = p.get("branch", 1)
        return float(p["cutoff"]), (None if b == "mixed" else b)
    return None, None


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    psi = initial_field(cfg)
    cutoff, branch = _spectrum_params(cfg)
    if cutoff is None:
        cutoff = max(checks.content_kmax(psi), 1.0)
    results = checks.verify_suite(psi, cfg.dt, cutoff, branch, cfg.seed)
    failed = [r for r in results if r.status == checks.FAIL]
    _emit({"passed": not failed, "checks": [r.to_dict() for r in results]})
    for r in failed:
        log.error("check %s failed: %s (tolerance %s)", r.name, r.value, r.tolerance)
    return EXIT_FAIL if failed else EXIT_OK


# --- trajectories ------------------------------------------------------------


def trajectory_rows(ens: bohm.Ensemble, stride: int):
    T = len(ens.times)
    idx = sorted(set(range(0, T, stride)) | {T - 1})
    for i in range(len(ens)):
        for n in idx:
            x, v = ens.positions[i, n], ens.velocities[i, n]
            yield (i, ens.times[n], x[0], x[1], x[2], v[0], v[1], v[2], ens.flags[i])


def cmd_trajectories(args) -> int:
    cfg = load_config(args.config)
    psi0 = initial_field(cfg)
    n = args.n
    if n < 0:
        raise ConfigError("--n must be >= 0", "")
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        X = killing_X(pi_vector(psi0))
    except NullTotalCurrent as exc:
        hint = ("trajectories need a timelike total current: use a superposition of plane waves "
                "travelling in different directions or a random field")
        sys.stderr.write(f"{exc}\n{hint}\n")
        _emit({"status": "SKIPPED", "reason": "NullTotalCurrent", "detail": str(exc), "guidance": hint})
        return EXIT_FAIL
    series = bohm.FieldSeries.from_evolution(psi0, cfg.dt, cfg.steps, X)
    starts = bohm.sample_rho(psi0, n, cfg.seed, X) if n else np.zeros((0, 3))
    ens = bohm.integrate(series, starts, cfg.dt, seed=cfg.seed)
    rows = list(trajectory_rows(ens, cfg.output_stride))
    snapshot.atomic_write_bytes(out / "trajectories.csv", _csv_bytes(TRAJECTORY_COLUMNS, rows))
    speeds = np.linalg.norm(ens.velocities, axis=-1) if n else np.zeros(0)
    violations = int(np.sum(speeds > cfg.physics.c + 1e-9))
    report = {
        "n": n,
        "t_final": float(ens.times[-1]),
        "subluminality_violations": violations,
        "max_speed_over_c": float(np.max(speeds, initial=0.0) / cfg.physics.c),
        "flags": {f: ens.flags.count(f) for f in (bohm.FLAG_OK, bohm.FLAG_HALVED, bohm.FLAG_INCOMPLETE)},
    }
    if n >= 2:
        psiT = evolve(psi0, EvolutionPlan(cfg.dt, cfg.steps))[-1]
        rep = bohm.equivariance_stat(ens.endpoints, psiT, X)
        report["ks"] = {"axes": list(rep.axes), "statistic": list(rep.ks_statistic),
                        "pvalue": list(rep.ks_pvalue)}
    _write_json(out / "equivariance.json", report)
    _emit(report)
    return EXIT_FAIL if violations else EXIT_OK


# --- entry point -------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="photonwave", description="Photon wave function toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("identities", help="run the algebraic identity suite")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sabotage", action="store_true", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_identities)

    s = sub.add_parser("modes", help="spectrum of the mode operator at one wave vector")
    s.add_argument("--k", type=_parse_k, required=True, metavar="KX,KY,KZ")
    s.add_argument("--which", choices=("full", "diagonal"), default="full")
    s.add_argument("--config", help="take physics and lattice from this run config")
    s.add_argument("--no-grid", action="store_true", help="skip the lattice membership check")
    s.set_defaults(func=cmd_modes)

    s = sub.add_parser("evolve", help="evolve and write snapshots plus diagnostics.csv")
    s.add_argument("--config", required=True)
    s.add_argument("--no-snapshots", action="store_true")
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("verify", help="run the verification checks on the configured field")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("trajectories", help="sample and transport guiding trajectories")
    s.add_argument("--config", required=True)
    s.add_argument("--n", type=int, default=1000)
    s.set_defaults(func=cmd_trajectories)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_USAGE
    except (OSError, SnapshotError) as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    except PhotonWaveError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
