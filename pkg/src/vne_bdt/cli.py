"""Command-line entry point ``vne``.

Exit codes: 0 success, 1 failed check or integration, 2 usage/config error.
"""

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np
from scipy.optimize import minimize_scalar

from .config import ConfigError, ScenarioConfig
from .constants import NORMALIZATION_SCALE
from .darboux import reconstruct_dressed
from .dynamics import IntegrationError, integrate
from .linalg import trace_moment
from .observables import density_grid, mean_x
from .scenario import base_solution, h1_closed, rho1_closed, rho_int_limits
from .verify import run_all

logger = logging.getLogger("vne")

EVOLVE_MODES = ("nonlinear", "linear-partner", "lax", "dressed")
FIGURES = ("fig1", "fig2", "fig3")


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.17g}"


@contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _write_csv(path, header, rows):
    with _open_out(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _block_columns(dim=3, vector=False):
    cols = []
    if vector:
        for j in range(dim):
            cols += [f"re_{j}", f"im_{j}"]
        return cols
    for i in range(dim):
        for j in range(dim):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
    return cols


def _observables(h_matrix, state, generator):
    moments = [trace_moment(h_matrix, state, n).real for n in range(1, 5)]
    energy = float(np.trace(generator @ state).real)
    return [mean_x(state), energy] + moments


OBS_COLUMNS = ["mean_x", "energy", "moment_1", "moment_2", "moment_3", "moment_4"]


def cmd_verify(config: ScenarioConfig, report_path=None) -> int:
    report = run_all(config)
    for line in report.lines():
        print(line)
    print("OVERALL:", "PASS" if report.passed else "FAIL")
    path = report_path or config.report
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    return 0 if report.passed else 1


def cmd_evolve(config: ScenarioConfig, mode: str, out=None) -> int:
    p = config.params
    h = p.hamiltonian
    hm = h.matrix()
    blk = h.block
    t0, t1, dt = config.t0, config.t1, config.dt
    stride = max(1, int(config.output_stride))
    rows = []
    if mode in ("nonlinear", "linear-partner"):
        if mode == "nonlinear":
            start = base_solution(p)(t0)
            traj = integrate("nonlinear", h, start, t0, t1, dt, stride=stride)

            def gen(t, rho):
                return hm @ rho + rho @ hm
        else:
            start = rho1_closed(p)(t0)
            traj = integrate("linear", h, start, t0, t1, dt, stride=stride, partner=lambda t: h1_closed(p, t))

            def gen(t, rho):
                return h1_closed(p, t)

        for t, rho in zip(traj.t, traj.values):
            b = rho[blk, blk]
            rows.append([float(t)] + _flatten(b) + _observables(hm, rho, gen(t, rho)))
        header = ["t"] + _block_columns() + OBS_COLUMNS
    else:
        c = NORMALIZATION_SCALE
        scale = c if mode == "dressed" else 1.0
        lo, hi = min(t0, 0.0) * scale, max(t1, 0.0) * scale
        rec = reconstruct_dressed(p, lo, hi, dt, stride=stride)
        if mode == "lax":
            for t, psi in zip(rec.lax.t, rec.lax.values):
                if t0 - 1e-12 <= t <= t1 + 1e-12:
                    proj = np.outer(psi, psi.conj())
                    rows.append([float(t)] + _flatten(psi[blk]) + _observables(hm, proj, hm))
            header = ["t"] + _block_columns(vector=True) + OBS_COLUMNS
        else:
            for t, rho in zip(rec.rescaled.t, rec.rescaled.values):
                if t0 - 1e-9 <= t <= t1 + 1e-9:
                    rows.append([float(t)] + _flatten(rho[blk, blk]) + _observables(hm, rho, hm @ rho + rho @ hm))
            header = ["t"] + _block_columns() + OBS_COLUMNS
    _write_csv(out, header, rows)
    return 0


def _flatten(block):
    out = []
    for v in np.ravel(block):
        out += [float(v.real), float(v.imag)]
    return out


def cmd_figures(config: ScenarioConfig, which: str, out=None, meta=None) -> int:
    p = config.params
    if which == "fig1":
        alphas = np.linspace(*config.fig1_alphas)
        t_grid = np.linspace(*config.fig1_t)
        rows = []
        for a in alphas:
            sol = rho1_closed(p.replace(alpha=float(a)))
            rows += [[float(a), float(t), mean_x(sol(t))] for t in t_grid]
        _write_csv(out, ["alpha", "t", "mean_x"], rows)
        metadata = {"figure": which, "alphas": list(config.fig1_alphas), "t": list(config.fig1_t)}
    elif which in ("fig2", "fig3"):
        t_spec = config.fig2_t if which == "fig2" else config.fig3_t
        t_grid = np.linspace(*t_spec)
        x_grid = np.linspace(-config.fig_x_bound, config.fig_x_bound, config.fig_x_points)
        grid = density_grid(rho1_closed(p), t_grid, x_grid)
        rows = [
            [float(t), float(x), float(v)]
            for t, row in zip(grid.t_grid, grid.values)
            for x, v in zip(grid.x_grid, row)
        ]
        _write_csv(out, ["t", "x", "density"], rows)
        metadata = {
            "figure": which,
            "t": list(t_spec),
            "x": [-config.fig_x_bound, config.fig_x_bound, config.fig_x_points],
            "max_slice_norm_error": float(np.abs(grid.norms() - 1.0).max()),
            "clamped": grid.clamped,
        }
    else:
        raise UsageError(f"unknown figure {which!r}; expected one of {FIGURES}")
    metadata["params"] = config.to_dict()
    meta_path = meta or (f"{out}.json" if out not in (None, "-") else None)
    if meta_path:
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(metadata, fh, indent=2, sort_keys=True)
    return 0


def parse_alphas(spec: str) -> list:
    try:
        lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise UsageError(f"--alphas expects MIN:MAX:COUNT, got {spec!r}") from exc
    if count < 1:
        raise UsageError("alpha range must be nonempty")
    values = np.linspace(lo, hi, count) if count > 1 else np.array([lo])
    # deterministic de-duplication, ascending
    return sorted({float(v) for v in values})


def scan_alpha(params, alpha: float, points: int = 20001) -> dict:
    """Scattering summary for one alpha."""
    p = params.replace(alpha=alpha)
    sol = rho1_closed(p)
    big_t = 200.0 / p.omega0
    t_grid = np.linspace(-big_t, big_t, points)
    speed = np.array([np.linalg.norm(sol.interaction_derivative(t)) for t in t_grid])
    scattering = bool(speed.max() > 1e-12)
    if scattering:
        j = int(np.argmax(speed))
        lo, hi = t_grid[max(j - 1, 0)], t_grid[min(j + 1, points - 1)]
        fine = minimize_scalar(
            lambda t: -np.linalg.norm(sol.interaction_derivative(t)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        t_star = float(fine.x)
    else:
        t_star = float("nan")
    past, future = rho_int_limits()
    energies = [np.trace(h1_closed(p, t) @ sol(t)).real for t in t_grid[::10]]
    return {
        "alpha": alpha,
        "scattering": int(scattering),
        "transition_time": t_star,
        "log_alpha_time": 5.0 * np.log(abs(alpha)) / p.omega0 if alpha != 0 else float("nan"),
        "past_error": float(np.linalg.norm(sol.interaction(-big_t) - past)),
        "future_error": float(np.linalg.norm(sol.interaction(big_t) - future)),
        "energy_drift": float(max(energies) - min(energies)),
    }


SCAN_COLUMNS = ["alpha", "scattering", "transition_time", "log_alpha_time", "past_error", "future_error", "energy_drift"]


def worker_count() -> int:
    raw = os.environ.get("VNE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise UsageError(f"VNE_THREADS must be an integer, got {raw!r}") from exc
    return os.cpu_count() or 1


def cmd_scan(config: ScenarioConfig, alphas: list, out=None) -> int:
    params = config.params
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(lambda a: scan_alpha(params, a), alphas))
    _write_csv(out, SCAN_COLUMNS, [[r[c] for c in SCAN_COLUMNS] for r in results])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vne", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--alpha", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--dim", type=int)
        return p

    v = common(sub.add_parser("verify", help="run the acceptance checks"))
    v.add_argument("--tol-scale", type=float)
    v.add_argument("--report", help="JSON report path")

    e = common(sub.add_parser("evolve", help="integrate and export a trajectory"))
    e.add_argument("--mode", choices=EVOLVE_MODES, required=True)
    e.add_argument("--t0", type=float)
    e.add_argument("--t1", type=float)
    e.add_argument("--dt", type=float)
    e.add_argument("--stride", type=int, help="output every N steps")
    e.add_argument("--out", default="-")

    f = common(sub.add_parser("figures", help="export figure data"))
    f.add_argument("--which", required=True)
    f.add_argument("--out", default="-")
    f.add_argument("--meta", help="metadata JSON path (default OUT.json)")

    s = common(sub.add_parser("scan", help="per-alpha scattering summary"))
    s.add_argument("--alphas", required=True, help="MIN:MAX:COUNT")
    s.add_argument("--out", default="-")
    return parser


def load_config(args) -> ScenarioConfig:
    config = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    overrides = {
        "alpha": args.alpha,
        "eps": args.eps,
        "dim": args.dim,
        "tol_scale": getattr(args, "tol_scale", None),
        "t0": getattr(args, "t0", None),
        "t1": getattr(args, "t1", None),
        "dt": getattr(args, "dt", None),
        "output_stride": getattr(args, "stride", None),
    }
    data = config.to_dict()
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if getattr(args, "dt", None) is not None and not args.dt > 0:
            raise UsageError("--dt must be positive")
        config = load_config(args)
        if args.command == "verify":
            return cmd_verify(config, args.report)
        if args.command == "evolve":
            return cmd_evolve(config, args.mode, args.out)
        if args.command == "figures":
            return cmd_figures(config, args.which, args.out, args.meta)
        if args.command == "scan":
            return cmd_scan(config, parse_alphas(args.alphas), args.out)
    except (ConfigError, UsageError) as exc:
        print(f"vne: error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"vne: integration aborted at step {exc.step}: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
