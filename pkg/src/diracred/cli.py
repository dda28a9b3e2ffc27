"""Command line front end: ``diracred simulate|converge|compare|check``.

Every command reads one JSON config::

    {
      "system": "charged_particle" | "double_pendulum" | "custom-linear",
      "variant": "plus" | "minus",
      "T": 20.0, "N": 100,
      "params": {...},
      "initial": {"x0": [...], "g0": [...], "w0": [...], "mu0": [...]},
      "connection": "flat" | {"type": "matrix", "H": [[...], ...]},
      "solver": {"tol": 1e-12, "max_iter": 50},
      "momentum": "conserved" | "evaluated",
      "outputs": {"csv_path": "run.csv", "svg_path": "run.svg", "diagnostics": true},
      "converge": {"Ns": [10, 50, 100, 200]},
      "check": {"n_random": 20, "seed": 0, "steps": 50}
    }

Relative output paths are resolved against ``--out`` (default: the
current directory).  Exit codes: 0 success, 2 config error, 3 solver
failure, 4 audit failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .connection import DiscreteConnection
from .integrator import MOMENTUM_MODES, NewtonConfig, SolverError, project, run, run_unreduced
from .lagrangian import ReducedLagrangianMinus, ReducedLagrangianPlus
from .spaces import TrivializedMomentumPoint, TrivializedSpace
from .tulczyjew import ReducedState, hat_lambda_d, hat_lambda_d_inv

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_AUDIT = 0, 2, 3, 4
SYSTEMS = ("charged_particle", "double_pendulum", "custom-linear")
DEFAULT_NS = (10, 50, 100, 200)


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# config


@dataclass
class RunConfig:
    system: str
    T: float
    N: int
    variant: str = "plus"
    params: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    solver: NewtonConfig = field(default_factory=NewtonConfig)
    momentum: str = "conserved"
    outputs: dict = field(default_factory=dict)
    converge: dict = field(default_factory=dict)
    check: dict = field(default_factory=dict)
    connection: object = None

    @property
    def h(self) -> float:
        return self.T / self.N

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"system", "T", "N", "variant", "params", "initial", "solver", "momentum", "outputs", "converge", "check", "connection"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for key in ("system", "T", "N"):
            if key not in d:
                raise ConfigError(f"missing required key {key!r}")
        system = d["system"]
        if system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}, got {system!r}")
        try:
            T = float(d["T"])
            N = d["N"]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad T: {e}") from None
        if isinstance(N, bool) or not isinstance(N, int) or N < 1:
            raise ConfigError("N must be an integer >= 1")
        if not (math.isfinite(T) and T > 0):
            raise ConfigError("T must be positive")
        variant = d.get("variant", "plus")
        if variant not in ("plus", "minus"):
            raise ConfigError("variant must be 'plus' or 'minus'")
        momentum = d.get("momentum", "conserved")
        if momentum not in MOMENTUM_MODES:
            raise ConfigError(f"momentum must be one of {MOMENTUM_MODES}")
        for key in ("params", "initial", "solver", "outputs", "converge", "check"):
            if not isinstance(d.get(key, {}), dict):
                raise ConfigError(f"{key!r} must be an object")
        try:
            solver = NewtonConfig(**d.get("solver", {}))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad solver settings: {e}") from None
        return cls(
            system=system, T=T, N=N, variant=variant,
            params=dict(d.get("params", {})), initial=dict(d.get("initial", {})),
            solver=solver, momentum=momentum, outputs=dict(d.get("outputs", {})),
            converge=dict(d.get("converge", {})), check=dict(d.get("check", {})),
            connection=d.get("connection"),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e}") from None


def _params(cfg: RunConfig, allowed: tuple[str, ...]) -> dict:
    extra = set(cfg.params) - set(allowed)
    if extra:
        raise ConfigError(f"unknown params for {cfg.system}: {sorted(extra)}")
    return dict(cfg.params)


def _initial(sp: TrivializedSpace, base: TrivializedMomentumPoint, initial: dict) -> TrivializedMomentumPoint:
    extra = set(initial) - {"x0", "g0", "w0", "mu0"}
    if extra:
        raise ConfigError(f"unknown initial keys: {sorted(extra)}")

    def get(key, default, n):
        v = np.atleast_1d(np.asarray(initial.get(key, default), dtype=float))
        if v.shape != (n,):
            raise ConfigError(f"initial.{key} must have length {n}")
        return v

    x0 = get("x0", base.q.x, sp.dim_sigma)
    g0 = get("g0", base.q.g, sp.dim_g)
    return TrivializedMomentumPoint(sp.point(x0, g0), get("w0", base.w, sp.dim_sigma), get("mu0", base.mu, sp.dim_g))


def build_system(cfg: RunConfig):
    """``(L_d, connection, initial point)`` for the configured system with step ``T/N``."""
    from . import systems

    try:
        if cfg.system == "charged_particle":
            p = _params(cfg, ("m", "e", "B0"))
            params = systems.ChargedParticleParams(h=cfg.h, T=cfg.T, **p)
            L, conn, ic = systems.charged_particle_system(params)
        elif cfg.system == "double_pendulum":
            p = _params(cfg, ("m1", "m2", "l1", "l2", "g", "coupling"))
            params = systems.PendulumParams(h=cfg.h, T=cfg.T, **p)
            L, conn, ic = systems.pendulum_system(params, chart_guard=False)
        else:
            L, conn, ic = _custom_linear(cfg)
        conn, ic = _with_connection(cfg, conn, ic)
        ic = _initial(conn.space, ic, cfg.initial)
        if cfg.system == "double_pendulum":
            systems.check_chart(ic.q.x)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    return L, conn, ic


def _with_connection(cfg: RunConfig, conn: DiscreteConnection, ic: TrivializedMomentumPoint):
    """Swap in the configured connection, keeping the default initial covector fixed."""
    if cfg.connection is None:
        return conn, ic
    new = DiscreteConnection.from_config(conn.space, cfg.connection)
    q, p = hat_lambda_d_inv(conn, ic.q, ic.w, ic.mu)
    return new, hat_lambda_d(new, q, p)


def _custom_linear(cfg: RunConfig):
    from .systems.quadratic import QuadraticSystem, random_quadratic_system

    p = _params(cfg, ("M", "K", "H", "beta", "seed", "max_dim"))
    if "M" not in p:
        rng = np.random.default_rng(int(p.get("seed", 0)))
        system, conn, ic = random_quadratic_system(rng, int(p.get("max_dim", 6)), h=cfg.h, beta=p.get("beta"))
        return system.lagrangian(), conn, ic
    M = np.asarray(p["M"], dtype=float)
    if "K" not in p:
        raise ConfigError("custom-linear needs K together with M")
    K = np.atleast_2d(np.asarray(p["K"], dtype=float))
    ns = K.shape[0]
    n = M.shape[0]
    if M.shape != (n, n) or K.shape != (ns, ns) or not 0 < ns <= n:
        raise ConfigError("custom-linear M must be n x n and K ns x ns with ns <= n")
    sp = TrivializedSpace(ns, n - ns)
    H = np.asarray(p.get("H", np.zeros((n - ns, ns))), dtype=float).reshape(n - ns, ns)
    system = QuadraticSystem(sp, M, K, float(p.get("beta", 0.0)), cfg.h)
    conn = DiscreteConnection(sp, H)
    ic = TrivializedMomentumPoint(sp.zero_point(), np.zeros(ns), np.zeros(n - ns))
    return system.lagrangian(), conn, ic


def reduced_lagrangian(cfg: RunConfig, L, conn):
    return ReducedLagrangianMinus(L, conn) if cfg.variant == "minus" else ReducedLagrangianPlus(L, conn)


# --------------------------------------------------------------------------
# output


def fmt(v) -> str:
    """17 significant digits; empty for undefined diagnostics."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else format(v, ".17g")


def _out_path(out: Path, name: str | None, default: str) -> Path:
    p = Path(name or default)
    return p if p.is_absolute() else out / p


def _writer(path: Path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_trajectory_csv(path: Path, tr) -> None:
    ns, ng = tr.x.shape[1], tr.mu.shape[1]
    header = ["k", "t"]
    header += [f"x{i + 1}" for i in range(ns)] + [f"g_abs{i + 1}" for i in range(ng)]
    header += [f"w{i + 1}" for i in range(ns)] + [f"mu{i + 1}" for i in range(ng)]
    header += ["E_d", "struct_residual", "newton_iters"]
    fh, w = _writer(path)
    with fh:
        w.writerow(header)
        t = tr.times
        for k in range(tr.x.shape[0]):
            last = k == tr.x.shape[0] - 1
            row = [str(k), fmt(t[k])]
            row += [fmt(v) for v in tr.x[k]] + [fmt(v) for v in tr.g_abs[k]]
            row += [fmt(v) for v in tr.w[k]] + [fmt(v) for v in tr.mu[k]]
            row += [fmt(tr.energy[k]), fmt(tr.struct_residual[k]), "" if last else str(int(tr.newton_iters[k]))]
            w.writerow(row)
        if tr.error is not None:
            w.writerow(["#truncated", str(tr.error.step), str(tr.error)] + [""] * (len(header) - 3))


def write_svgs(svg_path: Path, tr) -> list[Path]:
    """Energy vs ``t`` into ``svg_path`` and one file per shape coordinate."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = tr.times
    series = [("E_d", svg_path, t[:-1], tr.energy[:-1])]
    for i in range(tr.x.shape[1]):
        series.append((f"x{i + 1}", svg_path.with_name(f"{svg_path.stem}_x{i + 1}{svg_path.suffix or '.svg'}"), t, tr.x[:, i]))
    written = []
    plt.rcParams["svg.hashsalt"] = "diracred"
    for label, path, tt, yy in series:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(tt, yy, lw=0.8)
        ax.set_xlabel("t")
        ax.set_ylabel(label)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


def _prepare_out(out) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory: {e}") from None
    return out


def _check_writable(path: Path) -> None:
    if not path.parent.is_dir():
        raise ConfigError(f"output directory does not exist: {path.parent}")


# --------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    L, conn, ic = build_system(cfg)
    csv_path = _out_path(out, cfg.outputs.get("csv_path"), "trajectory.csv")
    _check_writable(csv_path)
    svg = cfg.outputs.get("svg_path")
    svg_path = _out_path(out, svg, "") if svg else None
    if svg_path is not None:
        _check_writable(svg_path)

    rl = reduced_lagrangian(cfg, L, conn)
    tr = run(rl, ReducedState(ic.q.x, ic.w, ic.mu), ic.q.g, cfg.N, cfg.solver, h=cfg.h, momentum=cfg.momentum)
    try:
        write_trajectory_csv(csv_path, tr)
        if svg_path is not None:
            write_svgs(svg_path, tr)
    except OSError as e:
        raise ConfigError(f"cannot write output: {e}") from None

    if cfg.outputs.get("diagnostics", False):
        print(f"steps: {tr.n_steps}/{cfg.N}")
        print(f"momentum drift: {tr.momentum_drift():.3e}")
        print(f"max structure residual: {np.nanmax(tr.struct_residual, initial=0.0):.3e}")
        print(f"elapsed: {tr.elapsed:.3f} s")
    if tr.error is not None:
        print(f"solver failure: {tr.error}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _converge_one(cfg: RunConfig, N: int) -> float:
    from .systems import charged_particle_system, ChargedParticleParams, final_error

    p = _params(cfg, ("m", "e", "B0"))
    params = ChargedParticleParams(h=cfg.T / N, T=cfg.T, **p)
    L, conn, ic = charged_particle_system(params)
    conn, ic = _with_connection(cfg, conn, ic)
    ic = _initial(conn.space, ic, cfg.initial)
    rl = reduced_lagrangian(cfg, L, conn)
    tr = run(rl, ReducedState(ic.q.x, ic.w, ic.mu), ic.q.g, N, cfg.solver, h=params.h, momentum=cfg.momentum)
    if tr.error is not None:
        raise tr.error
    return final_error(tr)


def converge(cfg: RunConfig, Ns) -> list[tuple[int, float, float]]:
    """``(N, error, observed order)`` rows; order is NaN on the first row."""
    Ns = [int(n) for n in Ns]
    with ThreadPoolExecutor(max_workers=max(1, len(Ns))) as pool:
        errors = list(pool.map(lambda n: _converge_one(cfg, n), Ns))
    rows = []
    for i, (n, e) in enumerate(zip(Ns, errors)):
        order = math.nan
        if i > 0:
            order = math.log(errors[i - 1] / e) / math.log(n / Ns[i - 1])
        rows.append((n, e, order))
    return rows


def cmd_converge(cfg: RunConfig, out: Path) -> int:
    if cfg.system != "charged_particle":
        raise ConfigError("converge compares against the exact charged-particle path; set system to charged_particle")
    Ns = cfg.converge.get("Ns", list(DEFAULT_NS))
    if not isinstance(Ns, list) or not Ns or any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in Ns):
        raise ConfigError("converge.Ns must be a nonempty list of positive integers")
    csv_path = _out_path(out, cfg.outputs.get("csv_path"), "convergence.csv")
    _check_writable(csv_path)
    try:
        rows = converge(cfg, Ns)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    fh, w = _writer(csv_path)
    with fh:
        w.writerow(["N", "error", "observed_order"])
        for n, e, o in rows:
            w.writerow([str(n), fmt(e), fmt(o)])
    if cfg.outputs.get("diagnostics", False):
        for n, e, o in rows:
            print(f"N={n}: error {e:.6g}" + ("" if math.isnan(o) else f", order {o:.4f}"))
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out: Path) -> int:
    L, conn, ic = build_system(cfg)
    csv_path = _out_path(out, cfg.outputs.get("csv_path"), "compare.csv")
    _check_writable(csv_path)
    timing_path = csv_path.with_name(csv_path.stem + "_timing.csv")

    rl = reduced_lagrangian(cfg, L, conn)
    t0 = time.perf_counter()
    tr = run(rl, ReducedState(ic.q.x, ic.w, ic.mu), ic.q.g, cfg.N, cfg.solver, h=cfg.h, momentum=cfg.momentum)
    t_red = time.perf_counter() - t0
    q0, p0 = hat_lambda_d_inv(conn, ic.q, ic.w, ic.mu)
    t0 = time.perf_counter()
    tu = run_unreduced(L, q0, p0, cfg.N, cfg.solver, h=cfg.h)
    t_unr = time.perf_counter() - t0

    x, g, w_, mu = project(tu, conn)
    n = min(tr.x.shape[0], x.shape[0])
    dev = np.max(np.abs(np.hstack([
        tr.x[:n] - x[:n], tr.g_abs[:n] - g[:n], tr.w[:n] - w_[:n], tr.mu[:n] - mu[:n],
    ])), axis=1)
    de = np.abs(tr.energy[:n] - tu.energy[:n])

    fh, w = _writer(csv_path)
    with fh:
        w.writerow(["k", "t", "max_deviation", "energy_deviation"])
        for k in range(n):
            w.writerow([str(k), fmt(k * cfg.h), fmt(dev[k]), fmt(de[k])])
    fh, w = _writer(timing_path)
    with fh:
        w.writerow(["method", "steps", "seconds"])
        w.writerow(["reduced", str(tr.n_steps), fmt(t_red)])
        w.writerow(["unreduced", str(tu.q.shape[0] - 1), fmt(t_unr)])
    if cfg.outputs.get("diagnostics", False):
        print(f"max deviation: {np.max(dev, initial=0.0):.3e}")
        print(f"max energy deviation: {np.nanmax(de, initial=0.0):.3e}")
        print(f"reduced {t_red:.3f} s, unreduced {t_unr:.3f} s")
    for e in (tr.error, tu.error):
        if e is not None:
            print(f"solver failure: {e}", file=sys.stderr)
            return EXIT_SOLVER
    return EXIT_OK


def cmd_check(cfg: RunConfig, out: Path) -> int:
    from .audit import run_audit

    L, conn, ic = build_system(cfg)
    opts = cfg.check
    extra = set(opts) - {"n_random", "seed", "steps"}
    if extra:
        raise ConfigError(f"unknown check keys: {sorted(extra)}")
    csv_path = _out_path(out, cfg.outputs.get("csv_path"), "check.csv")
    _check_writable(csv_path)
    steps = int(opts.get("steps", min(cfg.N, 50)))
    checks = run_audit(
        L, conn, ic, cfg.h, steps=steps, n_random=int(opts.get("n_random", 20)),
        seed=int(opts.get("seed", 0)), cfg=cfg.solver, system_name=cfg.system,
    )
    fh, w = _writer(csv_path)
    with fh:
        w.writerow(["check", "value", "tol", "passed"])
        for ch in checks:
            w.writerow([ch.name, fmt(ch.value), fmt(ch.tol), "1" if ch.passed else "0"])
    for ch in checks:
        print(ch.line())
    failed = [ch for ch in checks if not ch.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_AUDIT if failed else EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "converge": cmd_converge, "compare": cmd_compare, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diracred", description="Reduced discrete Lagrange-Poincare-Dirac integrators.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="directory for relative output paths")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        out = _prepare_out(args.out)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
