"""Configuration-driven experiment runner.

Subcommands:
  run <config.json>                      execute the mode named in the config
  sweep <config.json> --param P --values CSV   fan out over one numeric field
  verify <config.json>                   run the verification report

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 verification
failure.  The env var ERMAKOV_LAB_OUT overrides the output directory.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigurationError,
    ErmakovLabError,
    TrajectoryAborted,
)
from .params import DriveSpec, OmegaSpec, PhysParams
from .ermakov import (
    ClassicalState,
    ErmakovState,
    alpha_from_delta,
    delta_from_alpha,
    integrate,
)
from .madelung import evolve, gaussian_packet, make_grid
from .identities import (
    AnsatzSlice,
    check_coefficient_expansion,
    check_decomposition_integrals,
    check_integrating_factor,
    check_k0_gaussian,
    check_velocity_ansatz,
)

CSV_HEADER = "# ermakov-lab csv v1; nondimensional units unless configured otherwise"

_ALLOWED = {
    "mode": None,
    "system": None,
    "params": {"m", "hbar", "omega", "lambda", "tau", "coeff_variant"},
    "omega_spec": {"omega0", "eps", "omega_m"},
    "drive": {"kind", "x0", "freq", "phase", "table"},
    "init": {"alpha0", "alphadot0", "xbar0", "xbardot0",
             "delta0", "width_rate0", "q0", "qdot0"},
    "numerics": {"dt", "t_end", "grid"},
    "output": {"directory", "stride", "snapshots"},
}
_GRID_KEYS = {"x_min", "x_max", "n"}


def _validate_keys(cfg: dict) -> None:
    for key, val in cfg.items():
        if key not in _ALLOWED:
            raise ConfigurationError(f"unknown config key {key!r}")
        sub = _ALLOWED[key]
        if sub is not None:
            if not isinstance(val, dict):
                raise ConfigurationError(f"config section {key!r} must be an object")
            for k2 in val:
                if k2 not in sub:
                    raise ConfigurationError(f"unknown config key {key}.{k2!r}")
            if key == "numerics" and "grid" in val:
                for k3 in val["grid"]:
                    if k3 not in _GRID_KEYS:
                        raise ConfigurationError(f"unknown config key numerics.grid.{k3!r}")


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError("config root must be a JSON object")
    _validate_keys(cfg)
    if "mode" not in cfg:
        raise ConfigurationError("missing required field 'mode'")
    if "params" not in cfg or "tau" not in cfg["params"]:
        raise ConfigurationError("missing required field 'params.tau'")
    return cfg


def build_params(cfg: dict) -> PhysParams:
    p = cfg.get("params", {})
    tau = p["tau"]
    if isinstance(tau, str):
        if tau.lower() in ("inf", "infinite", "infinity"):
            tau = math.inf
        else:
            raise ConfigurationError(f"params.tau: unrecognized value {tau!r}")
    return PhysParams(m=float(p.get("m", 1.0)),
                      hbar=float(p.get("hbar", 1.0)),
                      omega=float(p.get("omega", 1.0)),
                      lam=float(p.get("lambda", 0.0)),
                      tau=float(tau),
                      coeff_variant=p.get("coeff_variant", "consistent"))


def build_drive(cfg: dict) -> DriveSpec:
    d = cfg.get("drive", {"kind": "zero"})
    kind = d.get("kind", "zero")
    if kind == "tabulated":
        return DriveSpec.tabulated(d.get("table", []))
    return DriveSpec(kind=kind, x0=float(d.get("x0", 0.0)),
                     freq=float(d.get("freq", 0.0)),
                     phase=float(d.get("phase", 0.0)))


def build_omega_spec(cfg: dict, params: PhysParams) -> OmegaSpec:
    w = cfg.get("omega_spec")
    if w is None:
        return OmegaSpec.constant(params.omega)
    return OmegaSpec(omega0=float(w.get("omega0", params.omega)),
                     eps=float(w.get("eps", 0.0)),
                     omega_m=float(w.get("omega_m", 0.0)))


def _init_block(cfg: dict) -> dict:
    return cfg.get("init", {})


def build_ermakov_init(cfg: dict, params: PhysParams) -> ErmakovState:
    init = _init_block(cfg)
    if "delta0" in init:
        alpha0 = alpha_from_delta(float(init["delta0"]), params)
        scale = (params.hbar ** 2 / (4.0 * params.m ** 2)) ** 0.25
        alphadot0 = float(init.get("width_rate0", 0.0)) / scale
    else:
        alpha0 = float(init.get("alpha0", 1.0))
        alphadot0 = float(init.get("alphadot0", 0.0))
    return ErmakovState(t=0.0, alpha=alpha0, alphadot=alphadot0,
                        xbar=float(init.get("xbar0", 1.0)),
                        xbardot=float(init.get("xbardot0", 0.0)))


def _out_dir(cfg: dict) -> Path:
    base = os.environ.get("ERMAKOV_LAB_OUT") or cfg.get("output", {}).get("directory", "out")
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_csv(path: Path, columns: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def run_ode(cfg: dict) -> int:
    params = build_params(cfg)
    num = cfg.get("numerics", {})
    dt = float(num.get("dt", 1e-3))
    t_end = float(num.get("t_end", 10.0))
    stride = int(cfg.get("output", {}).get("stride", 1))
    out = _out_dir(cfg)
    system = cfg.get("system", "measurement")
    try:
        if system == "classical":
            init = _init_block(cfg)
            state = ClassicalState(t=0.0, q=float(init.get("q0", 1.0)),
                                   qdot=float(init.get("qdot0", 0.0)),
                                   alpha=float(init.get("alpha0", 1.0)),
                                   alphadot=float(init.get("alphadot0", 0.0)))
            traj = integrate("classical", state, params,
                             omega_spec=build_omega_spec(cfg, params),
                             t_end=t_end, dt=dt, stride=stride)
            cols = ["t", "q", "qdot", "alpha", "alphadot", "delta",
                    "I", "dIdt_analytic", "dIdt_numeric", "X"]
        else:
            drive = build_drive(cfg)
            state = build_ermakov_init(cfg, params)
            traj = integrate("measurement", state, params, drive=drive,
                             t_end=t_end, dt=dt, stride=stride)
            cols = ["t", "alpha", "alphadot", "xbar", "xbardot", "delta",
                    "I", "dIdt_analytic", "dIdt_numeric", "X"]
    except TrajectoryAborted as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    dnum = traj.dIdt_numeric()
    if system == "classical":
        rows = zip(traj.t, traj.x, traj.xdot, traj.alpha, traj.alphadot,
                   traj.delta, traj.invariant, traj.dIdt_analytic, dnum, traj.drive)
    else:
        rows = zip(traj.t, traj.alpha, traj.alphadot, traj.x, traj.xdot,
                   traj.delta, traj.invariant, traj.dIdt_analytic, dnum, traj.drive)
    write_csv(out / "trajectory.csv", cols, rows)
    return 0


def _pde_setup(cfg: dict):
    params = build_params(cfg)
    drive = build_drive(cfg)
    init = _init_block(cfg)
    delta0 = float(init.get("delta0", 1.0))
    xbar0 = float(init.get("xbar0", 1.0))
    num = cfg.get("numerics", {})
    gcfg = num.get("grid", {})
    grid = make_grid(float(gcfg.get("x_min", xbar0 - 16 * delta0)),
                     float(gcfg.get("x_max", xbar0 + 16 * delta0)),
                     int(gcfg.get("n", 1024)))
    packet = gaussian_packet(grid, xbar0, delta0,
                             xbardot0=float(init.get("xbardot0", 0.0)),
                             width_rate0=float(init.get("width_rate0", 0.0)),
                             p=params)
    dt = float(num.get("dt", 1e-3))
    t_end = float(num.get("t_end", 10.0))
    steps = int(round(t_end / dt))
    return params, drive, packet, dt, steps


def run_pde(cfg: dict) -> int:
    stride = int(cfg.get("output", {}).get("stride", 1))
    out = _out_dir(cfg)
    try:
        params, drive, packet, dt, steps = _pde_setup(cfg)
        final, obs = evolve(packet, params, drive, dt, steps, record_stride=stride)
    except ErmakovLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    write_csv(out / "observables.csv",
              ["t", "norm", "xbar", "delta", "excess_kurtosis", "k_t"],
              ((o.t, o.norm, o.xbar, o.delta, o.excess_kurtosis, o.k_t) for o in obs))
    if cfg.get("output", {}).get("snapshots", False):
        write_csv(out / "fields_final.csv",
                  ["x", "re_psi", "im_psi", "rho"],
                  zip(final.grid.x, final.psi.real, final.psi.imag,
                      np.abs(final.psi) ** 2))
    return 0


def run_compare(cfg: dict) -> int:
    stride = int(cfg.get("output", {}).get("stride", 1))
    out = _out_dir(cfg)
    try:
        params, drive, packet, dt, steps = _pde_setup(cfg)
        _, obs = evolve(packet, params, drive, dt, steps, record_stride=stride)
        state = build_ermakov_init(cfg, params)
        traj = integrate("measurement", state, params, drive=drive,
                         t_end=steps * dt, dt=dt, stride=stride)
    except ErmakovLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    n = min(len(obs), len(traj))
    rows = []
    for i in range(n):
        o = obs[i]
        rows.append((o.t, o.xbar, traj.x[i], o.xbar - traj.x[i],
                     o.delta, traj.delta[i], o.delta - traj.delta[i],
                     o.norm, o.excess_kurtosis))
    write_csv(out / "compare.csv",
              ["t", "xbar_pde", "xbar_ode", "xbar_diff",
               "delta_pde", "delta_ode", "delta_diff",
               "norm", "excess_kurtosis"], rows)
    return 0


def _check(name, value, tol):
    return {"name": name, "value": float(value), "tolerance": float(tol),
            "pass": bool(value <= tol)}


def run_verify(cfg: dict) -> int:
    t0 = time.perf_counter()
    params = build_params(cfg)
    out = _out_dir(cfg)
    tau = params.tau if math.isfinite(params.tau) else 2.0
    checks = []

    rep = check_k0_gaussian(1.0, PhysParams(tau=tau))
    checks.append(_check(rep.name, rep.max_abs_residual, rep.tolerance))
    a = AnsatzSlice(delta=1.0, deltadot=0.3, xbardot=0.2, tau=tau)
    for rep in check_integrating_factor(a):
        checks.append(_check(rep.name, rep.max_abs_residual, rep.tolerance))
    for rep in check_decomposition_integrals(a):
        checks.append(_check(rep.name, rep.max_abs_residual, rep.tolerance))
    rep = check_velocity_ansatz(a)
    checks.append(_check(rep.name, rep.max_abs_residual, rep.tolerance))
    for variant, rep in check_coefficient_expansion(
            1.0, 0.3, 0.5, 0.2, PhysParams(tau=2.0)).items():
        expected = 0.0 if variant == "consistent" else 3.0 / 64.0
        checks.append(_check(rep.name, abs(rep.max_abs_residual - expected),
                             rep.tolerance))

    # conserving drive keeps the invariant flat
    p_cons = params if params.lam != 0 else PhysParams(
        m=params.m, hbar=params.hbar, omega=params.omega, lam=1.0,
        tau=tau, coeff_variant=params.coeff_variant)
    init = ErmakovState(t=0.0, alpha=1.0, alphadot=0.0, xbar=1.0, xbardot=0.0)
    traj = integrate("measurement", init, p_cons, drive=DriveSpec.conserving(),
                     t_end=10.0, dt=1e-3)
    inv = traj.invariant
    drift = (inv.max() - inv.min()) / inv[0]
    checks.append(_check("conserving_drive_invariant_drift", drift, 1e-6))

    # analytic invariant rate vs centered finite difference
    p_rate = PhysParams(m=params.m, hbar=params.hbar, omega=params.omega,
                        lam=1.0, tau=tau, coeff_variant=params.coeff_variant)
    traj = integrate("measurement", init, p_rate,
                     drive=DriveSpec.sinusoid(1.0, 0.7), t_end=10.0, dt=1e-3)
    fd = np.gradient(traj.invariant, traj.t)[1:-1]
    err = np.max(np.abs(fd - traj.dIdt_analytic[1:-1]))
    scale = np.max(np.abs(traj.dIdt_analytic))
    checks.append(_check("invariant_rate_consistency", err / scale, 1e-4))

    report = {
        "version": __version__,
        "scenario": cfg,
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks),
        "wall_time_s": time.perf_counter() - t0,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    for c in checks:
        tag = "PASS" if c["pass"] else "FAIL"
        print(f"{tag} {c['name']}: {c['value']:.3e} (tol {c['tolerance']:.1e})")
    return 0 if report["all_pass"] else 3


_MODES = {"ode": run_ode, "pde": run_pde, "compare": run_compare, "verify": run_verify}


def run(config_path) -> int:
    try:
        cfg = load_config(config_path)
        mode = cfg["mode"]
        if mode not in _MODES:
            raise ConfigurationError(f"unknown mode {mode!r}")
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return _MODES[mode](cfg)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


def _set_by_path(cfg: dict, dotted: str, value: float) -> None:
    parts = dotted.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"cannot descend into {dotted!r}")
    node[parts[-1]] = value


def sweep(config_path, parameter: str, values: list[float]) -> int:
    try:
        base_cfg = load_config(config_path)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    base_out = os.environ.get("ERMAKOV_LAB_OUT") \
        or base_cfg.get("output", {}).get("directory", "out")
    worst = 0
    for v in values:
        cfg = copy.deepcopy(base_cfg)
        try:
            _set_by_path(cfg, parameter, v)
        except ConfigurationError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        leaf = parameter.split(".")[-1]
        cfg.setdefault("output", {})["directory"] = str(
            Path(base_out) / f"{leaf}_{v:g}")
        _validate_keys(cfg)
        env_saved = os.environ.pop("ERMAKOV_LAB_OUT", None)
        try:
            code = _MODES[cfg["mode"]](cfg)
        finally:
            if env_saved is not None:
                os.environ["ERMAKOV_LAB_OUT"] = env_saved
        worst = max(worst, code)
    return worst


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ermakov-lab",
                                     description="Config-driven runs of the "
                                     "measured-oscillator laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute the mode named in the config")
    p_run.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="fan a run out over one numeric field")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True,
                         help="dotted config path, e.g. params.tau")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated numeric values")
    p_verify = sub.add_parser("verify", help="run the verification report")
    p_verify.add_argument("config")
    args = parser.parse_args(argv)

    if args.command == "run":
        return run(args.config)
    if args.command == "sweep":
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            print("config error: --values must be comma-separated numbers",
                  file=sys.stderr)
            return 1
        return sweep(args.config, args.param, values)
    # verify: force verify mode on the loaded config
    try:
        cfg = load_config(args.config)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    cfg["mode"] = "verify"
    return run_verify(cfg)


if __name__ == "__main__":
    sys.exit(main())
