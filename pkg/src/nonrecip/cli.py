"""Command-line front end: pulse design, lambda sweeps, simulation runs
and the reference-figure reproduction bundle.

Exit codes: 0 success, 1 generic failure, 2 unattainable drive,
3 root-finding failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import invariant as inv
from .config import (
    ScenarioConfig,
    THETA_CIRCULATOR,
    load_config,
    with_overrides,
)
from .devices import (
    SimulationModel,
    UnattainableDriveError,
    full_chain_model,
    ideal_model,
    invert_bessel_drive,
    single_excitation_model,
)
from .invariant import PulseDivergenceError, RootBracketError, NonMonotonicBracketError
from .metrics import ensemble_fidelity, transfer_fidelity
from .propagation import PropagationConfig
from .reporting import write_csv, write_json
from .statespace import PureState

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNATTAINABLE_DRIVE = 2
EXIT_ROOT_FAILURE = 3

REFERENCE_LAMBDA = 0.4974
REFERENCE_F_S = {"100": 0.9908, "001": 0.9925, "010": 0.9928}
REFERENCE_F_M = 0.9923

RECIPROCAL_TOL = 1e-3


def _resolve_design(cfg: ScenarioConfig):
    """(trajectory, pulses, phase result) for the scenario."""
    if cfg.lambda_ is not None:
        lam = cfg.lambda_
    else:
        lam = inv.solve_lambda(cfg.target_phase_rad, cfg.tau_ns)
    traj = inv.AuxiliaryTrajectory(lam, cfg.tau_ns)
    pulses = inv.synthesize_pulses(traj, cfg.n_samples)
    phases = inv.lr_phase(traj, pulses)
    return traj, pulses, phases


def _build_model(cfg: ScenarioConfig, pulses) -> SimulationModel:
    if cfg.model == "ideal":
        return ideal_model(pulses)
    chain = cfg.chain_spec()
    drives = invert_bessel_drive(pulses, chain)
    if cfg.model == "single_excitation":
        return single_excitation_model(chain, drives)
    return full_chain_model(chain, drives)


def _propagation_config(cfg: ScenarioConfig) -> PropagationConfig:
    return PropagationConfig(step=cfg.effective_step, record_stride=cfg.record_stride)


def _circulator_target(theta_plus: float, initial: str) -> PureState:
    """Image of the initial logical state under the designed unitary."""
    labels = ("100", "010", "001")
    column = labels.index(initial)
    u = inv.target_unitary(theta_plus)
    return PureState(u.matrix[:, column])


def cmd_design(cfg: ScenarioConfig, out_dir: Path) -> int:
    traj, pulses, phases = _resolve_design(cfg)
    pulses.write_csv(out_dir / "pulses.csv")
    summary = {
        "lambda": traj.lambda_,
        "tau_ns": traj.tau,
        "theta_plus_rad": phases.theta_plus,
        "theta_plus_mod_2pi_rad": phases.theta_plus_mod_2pi,
        "theta_plus_raw_rad": phases.theta_plus_raw,
        "character": (
            "reciprocal"
            if abs(phases.theta_plus_mod_2pi - math.pi) < RECIPROCAL_TOL
            else "non_reciprocal"
        ),
    }
    if cfg.model != "ideal":
        chain = cfg.chain_spec()
        drives = invert_bessel_drive(pulses, chain)
        drives.write_csv(out_dir / "eta.csv")
        ratios = np.abs(pulses.g_a).max() / (2 * chain.g_a), np.abs(
            pulses.g_b
        ).max() / (2 * chain.g_b)
        summary["bessel_peak_ratio_a"] = float(ratios[0])
        summary["bessel_peak_ratio_b"] = float(ratios[1])
    write_json(out_dir / "design_summary.json", summary)
    print(f"design: lambda = {traj.lambda_:.6f}, "
          f"|theta_plus| = {phases.theta_plus:.6f} rad ({summary['character']})")
    return EXIT_OK


def cmd_solve_lambda(cfg: ScenarioConfig, out_dir: Path | None,
                     bracket=(0.1, 1.0)) -> int:
    target = cfg.target_phase_rad
    if target is None:
        target = THETA_CIRCULATOR
    lam = inv.solve_lambda(target, cfg.tau_ns, bracket=bracket)
    theta = inv.lr_phase(inv.AuxiliaryTrajectory(lam, cfg.tau_ns)).theta_plus
    payload = {"lambda": lam, "target_phase_rad": target, "theta_plus_rad": theta}
    print(json.dumps(payload, sort_keys=True))
    if out_dir is not None:
        write_json(out_dir / "lambda_solution.json", payload)
    return EXIT_OK


def _sweep_point(args: tuple[float, float]) -> tuple[float, float, float]:
    lam, tau = args
    phases = inv.lr_phase(inv.AuxiliaryTrajectory(lam, tau))
    return lam, phases.theta_plus, phases.theta_plus_mod_2pi


def cmd_sweep_lambda(
    cfg: ScenarioConfig, lo: float, hi: float, n: int, out_dir: Path, jobs: int = 1
) -> int:
    if not (0.0 < lo < hi) or n < 2:
        raise ValueError("sweep requires 0 < lo < hi and n >= 2")
    lams = np.linspace(lo, hi, n)
    tasks = [(float(l), cfg.tau_ns) for l in lams]
    if jobs > 1:
        with Pool(jobs) as pool:
            rows = pool.map(_sweep_point, tasks)
    else:
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: r[0])
    write_csv(
        out_dir / "lambda_sweep.csv",
        ["lambda", "theta_plus_rad", "theta_plus_mod_2pi_rad"],
        rows,
    )
    thetas = [r[1] for r in rows]
    decreasing = all(b < a for a, b in zip(thetas, thetas[1:]))
    increasing = all(b > a for a, b in zip(thetas, thetas[1:]))
    write_json(
        out_dir / "sweep_summary.json",
        {
            "lo": lo,
            "hi": hi,
            "n": n,
            "monotonic": decreasing or increasing,
            "direction": "decreasing" if decreasing else
                         ("increasing" if increasing else "none"),
        },
    )
    print(f"sweep: {n} points on [{lo}, {hi}], "
          f"monotonic={'yes' if decreasing or increasing else 'no'}")
    return EXIT_OK


def cmd_simulate(cfg: ScenarioConfig, initial: str, out_dir: Path) -> int:
    traj, pulses, phases = _resolve_design(cfg)
    model = _build_model(cfg, pulses)
    prop_cfg = _propagation_config(cfg)
    if initial == "ensemble":
        report = ensemble_fidelity(model, count=1001, noise=cfg.noise, cfg=prop_cfg)
        report.write_csv(out_dir / "ensemble_fidelity.csv")
        write_json(out_dir / "report.json", report.to_json_dict())
        print(f"simulate[ensemble]: F_m = {report.f_m:.6f} "
              f"(t=0 value {report.initial_fidelity:.4f})")
    else:
        target = _circulator_target(phases.theta_plus, initial)
        report = transfer_fidelity(model, initial, target, noise=cfg.noise,
                                   cfg=prop_cfg)
        report.write_csv(out_dir / f"trajectory_{initial}.csv")
        write_json(out_dir / "report.json", report.to_json_dict())
        print(f"simulate[{initial}]: F_s = {report.fidelity:.6f}")
    return EXIT_OK


def cmd_reproduce_fig3(cfg: ScenarioConfig, out_dir: Path, jobs: int = 1) -> int:
    summary: dict = {"panels": {}, "reference": {
        "lambda": REFERENCE_LAMBDA,
        "f_s": REFERENCE_F_S,
        "f_m": REFERENCE_F_M,
    }, "model": cfg.model, "noise": cfg.noise}
    failed = False

    def run_panel(name, fn):
        nonlocal failed
        try:
            summary["panels"][name] = fn()
            summary["panels"][name]["status"] = "ok"
        except Exception as exc:  # noqa: BLE001 - continue past failed panels
            failed = True
            summary["panels"][name] = {"status": "failed", "error": str(exc)}

    lam = inv.solve_lambda(THETA_CIRCULATOR, cfg.tau_ns)
    cfg = with_overrides(cfg, lambda_=lam, target_phase_rad=None)
    traj, pulses, phases = _resolve_design(cfg)
    model = _build_model(cfg, pulses)
    prop_cfg = _propagation_config(cfg)

    def panel_a():
        rows = []
        tasks = [(float(l), cfg.tau_ns) for l in np.linspace(0.15, 1.0, 35)]
        if jobs > 1:
            with Pool(jobs) as pool:
                rows = pool.map(_sweep_point, tasks)
        else:
            rows = [_sweep_point(t) for t in tasks]
        write_csv(out_dir / "fig3a_lambda_sweep.csv",
                  ["lambda", "theta_plus_rad", "theta_plus_mod_2pi_rad"], rows)
        return {"lambda": lam, "lambda_matches": abs(lam - REFERENCE_LAMBDA) <= 5e-4}

    def panel_b():
        pulses.write_csv(out_dir / "fig3b_pulses.csv")
        return {"theta_plus_rad": phases.theta_plus}

    def panel_c():
        report = ensemble_fidelity(model, count=1001, noise=cfg.noise, cfg=prop_cfg)
        report.write_csv(out_dir / "fig3c_ensemble_fidelity.csv")
        return {
            "f_m": report.f_m,
            "initial_fidelity": report.initial_fidelity,
            "f_m_matches": abs(report.f_m - REFERENCE_F_M) <= 5e-3,
        }

    def make_transfer_panel(panel, initial):
        def run():
            target = _circulator_target(phases.theta_plus, initial)
            report = transfer_fidelity(model, initial, target, noise=cfg.noise,
                                       cfg=prop_cfg)
            report.write_csv(out_dir / f"fig3{panel}_initial_{initial}.csv")
            return {
                "initial": initial,
                "f_s": report.fidelity,
                "f_s_matches": abs(report.fidelity - REFERENCE_F_S[initial]) <= 5e-3,
            }

        return run

    run_panel("a", panel_a)
    run_panel("b", panel_b)
    run_panel("c", panel_c)
    run_panel("d", make_transfer_panel("d", "100"))
    run_panel("e", make_transfer_panel("e", "001"))
    run_panel("f", make_transfer_panel("f", "010"))
    write_json(out_dir / "fig3_summary.json", summary)
    for name, payload in summary["panels"].items():
        print(f"panel {name}: {payload['status']}")
    return EXIT_FAILURE if failed else EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonrecip",
        description="Pulse design and simulation for a non-reciprocal "
                    "three-level circulator.",
    )
    parser.add_argument("--config", type=Path, help="scenario config file")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for sweeps")
    parser.add_argument("--model", choices=(
        "ideal", "single_excitation", "full_qubit", "full_three_level"))
    parser.add_argument("--no-noise", action="store_true",
                        help="disable the Lindblad channels")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("design")
    p = sub.add_parser("solve-lambda")
    p.add_argument("--target-phase-rad", type=float)
    p.add_argument("--bracket", type=float, nargs=2, default=(0.1, 1.0))
    p = sub.add_parser("sweep-lambda")
    p.add_argument("--lo", type=float, default=0.15)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("-n", "--num", type=int, default=35)
    p = sub.add_parser("simulate")
    p.add_argument("--initial", default="100",
                   choices=("100", "010", "001", "ensemble"))
    sub.add_parser("reproduce-fig3")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if args.model:
        overrides["model"] = args.model
    if args.no_noise:
        overrides["noise"] = False
    if getattr(args, "target_phase_rad", None) is not None:
        overrides["target_phase_rad"] = args.target_phase_rad
    if overrides:
        cfg = with_overrides(cfg, **overrides)
    out_dir = args.out
    try:
        if args.command == "design":
            code = cmd_design(cfg, out_dir)
        elif args.command == "solve-lambda":
            code = cmd_solve_lambda(cfg, out_dir, bracket=tuple(args.bracket))
        elif args.command == "sweep-lambda":
            code = cmd_sweep_lambda(cfg, args.lo, args.hi, args.num, out_dir,
                                    jobs=args.jobs)
        elif args.command == "simulate":
            code = cmd_simulate(cfg, args.initial, out_dir)
        elif args.command == "reproduce-fig3":
            code = cmd_reproduce_fig3(cfg, out_dir, jobs=args.jobs)
        else:  # pragma: no cover - argparse enforces the choices
            code = EXIT_FAILURE
    except (UnattainableDriveError, PulseDivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNATTAINABLE_DRIVE
    except (RootBracketError, NonMonotonicBracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ROOT_FAILURE
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return code


if __name__ == "__main__":
    sys.exit(main())
