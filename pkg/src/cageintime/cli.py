"""Command-line entry point: plan, verify, oracle-check, sweep, and render.

Exit codes: 0 verified success, 2 planning failure, 3 oracle containment
failure, 1 bad configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import ball as ballmod
from . import oracle as oraclemod
from .config import BadSpec, RunConfig, ball_trajectory, load_config, push_trajectory
from .core import CageCircle, NoAction, PushAngle, Vec2, action_to_json
from .push import PushProblem, plan_push, pusher_pose
from .render import render_prob_frame, render_push_frame
from .trajectories import as_vec2_list


def _write_plan(path: str, plan, task: str) -> None:
    rows = []
    for t, a in enumerate(plan):
        if task == "push":
            if isinstance(a, PushAngle):
                rows.append({"t": t, "theta": a.theta, "k": a.k})
            else:
                rows.append({"t": t, "theta": None, "k": None})
        else:
            rows.append({"t": t, "dtheta": list(a.dtheta)})
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _push_problem(cfg: RunConfig) -> tuple[PushProblem, Vec2]:
    raw = cfg.raw
    waypoints = as_vec2_list(push_trajectory(raw))
    problem = PushProblem(
        object_radius=float(raw.get("object_radius_mm", 25.0)),
        cage_size=float(raw.get("cage_size_mm", 20.0)),
        K=int(raw.get("K", 128)),
        d_push=float(raw.get("d_push_mm", 20.0)),
        pusher_length=float(raw.get("pusher_length_mm", 100.0)),
        resolution=float(raw.get("resolution_mm", 1.0)),
        lambda1=float(raw.get("lambda1", 1.0)),
        lambda2=float(raw.get("lambda2", 1.0)),
        margin=float(raw.get("margin_mm", 4.0)),
        shortlist=int(raw.get("shortlist", 2)),
        trajectory=tuple(waypoints),
    )
    q0 = raw.get("initial_position_mm")
    start = waypoints[0] if q0 is None else Vec2(float(q0[0]), float(q0[1]))
    return problem, start


def run_push(cfg: RunConfig) -> int:
    problem, start = _push_problem(cfg)
    plan, result, log = plan_push(problem, start)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_plan(os.path.join(cfg.out_dir, "plan.json"), plan, "push")
    log.write(os.path.join(cfg.out_dir, "runlog.jsonl"))
    if cfg.render:
        _render_push(cfg, problem, start, plan)
    if not result.success:
        print(f"planning failed at step {result.failure_step}: {result.failure_reason}")
        return 2
    rollouts = int(cfg.raw.get("rollouts", 20))
    ocfg = oraclemod.PushOracleConfig(
        object_radius=float(cfg.raw.get("oracle_radius_mm", problem.object_radius)),
        seed=cfg.seed,
    )
    worst = 0.0
    with open(os.path.join(cfg.out_dir, "rollouts.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["rollout", "max_error_mm"])
        for i in range(rollouts):
            rng = np.random.default_rng(cfg.seed + i)
            _, err = oraclemod.rollout_push_plan(plan, problem, start, ocfg, rng)
            wr.writerow([i, f"{err:.4f}"])
            worst = max(worst, err)
    print(f"plan verified; worst oracle tracking error {worst:.2f} mm "
          f"over {rollouts} rollouts (cage {problem.cage_size:.0f} mm)")
    return 0 if worst <= problem.cage_size else 3


def _render_push(cfg: RunConfig, problem: PushProblem, start: Vec2, plan) -> None:
    from .push import propagate_pss
    from .core import PSSGrid

    n = problem.grid_size
    pss = PSSGrid.from_points(
        start.as_array()[None, :], problem.resolution, problem.trajectory[0], (n, n)
    )
    frame_dir = os.path.join(cfg.out_dir, "frames")
    os.makedirs(frame_dir, exist_ok=True)
    for t, action in enumerate(plan):
        target = problem.trajectory[t + 1]
        theta = action.theta if isinstance(action, PushAngle) else None
        pss = propagate_pss(pss, theta, target, problem)
        pose = None
        if theta is not None:
            pose = pusher_pose(target, problem.R, theta, problem.pusher_length / 2.0)
        cage = CageCircle(target, problem.cage_size)
        img = render_push_frame(pss, cage, pose, problem.object_radius)
        img.write(os.path.join(frame_dir, f"frame_{t:04d}.pgm"))


def run_ball(cfg: RunConfig) -> int:
    raw = cfg.raw
    mode = raw.get("mode", "balance")
    n = int(raw.get("n", 1))
    common = dict(
        N=int(raw.get("N", 81 if n == 1 else 31)),
        v_max=float(raw.get("v_max_m_s", 1.0)),
        beta_max=float(raw.get("beta_max", 25.0)),
    )
    if mode == "catch":
        setup = ballmod.catching_setup(
            v_center=float(raw.get("v0_m_s", 0.8)),
            dv=float(raw.get("dv0_m_s", 0.05)),
            k_ve=float(raw.get("k_ve", 60.0)),
            half_length=float(raw.get("half_length_m", 0.15)),
            **common,
        )
    else:
        setup = ballmod.balancing_setup(
            n=n, k_ve=float(raw.get("k_ve", 10.0)),
            half_length=float(raw.get("half_length_m", 0.08)),
            **common,
        )
    traj = ball_trajectory(raw, setup.params.dt, setup.grid.n)
    if traj is None:
        traj = setup.trajectory(float(raw["trajectory"].get("horizon_s", 3.0)))
    plan, result, log = ballmod.dynamic_control(
        setup.grid, traj, setup.ball, setup.unc, setup.model, setup.params,
        setup.initial_tilt,
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_plan(os.path.join(cfg.out_dir, "plan.json"), plan, "ball")
    log.write(os.path.join(cfg.out_dir, "runlog.jsonl"))
    if cfg.render:
        frame_dir = os.path.join(cfg.out_dir, "frames")
        os.makedirs(frame_dir, exist_ok=True)
        grid = setup.grid
        for t, action in enumerate(plan):
            render_prob_frame(grid.values).write(
                os.path.join(frame_dir, f"frame_{t:04d}.pgm")
            )
    if not result.success:
        print(f"planning failed at step {result.failure_step}: {result.failure_reason}")
        return 2
    ocfg = oraclemod.BallOracleConfig(
        rollouts=int(raw.get("rollouts", 20)), seed=cfg.seed
    )
    xs0, vs0, _ = setup.grid.support()
    rate, max_abs = oraclemod.rollout_ball(
        plan, traj, setup.ball, setup.unc, ocfg, setup.grid.x_max,
        setup.params.dt, setup.initial_tilt,
        (float(xs0.min()), float(xs0.max())),
        (float(vs0.min()), float(vs0.max())),
    )
    with open(os.path.join(cfg.out_dir, "rollouts.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["rollout", "max_abs_x_m"])
        for i, m in enumerate(max_abs):
            wr.writerow([i, f"{m:.5f}"])
    print(f"plan verified; oracle success rate {rate:.2f} "
          f"({ocfg.rollouts} rollouts)")
    return 0 if rate == 1.0 else 3


def run_sweep(cfg: RunConfig) -> int:
    raw = cfg.raw
    rows = oraclemod.sensitivity_sweep(
        [float(v) for v in raw["v0_grid"]],
        [float(v) for v in raw["dv0_grid"]],
        [float(v) for v in raw["beta_grid"]],
        trials=int(raw.get("trials", 100)),
        seed=cfg.seed,
        horizon_s=float(raw.get("horizon_s", 3.0)),
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "sweep.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["v0", "dv0", "beta_max", "success_rate"])
        for r in rows:
            wr.writerow([r["v0"], r["dv0"], r["beta_max"], r["success_rate"]])
    print(f"sweep finished: {len(rows)} cells")
    return 0


def run(cfg: RunConfig) -> int:
    if cfg.task == "push":
        return run_push(cfg)
    if cfg.task == "ball":
        return run_ball(cfg)
    return run_sweep(cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cageintime",
        description="Open-loop manipulation planning with time-varying cages",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("push", "ball", "sweep", "render"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--render", action="store_true")
        p.add_argument("--trials", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(
            args.config, seed=args.seed, out_dir=args.out,
            render=args.render or args.command == "render",
        )
    except BadSpec as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.trials is not None:
        cfg.raw["trials"] = args.trials
        cfg.raw["rollouts"] = args.trials
    expected = {"push": "push", "ball": "ball", "sweep": "sweep", "render": cfg.task}
    if cfg.task != expected[args.command]:
        print(f"error: config task {cfg.task!r} does not match command "
              f"{args.command!r}", file=sys.stderr)
        return 1
    try:
        return run(cfg)
    except BadSpec as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {getattr(e, 'filename', '')}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
