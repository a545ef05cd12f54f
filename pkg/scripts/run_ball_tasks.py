"""Dynamic ball-on-plate runs: figure-eight and letter-path balancing, plus
the retreat catch, each validated by exact-dynamics rollouts."""

import argparse
import time

import numpy as np

from cageintime import ball as B
from cageintime import oracle
from cageintime import trajectories as T


def validate(name, setup, traj, rollouts, seed):
    t0 = time.time()
    plan, result, _ = B.dynamic_control(
        setup.grid, traj, setup.ball, setup.unc, setup.model, setup.params,
        setup.initial_tilt,
    )
    if not result.success:
        print(f"{name}: planning failed at step {result.failure_step} "
              f"({result.failure_reason})")
        return
    xs0, vs0, _ = setup.grid.support()
    cfg = oracle.BallOracleConfig(rollouts=rollouts, seed=seed)
    rate, max_abs = oracle.rollout_ball(
        plan, traj, setup.ball, setup.unc, cfg, setup.grid.x_max,
        setup.params.dt, setup.initial_tilt,
        (float(xs0.min()), float(xs0.max())),
        (float(vs0.min()), float(vs0.max())),
    )
    print(f"{name}: success rate {rate:.2f}, worst |x| {max_abs.max()*1000:.1f} mm, "
          f"{time.time() - t0:.1f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rollouts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    lem = T.lemniscate(0.03, 251, ease=True)
    traj = np.column_stack([lem[:, 0], lem[:, 1]])
    validate("lemniscate", B.balancing_setup(), traj, args.rollouts, args.seed)

    letters = T.smooth_path(
        T.resample_polyline(T.letters_polyline(0.02), 0.001), 11, passes=4)
    traj = np.column_stack([letters[:, 0], letters[:, 1]])
    validate("letters", B.balancing_setup(), traj, args.rollouts, args.seed)

    setup = B.catching_setup(0.8, 0.05)
    validate("catch", setup, setup.trajectory(3.0), args.rollouts, args.seed)


if __name__ == "__main__":
    main()
