"""Independent ground-truth physics and baseline controllers.

These simulators validate the planners from the outside: a rotation-bounded
pushing integrator, an exact nonlinear ball-on-plate integrator, a
proportional feedback baseline with sensing defects, and the planning
sensitivity sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ActionSequence, NoAction, PushAngle, TiltRate, Vec2
from .push import PushProblem, PusherPose, pusher_pose, segment_distance
from . import ball as ballmod


class NoContact(RuntimeError):
    """The pusher never reached the object's bounding circle."""


@dataclass(frozen=True)
class PushOracleConfig:
    object_radius: float = 25.0  # a, true bounding radius (<= planner r)
    c_range: tuple[float, float] = (15.0, 25.0)  # contact-distance samples
    delta_m: float = 0.5  # micro-step, mm
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.delta_m < self.object_radius / 4.0:
            raise ValueError("micro-step must be small relative to the radius")
        if not 0.0 < self.c_range[0] <= self.c_range[1]:
            raise ValueError("contact-distance range must be positive and ordered")


def peshkin_delta_beta(a: float, c: float, beta0: float, m: float) -> float:
    """Largest possible rotation of the pushed object per pusher travel m."""
    return c * math.sin(beta0) / (a * a + c * c) * m


def simulate_push(
    q0: Vec2,
    pose: PusherPose,
    d_push: float,
    cfg: PushOracleConfig,
    rng: Optional[np.random.Generator] = None,
) -> Vec2:
    """Ground-truth displacement of one push.

    The pusher advances in micro-steps after first touching the bounding
    circle. Each micro-step the object may rotate by a random fraction of
    the rotation bound, converting forward motion into lateral slip. Two
    physical constraints are enforced per step: a rigid quasi-static object
    cannot move farther than it was pushed, and the cumulative displacement
    stays inside the friction-theory semi-ellipse grown to the contact
    travel so far.

    A push that never reaches the bounding circle is a no-op (zero
    displacement).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    a = cfg.object_radius
    dist0 = float(segment_distance(q0.as_array()[None, :], pose)[0])
    s0 = max(0.0, dist0 - a)
    d_con = d_push - s0
    if d_con <= 0.0:
        return Vec2(0.0, 0.0)

    side = 1.0 if rng.random() < 0.5 else -1.0
    beta = math.pi / 2.0
    u = 0.0  # along the push direction
    v = 0.0  # along the pusher segment
    s = 0.0
    while s < d_con - 1e-12:
        step = min(cfg.delta_m, d_con - s)
        c = rng.uniform(*cfg.c_range)
        frac = rng.random()
        dbeta = side * frac * peshkin_delta_beta(a, c, beta, step)
        dv = -a * math.sin(beta) * dbeta
        du = step + a * math.cos(beta) * dbeta
        # rigid quasi-static bound: the object cannot outrun the pusher
        mag = math.hypot(du, dv)
        if mag > step:
            du *= step / mag
            dv *= step / mag
        u += du
        v += dv
        beta += dbeta
        s += step
        # stay inside the semi-ellipse grown to the travel so far
        if u < 0.0:
            u = 0.0
        q = (u / s) ** 2 + (v / (s / 2.0)) ** 2
        if q > 1.0:
            scale = 1.0 / math.sqrt(q)
            u *= scale
            v *= scale
    d = pose.direction
    t = pose.tangent
    return Vec2(u * d.x + v * t.x, u * d.y + v * t.y)


def rollout_push_plan(
    plan: ActionSequence,
    problem: PushProblem,
    q0: Vec2,
    cfg: PushOracleConfig,
    rng: Optional[np.random.Generator] = None,
) -> tuple[list[Vec2], float]:
    """Execute an open-loop push plan against the ground-truth simulator.

    Returns the object position after every step and the maximum distance
    to the reference waypoint.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    q = q0
    positions = [q]
    max_err = (q - problem.trajectory[0]).norm()
    for t, action in enumerate(plan):
        if isinstance(action, PushAngle):
            pose = pusher_pose(
                problem.trajectory[t + 1], problem.R, action.theta,
                problem.pusher_length / 2.0,
            )
            disp = simulate_push(q, pose, problem.d_push, cfg, rng)
            q = q + disp
        positions.append(q)
        err = (q - problem.trajectory[t + 1]).norm()
        max_err = max(max_err, err)
    return positions, max_err


def naive_tangent_rollout(
    problem: PushProblem,
    q0: Vec2,
    cfg: PushOracleConfig,
    rng: Optional[np.random.Generator] = None,
) -> tuple[list[Vec2], float, Optional[int]]:
    """Baseline pusher that follows the trajectory with its push direction
    parallel to the direction of travel, pushing blindly each step.

    Returns positions, the max tracking error, and the first step at which
    the error exceeded the cage size (None if it never did).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    q = q0
    positions = [q]
    max_err = (q - problem.trajectory[0]).norm()
    lost_at: Optional[int] = None
    for t in range(len(problem.trajectory) - 1):
        w0, w1 = problem.trajectory[t], problem.trajectory[t + 1]
        d = w1 - w0
        norm = d.norm()
        if norm > 1e-12:
            dhat = Vec2(d.x / norm, d.y / norm)
            center = Vec2(w0.x - dhat.x * problem.R, w0.y - dhat.y * problem.R)
            pose = PusherPose(center, dhat, problem.pusher_length / 2.0)
            disp = simulate_push(q, pose, problem.d_push, cfg, rng)
            q = q + disp
        positions.append(q)
        err = (q - w1).norm()
        max_err = max(max_err, err)
        if lost_at is None and err > problem.cage_size:
            lost_at = t
    return positions, max_err, lost_at


# --- proportional feedback baseline ---------------------------------------


@dataclass(frozen=True)
class PControllerConfig:
    gain: float = 1.0
    cap: float = 20.0  # mm
    noise_sigma: float = 0.0  # mm per axis
    lag: bool = False  # 50% chance of a 0.5 s or 1.0 s stale observation
    step_period: float = 0.1  # s per control step
    seed: int = 0


def p_controller_step(
    obj: Vec2,
    trajectory: Sequence[Vec2],
    cfg: PControllerConfig,
    rng: np.random.Generator,
    history: Sequence[Vec2],
) -> Vec2:
    """One proportional push command toward the nearest waypoint.

    The observation may be corrupted by Gaussian noise and, with probability
    one half, replaced by the object position from 0.5 or 1.0 seconds ago.
    """
    obs = obj
    if cfg.lag and history and rng.random() < 0.5:
        lag_s = 0.5 if rng.random() < 0.5 else 1.0
        back = max(1, int(round(lag_s / cfg.step_period)))
        obs = history[max(0, len(history) - back)]
    if cfg.noise_sigma > 0:
        obs = Vec2(
            obs.x + rng.normal(0.0, cfg.noise_sigma),
            obs.y + rng.normal(0.0, cfg.noise_sigma),
        )
    nearest = min(trajectory, key=lambda w: (w - obs).norm())
    err = nearest - obs
    cmd = Vec2(cfg.gain * err.x, cfg.gain * err.y)
    mag = cmd.norm()
    if mag > cfg.cap:
        cmd = Vec2(cmd.x * cfg.cap / mag, cmd.y * cfg.cap / mag)
    return cmd


def p_controller_rollout(
    trajectory: Sequence[Vec2],
    q0: Vec2,
    cfg: PControllerConfig,
) -> tuple[list[Vec2], float]:
    """Track the trajectory with proportional pushes under ideal actuation.

    At step t the controller aims for waypoint t+1 and nearby waypoints
    (the nearest-waypoint rule is applied over a sliding window so progress
    along the path is forced). Returns positions and max tracking error.
    """
    rng = np.random.default_rng(cfg.seed)
    q = q0
    positions = [q]
    history: list[Vec2] = [q]
    max_err = 0.0
    for t in range(len(trajectory) - 1):
        window = trajectory[t + 1 : t + 2]
        cmd = p_controller_step(q, window, cfg, rng, history)
        q = q + cmd
        positions.append(q)
        history.append(q)
        max_err = max(max_err, (q - trajectory[t + 1]).norm())
    return positions, max_err


# --- ball-on-plate ground truth -------------------------------------------


@dataclass(frozen=True)
class BallOracleConfig:
    step: float = 0.002  # s, integrator substep (<= dt/10)
    rollouts: int = 20
    seed: int = 0


def _exact_accel(
    x: np.ndarray,
    v: np.ndarray,
    tilt: np.ndarray,
    plate_accel: np.ndarray,
    ball: ballmod.BallParams,
    eta_m: float,
    eta_p: np.ndarray,
    eta_mu: float,
) -> np.ndarray:
    n = tilt.shape[0]
    noisy = plate_accel + eta_p
    g_theta = ballmod.G * np.sin(tilt)
    a_p = noisy[n] * np.sin(tilt) + noisy[:n] * np.cos(tilt)
    a_eff = g_theta + a_p
    return ball.kappa * (1.0 + eta_m) * a_eff - (ball.mu_r + eta_mu) * v


def integrate_ball(
    plan: ActionSequence,
    trajectory: np.ndarray,
    ball: ballmod.BallParams,
    x0: np.ndarray,
    v0: np.ndarray,
    initial_tilt: np.ndarray,
    dt: float,
    substep: float,
    eta_m: float = 0.0,
    eta_p: Optional[np.ndarray] = None,
    eta_mu: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step 4th-order rollout of the exact dynamics under one noise draw.

    Tilt follows the planned rates piecewise-linearly; plate acceleration is
    piecewise-constant from second differences of the plate path. Returns
    position and velocity traces sampled at every control step.
    """
    n = initial_tilt.shape[0]
    traj = np.atleast_2d(np.asarray(trajectory, dtype=float))
    accels = ballmod.trajectory_accels(traj, dt)
    if eta_p is None:
        eta_p = np.zeros(n + 1)
    x = np.asarray(x0, dtype=float).reshape(n).copy()
    v = np.asarray(v0, dtype=float).reshape(n).copy()
    tilt = initial_tilt.copy()
    xs = [x.copy()]
    vs = [v.copy()]
    m = max(1, int(round(dt / substep)))
    h = dt / m
    for t, action in enumerate(plan):
        u = np.asarray(action.dtheta, dtype=float)
        pa = accels[min(t, accels.shape[0] - 1)]
        for i in range(m):
            tilt_a = tilt + u * (i * h)
            tilt_b = tilt + u * ((i + 0.5) * h)
            tilt_c = tilt + u * ((i + 1) * h)

            def f(state, th):
                xx, vv = state
                return vv, _exact_accel(xx, vv, th, pa, ball, eta_m, eta_p, eta_mu)

            k1 = f((x, v), tilt_a)
            k2 = f((x + 0.5 * h * k1[0], v + 0.5 * h * k1[1]), tilt_b)
            k3 = f((x + 0.5 * h * k2[0], v + 0.5 * h * k2[1]), tilt_b)
            k4 = f((x + h * k3[0], v + h * k3[1]), tilt_c)
            x = x + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            v = v + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        tilt = tilt + u * dt
        xs.append(x.copy())
        vs.append(v.copy())
    return np.array(xs), np.array(vs)


def rollout_ball(
    plan: ActionSequence,
    trajectory: np.ndarray,
    ball: ballmod.BallParams,
    unc: ballmod.UncertaintyModel,
    cfg: BallOracleConfig,
    half_length: float,
    dt: float,
    initial_tilt: np.ndarray,
    x0_range: tuple[float, float],
    v0_range: tuple[float, float],
) -> tuple[float, np.ndarray]:
    """Monte-Carlo validation of a tilt plan against the exact dynamics.

    Each rollout draws one constant parameter-noise sample and an initial
    state uniformly from the given ranges; success means the ball stays on
    the plate (|x| <= half_length componentwise) throughout. Returns the
    success rate and per-rollout max |x|.
    """
    rng = np.random.default_rng(cfg.seed)
    n = initial_tilt.shape[0]
    successes = 0
    max_abs = np.zeros(cfg.rollouts)
    for i in range(cfg.rollouts):
        eta_m = rng.normal(0.0, unc.sigma_m) if unc.sigma_m > 0 else 0.0
        eta_mu = rng.normal(0.0, unc.sigma_mu) if unc.sigma_mu > 0 else 0.0
        if np.any(unc.Sigma_p):
            eta_p = rng.multivariate_normal(np.zeros(n + 1), unc.Sigma_p)
        else:
            eta_p = np.zeros(n + 1)
        x0 = rng.uniform(x0_range[0], x0_range[1], size=n)
        v0 = rng.uniform(v0_range[0], v0_range[1], size=n)
        xs, _ = integrate_ball(
            plan, trajectory, ball, x0, v0, initial_tilt, dt, cfg.step,
            eta_m, eta_p, eta_mu,
        )
        m = float(np.max(np.abs(xs)))
        max_abs[i] = m
        if m <= half_length + 1e-12:
            successes += 1
    return successes / cfg.rollouts, max_abs


# --- sensitivity sweep ----------------------------------------------------


def sensitivity_sweep(
    v0_grid: Sequence[float],
    dv0_grid: Sequence[float],
    beta_grid: Sequence[float],
    trials: int,
    seed: int = 0,
    horizon_s: float = 3.0,
) -> list[dict]:
    """Planning-feasibility success rates for the catching task.

    For each (mean initial speed, speed uncertainty, slew bound) cell, run
    the open-loop synthesis on the catching retreat designed for the nominal
    speed, with the belief mean jittered per trial to model an inaccurate
    toss; success is a feasible, contained plan. Returns one row per cell:
    {v0, dv0, beta_max, success_rate}.
    """
    rows = []
    for beta in beta_grid:
        for v0 in v0_grid:
            for dv0 in dv0_grid:
                rng = np.random.default_rng(
                    seed + hash((round(v0, 6), round(dv0, 6), round(beta, 6))) % (2**31)
                )
                ok = 0
                for _ in range(trials):
                    vc = v0 + rng.uniform(-0.025, 0.025)
                    setup = ballmod.catching_setup(
                        v0, dv0, beta_max=beta, belief_center=vc
                    )
                    _, result, _ = ballmod.dynamic_control(
                        setup.grid, setup.trajectory(horizon_s), setup.ball,
                        setup.unc, setup.model, setup.params, setup.initial_tilt,
                    )
                    if result.success:
                        ok += 1
                rows.append(
                    {
                        "v0": float(v0),
                        "dv0": float(dv0),
                        "beta_max": float(beta),
                        "success_rate": ok / trials,
                    }
                )
    return rows
