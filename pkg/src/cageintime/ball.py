"""Dynamic caging for ball-on-plate balancing and catching.

The belief over ball states (position x velocity, n plate dimensions) lives
on a regular probability grid. The plate tilt is the control; an energy
function with a virtual spring defines a time-varying cage whose escape
level is the lowest static energy on the plate boundary. A barrier/Lyapunov
quadratic program picks tilt rates that keep the maximum belief energy
under the escape level while driving expected energy down without
collapsing the belief.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .core import (
    ActionSequence,
    AllMassLost,
    FailureReason,
    RunLog,
    TiltRate,
    VerificationResult,
)
from . import qp as qpmod

G = 9.81


@dataclass(frozen=True)
class BallParams:
    mass: float  # kg
    radius: float  # m
    inertia: float  # kg m^2
    mu_r: float  # rolling friction rate, 1/s

    def __post_init__(self):
        if min(self.mass, self.radius, self.inertia) <= 0 or self.mu_r < 0:
            raise ValueError("ball parameters must be positive (mu_r nonnegative)")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("effective-mass factor must lie in (0,1)")

    @property
    def m_eff(self) -> float:
        return self.mass + self.inertia / self.radius**2

    @property
    def kappa(self) -> float:
        """Translational share of applied acceleration under pure rolling."""
        return self.mass / (self.mass + self.inertia / self.radius**2)


def tennis_ball(mu_r: float = 0.3) -> BallParams:
    """Hollow-sphere tennis ball: I = (2/3) m r^2, so kappa = 3/5."""
    m, r = 0.058, 0.0335
    return BallParams(mass=m, radius=r, inertia=(2.0 / 3.0) * m * r**2, mu_r=mu_r)


@dataclass(frozen=True)
class UncertaintyModel:
    sigma_m: float  # relative mass error std
    Sigma_p: np.ndarray  # (n+1, n+1) plate accel noise covariance
    sigma_mu: float  # friction error std, 1/s

    def __post_init__(self):
        S = np.asarray(self.Sigma_p, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("Sigma_p must be square")
        if not np.allclose(S, S.T, atol=1e-12):
            raise ValueError("Sigma_p must be symmetric")
        if np.linalg.eigvalsh(S).min() < -1e-12:
            raise ValueError("Sigma_p must be positive semidefinite")
        if self.sigma_m < 0 or self.sigma_mu < 0:
            raise ValueError("noise stds must be nonnegative")
        object.__setattr__(self, "Sigma_p", S)
        S.setflags(write=False)


def no_uncertainty(n: int) -> UncertaintyModel:
    return UncertaintyModel(0.0, np.zeros((n + 1, n + 1)), 0.0)


@dataclass(frozen=True)
class PlateState:
    n: int
    half_length: float  # m
    tilt: np.ndarray  # (n,) rad
    accel: np.ndarray  # (n+1,) world plate acceleration, m/s^2

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("plate dimension must be 1 or 2")
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")
        t = np.asarray(self.tilt, dtype=float).reshape(self.n)
        a = np.asarray(self.accel, dtype=float).reshape(self.n + 1)
        if np.any(np.abs(t) >= math.pi / 2):
            raise ValueError("tilt magnitude must stay below pi/2")
        object.__setattr__(self, "tilt", t)
        object.__setattr__(self, "accel", a)
        t.setflags(write=False)
        a.setflags(write=False)


@dataclass(frozen=True)
class EnergyModel:
    k_ve: float  # virtual spring, N/m
    m_eff: float  # kg
    mass: float  # kg, bare mass for the potential term

    def __post_init__(self):
        if self.k_ve <= 0 or self.m_eff <= 0 or self.mass <= 0:
            raise ValueError("energy model parameters must be positive")


@dataclass(frozen=True)
class ControlParams:
    gamma: float = 5.0  # 1/s, linear class-K gain
    c: float = 1.0  # 1/s, Lyapunov decrease rate
    lam: float = 1.0  # slack weight
    k_S: float = 0.002  # J, entropy weight
    dtheta_min: float = -4.0  # rad/s
    dtheta_max: float = 4.0
    beta_max: float = 25.0  # rad/s^2 slew limit
    tilt_max: float = 1.4  # rad, tilt range folded into the rate box
    dt: float = 0.02  # s
    eps: float = 0.01  # rad/s probe for numerical Lie derivatives

    def __post_init__(self):
        if min(self.gamma, self.c, self.lam, self.dt, self.eps) <= 0:
            raise ValueError("gamma, c, lam, dt, eps must be positive")
        if self.dtheta_min >= self.dtheta_max:
            raise ValueError("dtheta bounds must satisfy min < max")
        if self.beta_max < 0:
            raise ValueError("beta_max must be nonnegative")
        if not 0.0 < self.tilt_max < math.pi / 2:
            raise ValueError("tilt_max must lie in (0, pi/2)")


class ProbGrid:
    """Normalized probability over the 2n-dimensional (position, velocity) box.

    values has shape (N,)*2n with axes (x[, y], vx[, vy]); axis coordinate i
    maps to -max + i * 2*max/(N-1).
    """

    def __init__(self, n: int, N: int, x_max: float, v_max: float, values: np.ndarray):
        if n not in (1, 2):
            raise ValueError("n must be 1 or 2")
        if N < 3 or N % 2 == 0:
            raise ValueError("N must be odd and at least 3")
        vals = np.asarray(values, dtype=float)
        if vals.shape != (N,) * (2 * n):
            raise ValueError("values shape must be (N,)*2n")
        if vals.min() < 0:
            raise ValueError("probabilities must be nonnegative")
        s = vals.sum()
        if s <= 0:
            raise ValueError("support must be nonempty")
        self.n = n
        self.N = N
        self.x_max = x_max
        self.v_max = v_max
        self.values = vals / s
        self.values.setflags(write=False)

    @property
    def x_axis(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.N)

    @property
    def v_axis(self) -> np.ndarray:
        return np.linspace(-self.v_max, self.v_max, self.N)

    @property
    def x_step(self) -> float:
        return 2.0 * self.x_max / (self.N - 1)

    @property
    def v_step(self) -> float:
        return 2.0 * self.v_max / (self.N - 1)

    def support(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(positions (M,n), velocities (M,n), probabilities (M,))."""
        idx = np.nonzero(self.values)
        p = self.values[idx]
        xs = np.column_stack([self.x_axis[idx[d]] for d in range(self.n)])
        vs = np.column_stack([self.v_axis[idx[self.n + d]] for d in range(self.n)])
        return xs, vs, p

    @classmethod
    def delta(cls, n: int, N: int, x_max: float, v_max: float,
              x, v) -> "ProbGrid":
        """Point mass at the cell nearest (x, v)."""
        vals = np.zeros((N,) * (2 * n))
        xi = np.clip(np.rint((np.atleast_1d(x) + x_max) / (2 * x_max / (N - 1))), 0, N - 1)
        vi = np.clip(np.rint((np.atleast_1d(v) + v_max) / (2 * v_max / (N - 1))), 0, N - 1)
        vals[tuple(int(i) for i in xi) + tuple(int(i) for i in vi)] = 1.0
        return cls(n, N, x_max, v_max, vals)

    @classmethod
    def box(cls, n: int, N: int, x_max: float, v_max: float,
            x_lo, x_hi, v_lo, v_hi) -> "ProbGrid":
        """Uniform mass over cells inside the given position/velocity ranges."""
        x_lo = np.broadcast_to(np.atleast_1d(np.asarray(x_lo, float)), (n,))
        x_hi = np.broadcast_to(np.atleast_1d(np.asarray(x_hi, float)), (n,))
        v_lo = np.broadcast_to(np.atleast_1d(np.asarray(v_lo, float)), (n,))
        v_hi = np.broadcast_to(np.atleast_1d(np.asarray(v_hi, float)), (n,))
        ax = np.linspace(-x_max, x_max, N)
        av = np.linspace(-v_max, v_max, N)
        masks = []
        for d in range(n):
            masks.append((ax >= x_lo[d] - 1e-12) & (ax <= x_hi[d] + 1e-12))
        for d in range(n):
            masks.append((av >= v_lo[d] - 1e-12) & (av <= v_hi[d] + 1e-12))
        vals = np.ones((N,) * (2 * n))
        for axis, mk in enumerate(masks):
            shape = [1] * (2 * n)
            shape[axis] = N
            vals = vals * mk.reshape(shape)
        return cls(n, N, x_max, v_max, vals)


# --- plate-frame kinematics and dynamics ----------------------------------


def plate_frame_accels(plate: PlateState, g: float = G):
    """In-plane components of gravity and plate acceleration, per tilt axis.

    Returns (g_theta, a_p, a_eff) with a_eff = g_theta + a_p; for n=1 this is
    (g + ddz) sin(theta) + ddx cos(theta).
    """
    t = plate.tilt
    ddz = plate.accel[plate.n]
    dd_in = plate.accel[: plate.n]
    g_theta = g * np.sin(t)
    a_p = ddz * np.sin(t) + dd_in * np.cos(t)
    return g_theta, a_p, g_theta + a_p


def _inplane_jacobian(plate: PlateState) -> np.ndarray:
    """d(a_eff)/d(world plate accel), shape (n, n+1)."""
    T = np.zeros((plate.n, plate.n + 1))
    for i in range(plate.n):
        T[i, i] = math.cos(plate.tilt[i])
        T[i, plate.n] = math.sin(plate.tilt[i])
    return T


def accel_distribution(
    x: np.ndarray,
    v: np.ndarray,
    plate: PlateState,
    ball: BallParams,
    unc: UncertaintyModel,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian ball acceleration (mean, covariance) at one state.

    Mean is the noise-free dynamics; covariance is first-order propagation
    of the mass, plate-acceleration, and friction noise channels.
    """
    v = np.asarray(v, dtype=float).reshape(plate.n)
    _, _, a_eff = plate_frame_accels(plate)
    k = ball.kappa
    mu = k * a_eff - ball.mu_r * v
    drive = k * a_eff  # sensitivity to relative mass error
    T = _inplane_jacobian(plate)
    Sigma = (
        unc.sigma_m**2 * np.outer(drive, drive)
        + k**2 * T @ unc.Sigma_p @ T.T
        + unc.sigma_mu**2 * np.outer(v, v)
    )
    return mu, Sigma


# --- energy cage ----------------------------------------------------------


def energy(x, v, a_eff, model: EnergyModel) -> float:
    """Total cage energy: kinetic + virtual spring + tilt potential."""
    x = np.atleast_1d(np.asarray(x, float))
    v = np.atleast_1d(np.asarray(v, float))
    a = np.atleast_1d(np.asarray(a_eff, float))
    return float(
        0.5 * model.m_eff * (v @ v)
        + 0.5 * model.k_ve * (x @ x)
        - model.mass * (a @ x)
    )


def e_max(plate: PlateState, model: EnergyModel) -> float:
    """Escape level: lowest static energy on the plate boundary."""
    _, _, a_eff = plate_frame_accels(plate)
    l = plate.half_length
    if plate.n == 1:
        return 0.5 * model.k_ve * l * l - model.mass * abs(float(a_eff[0])) * l
    # square boundary sampled at about 1 degree of arc-length
    step = l * math.pi / 180.0
    m = max(2, int(math.ceil(2 * l / step)) + 1)
    s = np.linspace(-l, l, m)
    edges = [
        np.column_stack([s, np.full(m, l)]),
        np.column_stack([s, np.full(m, -l)]),
        np.column_stack([np.full(m, l), s]),
        np.column_stack([np.full(m, -l), s]),
    ]
    b = np.vstack(edges)
    stat = 0.5 * model.k_ve * np.sum(b * b, axis=1) - model.mass * (b @ a_eff)
    return float(stat.min())


def _energy_field(grid: ProbGrid, plate: PlateState, model: EnergyModel) -> np.ndarray:
    """Energy of every grid cell, same shape as grid.values."""
    _, _, a_eff = plate_frame_accels(plate)
    ax, av = grid.x_axis, grid.v_axis
    n, N = grid.n, grid.N
    E = np.zeros((N,) * (2 * n))
    for d in range(n):
        shape = [1] * (2 * n)
        shape[d] = N
        E = E + (0.5 * model.k_ve * ax**2 - model.mass * a_eff[d] * ax).reshape(shape)
        shape = [1] * (2 * n)
        shape[n + d] = N
        E = E + (0.5 * model.m_eff * av**2).reshape(shape)
    return E


def entropy(grid: ProbGrid) -> float:
    p = grid.values[grid.values > 0]
    return float(-np.sum(p * np.log(p)))


def max_energy(grid: ProbGrid, plate: PlateState, model: EnergyModel) -> float:
    E = _energy_field(grid, plate, model)
    return float(E[grid.values > 0].max())


def cbf_value(grid: ProbGrid, plate: PlateState, model: EnergyModel) -> float:
    """Barrier: margin between the escape level and the worst supported cell."""
    return e_max(plate, model) - max_energy(grid, plate, model)


def clf_value(grid: ProbGrid, plate: PlateState, model: EnergyModel, k_S: float) -> float:
    """Expected energy minus weighted belief entropy."""
    E = _energy_field(grid, plate, model)
    return float(np.sum(grid.values * E)) - k_S * entropy(grid)


# --- belief propagation ---------------------------------------------------

_QUAD_OFFSETS = np.arange(-3.0, 4.0)
_QUAD_W = np.exp(-0.5 * _QUAD_OFFSETS**2)
_QUAD_W = _QUAD_W / _QUAD_W.sum()


def propagate_prob(
    grid: ProbGrid,
    u: TiltRate,
    plate: PlateState,
    ball: BallParams,
    unc: UncertaintyModel,
    dt: float,
) -> tuple[ProbGrid, float]:
    """One belief step under the already-advanced plate state.

    Each supported cell spreads its mass over a 7-node-per-dimension
    deterministic quadrature of its Gaussian acceleration, deposited at the
    nearest destination cell of one Euler step. Mass leaving the box is
    returned as lost_mass; cells below 1e-3 of the peak are pruned before
    renormalizing.
    """
    n, N = grid.n, grid.N
    xs, vs, ps = grid.support()
    M = xs.shape[0]
    _, _, a_eff = plate_frame_accels(plate)
    k = ball.kappa
    T = _inplane_jacobian(plate)
    # diagonal acceleration variance per cell and dimension
    drive = k * a_eff
    base_var = unc.sigma_m**2 * drive**2 + k**2 * np.diag(T @ unc.Sigma_p @ T.T)
    var = base_var[None, :] + unc.sigma_mu**2 * vs**2  # (M, n)
    sig = np.sqrt(var)
    mu = drive[None, :] - ball.mu_r * vs  # (M, n)

    # quadrature node accelerations: (M, 7^n, n)
    if n == 1:
        nodes = mu[:, None, :] + _QUAD_OFFSETS[None, :, None] * sig[:, None, :]
        wts = np.broadcast_to(_QUAD_W[None, :], (M, 7))
    else:
        o1, o2 = np.meshgrid(_QUAD_OFFSETS, _QUAD_OFFSETS, indexing="ij")
        offs = np.column_stack([o1.ravel(), o2.ravel()])  # (49, 2)
        nodes = mu[:, None, :] + offs[None, :, :] * sig[:, None, :]
        w1, w2 = np.meshgrid(_QUAD_W, _QUAD_W, indexing="ij")
        wts = np.broadcast_to((w1 * w2).ravel()[None, :], (M, 49))

    v_new = vs[:, None, :] + nodes * dt  # (M, Q, n)
    x_new = np.broadcast_to(xs[:, None, :] + vs[:, None, :] * dt, v_new.shape)
    xi = np.rint((x_new + grid.x_max) / grid.x_step)
    vi = np.rint((v_new + grid.v_max) / grid.v_step)
    ok = np.all((xi >= 0) & (xi <= N - 1) & (vi >= 0) & (vi <= N - 1), axis=2)
    mass = ps[:, None] * wts
    lost = float(mass[~ok].sum())
    if lost >= 1.0 - 1e-12:
        raise AllMassLost("all probability mass left the state box")

    flat = np.zeros(N ** (2 * n))
    xi_ok = xi[ok].astype(int)
    vi_ok = vi[ok].astype(int)
    if n == 1:
        lin = xi_ok[:, 0] * N + vi_ok[:, 0]
    else:
        lin = ((xi_ok[:, 0] * N + xi_ok[:, 1]) * N + vi_ok[:, 0]) * N + vi_ok[:, 1]
    np.add.at(flat, lin, mass[ok])
    flat[flat < 1e-3 * flat.max()] = 0.0
    out = ProbGrid(n, N, grid.x_max, grid.v_max, flat.reshape((N,) * (2 * n)))
    return out, lost


# --- Lie derivatives and the control loop ---------------------------------


def lie_derivatives(
    grid: ProbGrid,
    plate: PlateState,
    ball: BallParams,
    unc: UncertaintyModel,
    model: EnergyModel,
    params: ControlParams,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Numerical (Lf_h, Lg_h, Lf_V, Lg_V) via one-step belief probes."""
    n = plate.n
    dt, eps = params.dt, params.eps

    def phi(u: np.ndarray) -> tuple[float, float]:
        tilt = plate.tilt + u * dt
        p2 = PlateState(n, plate.half_length, tilt, plate.accel)
        g2, _ = propagate_prob(grid, TiltRate.of(u), p2, ball, unc, dt)
        return cbf_value(g2, p2, model), clf_value(g2, p2, model, params.k_S)

    h_now = cbf_value(grid, plate, model)
    V_now = clf_value(grid, plate, model, params.k_S)
    h0, V0 = phi(np.zeros(n))
    Lf_h = (h0 - h_now) / dt
    Lf_V = (V0 - V_now) / dt
    Lg_h = np.zeros(n)
    Lg_V = np.zeros(n)
    for d in range(n):
        e = np.zeros(n)
        e[d] = eps
        hp, Vp = phi(e)
        hm, Vm = phi(-e)
        Lg_h[d] = (hp - hm) / (2.0 * eps * dt)
        Lg_V[d] = (Vp - Vm) / (2.0 * eps * dt)
    return Lf_h, Lg_h, Lf_V, Lg_V


def trajectory_accels(positions: np.ndarray, dt: float) -> np.ndarray:
    """Second differences of the plate path, endpoints padded."""
    p = np.atleast_2d(np.asarray(positions, dtype=float))
    if p.shape[0] < 2:
        return np.zeros_like(p)
    acc = np.zeros_like(p)
    acc[1:-1] = (p[2:] - 2 * p[1:-1] + p[:-2]) / dt**2
    acc[0] = acc[1]
    acc[-1] = acc[-2]
    return acc


def dynamic_control(
    initial: ProbGrid,
    trajectory: np.ndarray,  # (T+1, n+1) world plate positions
    ball: BallParams,
    unc: UncertaintyModel,
    model: EnergyModel,
    params: ControlParams,
    initial_tilt: Optional[np.ndarray] = None,
) -> tuple[ActionSequence, VerificationResult, RunLog]:
    """Open-loop control synthesis over the plate trajectory.

    At each step the barrier/Lyapunov QP (with rate and slew bounds) picks
    the tilt rate, the tilt advances, and the belief propagates. Failure is
    declared when the QP is infeasible, the tilt would leave its range, or
    the maximum supported energy exceeds the escape level.
    """
    n = initial.n
    traj = np.atleast_2d(np.asarray(trajectory, dtype=float))
    if traj.shape[1] != n + 1:
        raise ValueError(f"trajectory must have {n + 1} columns for n={n}")
    T = traj.shape[0] - 1
    accels = trajectory_accels(traj, params.dt)
    tilt = np.zeros(n) if initial_tilt is None else np.asarray(initial_tilt, float).reshape(n)
    grid = initial
    prev_u = np.zeros(n)
    log = RunLog()
    steps: list = []
    result = VerificationResult(True)
    for t in range(T):
        plate = PlateState(n, model_half_length(model, initial), tilt, accels[t])
        Lf_h, Lg_h, Lf_V, Lg_V = lie_derivatives(grid, plate, ball, unc, model, params)
        h = cbf_value(grid, plate, model)
        V = clf_value(grid, plate, model, params.k_S)
        lo = np.maximum(params.dtheta_min, prev_u - params.beta_max * params.dt)
        hi = np.minimum(params.dtheta_max, prev_u + params.beta_max * params.dt)
        # fold the tilt range into the rate box so the plate never leaves it:
        # one-step reachability plus a braking bound so the rate can always
        # be slewed to zero before the range boundary
        room_hi = np.maximum(0.0, params.tilt_max - tilt)
        room_lo = np.maximum(0.0, params.tilt_max + tilt)
        beta, dt = params.beta_max, params.dt
        if beta > 0:
            cap_hi = beta * (-dt + np.sqrt(dt * dt + 2.0 * room_hi / beta))
            cap_lo = beta * (-dt + np.sqrt(dt * dt + 2.0 * room_lo / beta))
            lo = np.maximum(lo, -cap_lo)
            hi = np.minimum(hi, cap_hi)
        failed = None
        u = np.zeros(n)
        lost = 0.0
        if np.any(lo >= hi):
            failed = FailureReason.InfeasibleAction
        else:
            sol = qpmod.solve(
                qpmod.CbfClfQP(
                    n=n, Lf_h=Lf_h, Lg_h=Lg_h, alpha_h=params.gamma * h,
                    Lf_V=Lf_V, Lg_V=Lg_V, cV=params.c * V, lam=params.lam,
                    lo=lo, hi=hi,
                )
            )
            if not sol.feasible:
                failed = FailureReason.InfeasibleAction
            else:
                u = sol.dtheta
                tilt_next = tilt + u * params.dt
                if np.any(np.abs(tilt_next) >= math.pi / 2):
                    failed = FailureReason.InfeasibleAction
                else:
                    plate_next = PlateState(n, plate.half_length, tilt_next, accels[t])
                    grid, lost = propagate_prob(
                        grid, TiltRate.of(u), plate_next, ball, unc, params.dt
                    )
                    if lost > 1e-3:
                        log.warn(f"step {t}: lost_mass {lost:.4g} exceeds 1e-3")
                    tilt = tilt_next
                    plate = plate_next
        emax_now = e_max(plate, model)
        maxE = max_energy(grid, plate, model)
        log.add(
            {
                "t": t,
                "action": {"dtheta": u.tolist()},
                "contained": bool(maxE < emax_now) and failed is None,
                "pss_cells": int(np.count_nonzero(grid.values)),
                "cage_center": traj[t + 1, :n].tolist(),
                "E_max": emax_now,
                "max_E": maxE,
                "h": h,
                "V": V,
                "entropy": entropy(grid),
                "lost_mass": lost,
                "dtheta": u.tolist(),
                "tilt": tilt.tolist(),
            }
        )
        if failed is None and maxE >= emax_now:
            failed = FailureReason.EscapedCage
        if failed is not None:
            result = VerificationResult(False, t, failed)
            steps.append(TiltRate.of(u))
            break
        steps.append(TiltRate.of(u))
        prev_u = u
    return ActionSequence.of(steps), result, log


def model_half_length(model: EnergyModel, grid: ProbGrid) -> float:
    """The plate half-length equals the position box bound by construction."""
    return grid.x_max


@dataclass(frozen=True)
class TaskSetup:
    """Everything one dynamic run needs besides the plate trajectory.

    retreat, when set, is (accel, t_brake): the plate translates along the
    first in-plane axis with constant acceleration accel for t_brake seconds
    and then glides at constant velocity, so the incoming ball is brought to
    rest in the plate frame with the plate level.
    """

    grid: ProbGrid
    ball: BallParams
    unc: UncertaintyModel
    model: EnergyModel
    params: ControlParams
    initial_tilt: np.ndarray
    retreat: Optional[tuple[float, float]] = None

    def trajectory(self, horizon_s: float) -> np.ndarray:
        """Plate path over the given horizon: stationary, or the retreat."""
        T = int(round(horizon_s / self.params.dt))
        path = np.zeros((T + 1, self.grid.n + 1))
        if self.retreat is not None:
            a, t_brake = self.retreat
            t = np.arange(T + 1) * self.params.dt
            ramp = np.where(
                t <= t_brake,
                0.5 * a * t**2,
                0.5 * a * t_brake**2 + a * t_brake * (t - t_brake),
            )
            path[:, 0] = ramp
        return path


def default_uncertainty(n: int, sigma_m: float = 0.05,
                        sigma_p: float = 0.002, sigma_mu: float = 0.05) -> UncertaintyModel:
    """Default noise channels: 5% mass and friction error, and a plate
    acceleration bias of 0.002 m/s^2 (a constant-per-run bias of this size
    corresponds to a few centimeters of end-effector path deviation over a
    several-second run, the accuracy class of a position-servoed arm)."""
    return UncertaintyModel(sigma_m, sigma_p**2 * np.eye(n + 1), sigma_mu)


def balancing_setup(
    n: int = 1,
    N: int = 81,
    half_length: float = 0.08,
    v_max: float = 1.0,
    k_ve: float = 10.0,
    beta_max: float = 25.0,
    x_spread: float = 0.004,
    v_spread: float = 0.02,
    ball: Optional[BallParams] = None,
    unc: Optional[UncertaintyModel] = None,
) -> TaskSetup:
    """Balancing task: belief concentrated near rest at the plate center."""
    b = tennis_ball() if ball is None else ball
    u = default_uncertainty(n) if unc is None else unc
    grid = ProbGrid.box(
        n, N, half_length, v_max,
        -x_spread, x_spread, -v_spread, v_spread,
    )
    model = EnergyModel(k_ve=k_ve, m_eff=b.m_eff, mass=b.mass)
    params = ControlParams(beta_max=beta_max)
    return TaskSetup(grid, b, u, model, params, np.zeros(n))


def catching_setup(
    v_center: float,
    dv: float,
    beta_max: float = 25.0,
    k_ve: float = 60.0,
    N: int = 81,
    half_length: float = 0.15,
    v_max: float = 1.0,
    stop_fraction: float = 0.3,
    entry_fraction: float = 0.5,
    x_spread: float = 0.004,
    belief_center: Optional[float] = None,
    ball: Optional[BallParams] = None,
    unc: Optional[UncertaintyModel] = None,
) -> TaskSetup:
    """Catching task: incoming-ball belief and a momentum-absorbing retreat.

    The ball enters near the upstream plate edge (entry_fraction of the
    half-length behind the center) so most of the plate length is available
    for braking. The plate starts level and translates away under the ball
    with constant acceleration sized so the nominal ball comes to rest in
    the plate frame at stop_fraction of the half-length past the center;
    the tilt controller then only has to absorb the residual spread. A
    braking pre-tilt instead of the retreat leaves the stopped ball on a
    slope it must roll back down, which the myopic controller cannot
    recover, so the retreat is the default catch motion.

    belief_center shifts the mean of the velocity belief away from the
    nominal speed the retreat is designed for, to model an inaccurate toss.
    """
    b = tennis_ball() if ball is None else ball
    u = default_uncertainty(1) if unc is None else unc
    vc = v_center if belief_center is None else belief_center
    x_entry = -math.copysign(entry_fraction * half_length, v_center)
    grid = ProbGrid.box(
        1, N, half_length, v_max,
        x_entry - x_spread, x_entry + x_spread,
        vc - dv / 2.0, vc + dv / 2.0,
    )
    model = EnergyModel(k_ve=k_ve, m_eff=b.m_eff, mass=b.mass)
    params = ControlParams(beta_max=beta_max, eps=2.0)
    run = abs(stop_fraction * half_length * math.copysign(1.0, v_center) - x_entry)
    # plate acceleration that cancels the nominal relative velocity over the
    # run length; the rolling factor kappa scales frame acceleration into
    # ball acceleration, and the sign opposes the incoming velocity
    decel = v_center**2 / (2.0 * run)
    accel = -math.copysign(decel / b.kappa, v_center)
    t_brake = abs(v_center) / decel if decel > 0 else 0.0
    return TaskSetup(grid, b, u, model, params, np.zeros(1), (accel, t_brake))


def verify_ball_plan(
    initial: ProbGrid,
    actions: ActionSequence,
    trajectory: np.ndarray,
    ball: BallParams,
    unc: UncertaintyModel,
    model: EnergyModel,
    params: ControlParams,
    initial_tilt: Optional[np.ndarray] = None,
) -> VerificationResult:
    """Replay a tilt-rate plan through the generic verification driver using
    energy containment and the rate/slew feasibility bounds."""
    from .core import verify_caging_in_time

    n = initial.n
    traj = np.atleast_2d(np.asarray(trajectory, dtype=float))
    accels = trajectory_accels(traj, params.dt)
    tilt0 = np.zeros(n) if initial_tilt is None else np.asarray(initial_tilt, float).reshape(n)
    tilts = [tilt0]
    for a in actions:
        tilts.append(tilts[-1] + np.asarray(a.dtheta) * params.dt)

    def cage_at(t: int):
        idx = min(t, len(tilts) - 1)
        plate = PlateState(n, initial.x_max, tilts[idx], accels[min(idx, len(accels) - 1)])
        return plate

    def propagate(grid, action, t):
        plate = cage_at(t + 1)
        g2, _ = propagate_prob(grid, action, plate, ball, unc, params.dt)
        return g2

    def contains(grid, plate):
        return max_energy(grid, plate, model) < e_max(plate, model)

    def feasible(action, t):
        u = np.asarray(action.dtheta, dtype=float)
        prev = np.zeros(n) if t == 0 else np.asarray(actions[t - 1].dtheta, dtype=float)
        in_box = np.all(u >= params.dtheta_min - 1e-9) and np.all(u <= params.dtheta_max + 1e-9)
        slew = np.all(np.abs(u - prev) <= params.beta_max * params.dt + 1e-9)
        return bool(in_box and slew)

    return verify_caging_in_time(initial, actions, cage_at, propagate, contains, feasible)
