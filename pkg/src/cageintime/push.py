"""Quasi-static planar pushing with a moving geometric cage.

The object is abstracted to its bounding circle of radius r. A line pusher
of length 2*half_length starts tangent to the circle of radius R around the
cage center and travels d_push toward the center. Object displacement per
push is bounded by a semi-ellipse with semi-axes (d_con, d_con/2) pointing
along the push direction, where d_con is the pusher travel after first
contact. The planner propagates a binary occupancy grid of possible object
positions and selects push angles with a two-term outlier heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .core import (
    ActionSequence,
    CageCircle,
    EmptyResult,
    FailureReason,
    NoAction,
    PSSGrid,
    PushAngle,
    RunLog,
    Vec2,
    VerificationResult,
    WaypointSpacingTooLarge,
    action_to_json,
    contains_geometric,
    feasibility_quasi_static,
    verify_caging_in_time,
)


@dataclass(frozen=True)
class PushProblem:
    """All geometry and tuning for one pushing task. Lengths in mm."""

    object_radius: float = 25.0  # r
    cage_size: float = 20.0  # R - r
    K: int = 128
    d_push: float = 20.0
    pusher_length: float = 100.0
    resolution: float = 1.0  # mm per pixel
    lambda1: float = 1.0
    lambda2: float = 1.0
    # shortlist size for angle selection; shrink when K is coarse so the
    # angular window the continuity preference may pick from stays narrow
    shortlist: int = 5
    trajectory: tuple[Vec2, ...] = ()
    # planner containment margin: the cage used during planning is shrunk by
    # this much so rasterization error cannot push true outcomes past the
    # nominal cage boundary
    margin: float = 2.0

    def __post_init__(self):
        if self.object_radius <= 0 or self.cage_size <= 0:
            raise ValueError("object_radius and cage_size must be positive")
        if self.K < 3:
            raise ValueError("need at least 3 candidate angles")
        if self.d_push <= 0 or self.pusher_length <= 0:
            raise ValueError("d_push and pusher_length must be positive")
        if self.resolution > self.cage_size / 10.0 + 1e-12:
            raise ValueError("resolution must be at most cage_size/10")
        if not 0.0 <= self.margin < self.cage_size:
            raise ValueError("margin must lie in [0, cage_size)")
        if self.shortlist < 1:
            raise ValueError("shortlist must be at least 1")

    @property
    def R(self) -> float:
        """Pusher standoff radius: tangent circle for the line pusher."""
        return self.cage_size + self.object_radius

    @property
    def grid_size(self) -> int:
        n = math.ceil(2.0 * (self.R + self.d_push + 10.0) / self.resolution)
        return n + 1 if n % 2 == 0 else n

    def check_spacing(self) -> None:
        limit = self.cage_size / 2.0
        for a, b in zip(self.trajectory[:-1], self.trajectory[1:]):
            if (b - a).norm() > limit + 1e-9:
                raise WaypointSpacingTooLarge(
                    f"waypoint spacing {(b - a).norm():.3f} mm exceeds "
                    f"cage_size/2 = {limit:.3f} mm"
                )


@dataclass(frozen=True)
class PusherPose:
    center: Vec2
    direction: Vec2  # unit, toward the cage center
    half_length: float

    def __post_init__(self):
        if abs(self.direction.norm() - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")

    @property
    def tangent(self) -> Vec2:
        """Unit vector along the pusher segment."""
        return Vec2(-self.direction.y, self.direction.x)

    def advanced(self, distance: float) -> "PusherPose":
        d = self.direction
        return PusherPose(
            Vec2(self.center.x + d.x * distance, self.center.y + d.y * distance),
            d,
            self.half_length,
        )


@dataclass(frozen=True)
class SemiEllipseMotionSet:
    d_con: float
    push_direction: Vec2
    is_null: bool

    def __post_init__(self):
        if not self.is_null and not 0.0 <= self.d_con:
            raise ValueError("d_con must be nonnegative")

    def contains(self, disp: Vec2, tol: float = 1e-9) -> bool:
        if disp.norm() <= tol:
            return True
        if self.is_null or self.d_con <= tol:
            return False
        d = self.push_direction
        u = disp.x * d.x + disp.y * d.y  # along push direction, must be >= 0
        v = -disp.x * d.y + disp.y * d.x
        if u < -tol:
            return False
        a, b = self.d_con, self.d_con / 2.0
        return u * u / (a * a) + v * v / (b * b) <= 1.0 + tol


@dataclass(frozen=True)
class POA:
    """Workspace area possibly occupied by the object body."""

    cells: np.ndarray
    resolution: float
    frame_center: Vec2

    def __post_init__(self):
        object.__setattr__(self, "cells", np.asarray(self.cells, dtype=bool))
        self.cells.setflags(write=False)


def pusher_pose(cage_center_next: Vec2, R: float, theta: float, half_length: float) -> PusherPose:
    """Starting pose of candidate angle theta: tangent to the standoff circle."""
    if R <= 0:
        raise ValueError("R must be positive")
    ct, st = math.cos(theta), math.sin(theta)
    center = Vec2(cage_center_next.x + R * ct, cage_center_next.y + R * st)
    return PusherPose(center, Vec2(-ct, -st), half_length)


def segment_distance(points: np.ndarray, pose: PusherPose) -> np.ndarray:
    """Distance from each point (M,2) to the pusher segment."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tang = pose.tangent
    rel_x = pts[:, 0] - pose.center.x
    rel_y = pts[:, 1] - pose.center.y
    along = rel_x * tang.x + rel_y * tang.y
    along = np.clip(along, -pose.half_length, pose.half_length)
    dx = rel_x - along * tang.x
    dy = rel_y - along * tang.y
    return np.hypot(dx, dy)


def motion_set(q: Vec2, pose: PusherPose, r: float, d_push: float) -> SemiEllipseMotionSet:
    """Displacement bound for an object at q under a push from pose."""
    dist = float(segment_distance(q.as_array()[None, :], pose)[0])
    if dist > r + d_push:
        return SemiEllipseMotionSet(0.0, pose.direction, True)
    d_con = d_push - max(0.0, dist - r)
    d_con = min(max(d_con, 0.0), d_push)
    return SemiEllipseMotionSet(d_con, pose.direction, False)


def _candidate_offsets(d_push: float, rho: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All integer pixel offsets within distance d_push, with world coords."""
    m = int(math.ceil(d_push / rho))
    di, dj = np.mgrid[-m : m + 1, -m : m + 1]
    di, dj = di.ravel(), dj.ravel()
    wx = dj * rho
    wy = di * rho
    keep = wx * wx + wy * wy <= d_push * d_push + 1e-9
    return di[keep], dj[keep], np.column_stack([wx[keep], wy[keep]])


def propagate_pss(
    pss: PSSGrid,
    action: Optional[float],
    cage_center_next: Vec2,
    problem: PushProblem,
) -> PSSGrid:
    """One planning step: re-center the grid on the next cage center and,
    for a push at angle ``action``, replace every occupied cell by the union
    of its semi-ellipse displacements, then cut cells whose bounding circle
    would penetrate the pusher's final pose.

    The frame shift is snapped to whole pixels and the residual kept in
    frame_center, so cell world positions are exact across steps.
    """
    if pss.is_empty:
        raise EmptyResult("cannot propagate an empty PSS")
    rho = pss.resolution
    h, w = pss.cells.shape
    shift_x = (cage_center_next.x - pss.frame_center.x) / rho
    shift_y = (cage_center_next.y - pss.frame_center.y) / rho
    sj, si = int(round(shift_x)), int(round(shift_y))
    new_center = Vec2(pss.frame_center.x + sj * rho, pss.frame_center.y + si * rho)

    ii, jj = np.nonzero(pss.cells)
    ii = ii - si
    jj = jj - sj

    if action is None:
        cells = np.zeros((h, w), dtype=bool)
        keep = (ii >= 0) & (ii < h) & (jj >= 0) & (jj < w)
        cells[ii[keep], jj[keep]] = True
        return PSSGrid(cells=cells, resolution=rho, frame_center=new_center)

    theta = float(action)
    start = pusher_pose(cage_center_next, problem.R, theta, problem.pusher_length / 2.0)
    final = start.advanced(problem.d_push)

    x = new_center.x + (jj - (w - 1) / 2.0) * rho
    y = new_center.y + (ii - (h - 1) / 2.0) * rho
    dist = segment_distance(np.column_stack([x, y]), start)

    cells = np.zeros((h, w), dtype=bool)
    untouched = dist > problem.object_radius + problem.d_push
    cells[ii[untouched], jj[untouched]] = True

    ci, cj = ii[~untouched], jj[~untouched]
    if ci.size:
        d_con = problem.d_push - np.maximum(0.0, dist[~untouched] - problem.object_radius)
        d_con = np.clip(d_con, 0.0, problem.d_push)
        odi, odj, ow = _candidate_offsets(problem.d_push, rho)
        d = start.direction
        u = ow[:, 0] * d.x + ow[:, 1] * d.y  # along the push direction
        v = -ow[:, 0] * d.y + ow[:, 1] * d.x
        a = d_con[:, None]
        b = a / 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = (u[None, :] >= -1e-12) & (
                u[None, :] ** 2 / a**2 + v[None, :] ** 2 / b**2 <= 1.0 + 1e-12
            )
        zero = (odi == 0) & (odj == 0)
        inside |= zero[None, :]
        pair_c, pair_o = np.nonzero(inside)
        ni = ci[pair_c] + odi[pair_o]
        nj = cj[pair_c] + odj[pair_o]
        keep = (ni >= 0) & (ni < h) & (nj >= 0) & (nj < w)
        cells[ni[keep], nj[keep]] = True

    # penetration cut against the final pusher pose. The contacted object
    # ends with its center at r*sin(beta) from the final segment, where the
    # rotation beta can deviate from pi/2 by at most d_push/(2r) under the
    # friction bound, so anything closer than r*cos(d_push/2r) is impossible
    # (one extra pixel of slack for rasterization).
    r = problem.object_radius
    r_pen = r * math.cos(min(math.pi / 2.0, problem.d_push / (2.0 * r))) - rho
    oi, oj = np.nonzero(cells)
    ox = new_center.x + (oj - (w - 1) / 2.0) * rho
    oy = new_center.y + (oi - (h - 1) / 2.0) * rho
    pen = segment_distance(np.column_stack([ox, oy]), final) < r_pen
    if pen.any():
        cells[oi[pen], oj[pen]] = False
    if not cells.any():
        raise EmptyResult("penetration cut removed every propagated cell")
    return PSSGrid(cells=cells, resolution=rho, frame_center=new_center)


def compute_poa(pss: PSSGrid, r: float) -> POA:
    """Dilate the occupancy by a disk of radius r (in pixels, ceil(r/rho))."""
    if pss.is_empty:
        return POA(cells=pss.cells.copy(), resolution=pss.resolution, frame_center=pss.frame_center)
    rp = int(math.ceil(r / pss.resolution))
    # disk dilation via the exact Euclidean distance transform (much faster
    # than morphological dilation with a large disk element)
    dil = ndimage.distance_transform_edt(~pss.cells) <= rp
    return POA(cells=dil, resolution=pss.resolution, frame_center=pss.frame_center)


def heuristic_score(
    poa: POA,
    theta_k: float,
    cage_next: CageCircle,
    lambda1: float,
    lambda2: float,
    R: float,
    half_length: float,
) -> float:
    """Outlier score for one candidate angle.

    S_out is the POA area strictly beyond the candidate pusher line (the far
    side from the cage center), d_out the largest perpendicular distance of
    a POA cell past that line. Both are normalized (by cage area and cage
    radius) before weighting.
    """
    pose = pusher_pose(cage_next.center, R, theta_k, half_length)
    ii, jj = np.nonzero(poa.cells)
    if ii.size == 0:
        return 0.0
    h, w = poa.cells.shape
    rho = poa.resolution
    x = poa.frame_center.x + (jj - (w - 1) / 2.0) * rho
    y = poa.frame_center.y + (ii - (h - 1) / 2.0) * rho
    # outward normal of the pusher line
    nx, ny = -pose.direction.x, -pose.direction.y
    s = (x - pose.center.x) * nx + (y - pose.center.y) * ny
    out = s > 1e-9
    if not out.any():
        return 0.0
    s_out = float(out.sum()) * rho * rho
    d_out = float(s[out].max())
    cage_area = math.pi * cage_next.radius**2
    return lambda1 * (s_out / cage_area) + lambda2 * (d_out / cage_next.radius) ** 2


def _angular_distance(a: float, b: float) -> float:
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def find_push(
    pss: PSSGrid,
    problem: PushProblem,
    cage_next: CageCircle,
    prev_action: Optional[float],
) -> Optional[PushAngle]:
    """Pick a push angle, or None if the PSS already fits the next cage.

    Scores all K candidates, keeps the problem.shortlist best (five by
    default), then prefers the one closest (wrap-around) to the previous
    push angle. Ties break toward the lowest candidate index.
    """
    if contains_geometric(pss, cage_next):
        return None
    poa = compute_poa(pss, problem.object_radius)
    ks = np.arange(1, problem.K + 1)
    thetas = 2.0 * math.pi * ks / problem.K
    # score against a line tangent to the triggering cage: a cell that just
    # violated containment must register as sticking out for some angle
    score_R = cage_next.radius + problem.object_radius
    scores = np.array(
        [
            heuristic_score(
                poa, th, cage_next, problem.lambda1, problem.lambda2,
                score_R, problem.pusher_length / 2.0,
            )
            for th in thetas
        ]
    )
    order = np.lexsort((ks, -scores))  # descending score, then lowest k
    top = order[: min(problem.shortlist, problem.K)]
    if prev_action is None:
        best = top[0]
    else:
        dists = np.array([_angular_distance(thetas[i], prev_action) for i in top])
        best = top[int(np.lexsort((ks[top], dists))[0])]
    theta = float(thetas[best] % (2.0 * math.pi))
    return PushAngle(theta=theta, k=int(ks[best]))


def max_spacing(problem: PushProblem) -> float:
    spacing = 0.0
    for a, b in zip(problem.trajectory[:-1], problem.trajectory[1:]):
        spacing = max(spacing, (b - a).norm())
    return spacing


def planning_cage(problem: PushProblem, center: Vec2) -> CageCircle:
    """Cage used for the planner's containment checks: shrunk by the margin
    so grid rasterization and oracle drift stay inside the nominal cage."""
    return CageCircle(center, problem.cage_size - problem.margin)


def trigger_cage(problem: PushProblem, center: Vec2) -> CageCircle:
    """Inner circle whose violation triggers a push.

    Tighter than the containment cage by the waypoint spacing: a cell is
    pushed before it can drift past the containment radius, and no cell can
    be deeper than cage_size from the next waypoint when the pusher is
    placed (the motion bound assumes contact happens during the push, not
    at placement).
    """
    radius = problem.cage_size - problem.margin - max_spacing(problem)
    radius = max(radius, 2.0 * problem.resolution)
    return CageCircle(center, radius)


def plan_push(
    problem: PushProblem,
    initial_position: Vec2,
    check_spacing: bool = True,
) -> tuple[ActionSequence, VerificationResult, RunLog]:
    """Open-loop plan: at each step recenter the cage on the next waypoint,
    pick a push if needed, propagate, and check containment.
    """
    if len(problem.trajectory) < 1:
        raise ValueError("trajectory must have at least one waypoint")
    if check_spacing:
        problem.check_spacing()
    w0 = problem.trajectory[0]
    if (initial_position - w0).norm() > problem.cage_size:
        raise ValueError("initial position lies outside the first cage")
    n = problem.grid_size
    pss = PSSGrid.from_points(
        initial_position.as_array()[None, :], problem.resolution, w0, (n, n)
    )
    log = RunLog()
    steps: list = []
    prev_theta: Optional[float] = None
    result = VerificationResult(True)
    for t in range(len(problem.trajectory) - 1):
        target = problem.trajectory[t + 1]
        cage = planning_cage(problem, target)
        push = find_push(pss, problem, trigger_cage(problem, target), prev_theta)
        theta = None if push is None else push.theta
        pss = propagate_pss(pss, theta, target, problem)
        contained = contains_geometric(pss, cage)
        action = NoAction() if push is None else push
        steps.append(action)
        log.add(
            {
                "t": t,
                "action": action_to_json(action),
                "contained": bool(contained),
                "pss_cells": pss.count,
                "cage_center": [target.x, target.y],
            }
        )
        if push is not None:
            prev_theta = push.theta
        if not contained:
            result = VerificationResult(False, t, FailureReason.EscapedCage)
            break
    return ActionSequence.of(steps), result, log


def verify_push_plan(
    problem: PushProblem,
    initial_position: Vec2,
    actions: ActionSequence,
) -> VerificationResult:
    """Independent replay of a plan through the generic verification driver."""
    n = problem.grid_size
    w0 = problem.trajectory[0]
    pss0 = PSSGrid.from_points(
        initial_position.as_array()[None, :], problem.resolution, w0, (n, n)
    )

    def cage_at(t: int) -> CageCircle:
        idx = min(t, len(problem.trajectory) - 1)
        return planning_cage(problem, problem.trajectory[idx])

    def propagate(pss, action, t):
        theta = action.theta if isinstance(action, PushAngle) else None
        return propagate_pss(pss, theta, problem.trajectory[t + 1], problem)

    return verify_caging_in_time(
        pss0,
        actions,
        cage_at,
        propagate,
        contains_geometric,
        feasibility_quasi_static,
    )
