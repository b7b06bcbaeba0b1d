"""Newton-type iterative IK with pluggable inverse and the AI-IK start.

Each step solves ``J(q) dq = log(C(q)^-1 C_d)`` (task rows) with the chosen
generalized inverse; ``J`` is the body-frame Jacobian so that it pairs with
the body-frame error twist.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .kinematics import RobotModel, forward_kinematics, pose_and_jacobian
from .liegroup import AngleAtPi, ErrorMode, Pose, pose_error
from .pinv import DEFAULT_RTOL, InverseKind, PseudoInverse, SvdFactors
from .tangent import SingularBasis, prolonged_jacobian, regularizing_perturbation

Gradient = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


class StartNotSingular(ValueError):
    pass


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    LOCKED_UP = "LockedUp"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SolverConfig:
    inverse: InverseKind = field(default_factory=PseudoInverse)
    error_mode: ErrorMode = ErrorMode.LOG
    tol: float = 1e-10
    max_iters: int = 100
    step_scale: float = 1.0
    lockup_step_tol: float = 1e-14
    nullspace_gradient: Optional[Gradient] = None
    # a detected lock-up ends the run only from this iteration on
    lockup_horizon: int = 0
    rank_tol: float = DEFAULT_RTOL
    # AI-IK only: Jacobian of the first regular step from the truncated series
    prolonged_order: Optional[int] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.step_scale <= 1:
            raise ValueError("step_scale must be in (0, 1]")
        self.error_mode = ErrorMode(self.error_mode)


@dataclass(frozen=True, eq=False)
class TraceRecord:
    iter: int
    error_norm: float
    step_norm: float
    rank: int
    sigma_min: float
    q: np.ndarray


@dataclass(eq=False)
class ConvergenceTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, k) -> TraceRecord:
        return self.records[k]

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error_norm for r in self.records])

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.records])

    def iterations_to(self, threshold: float) -> Optional[int]:
        """First iteration index with ``error_norm <= threshold``, or None."""
        for r in self.records:
            if r.error_norm <= threshold:
                return r.iter
        return None


@dataclass(eq=False)
class SolveOutcome:
    status: Status
    q_final: np.ndarray
    trace: ConvergenceTrace

    @property
    def final_error(self) -> float:
        return self.trace.records[-1].error_norm

    @property
    def iterations(self) -> int:
        return self.trace.records[-1].iter


def _task_error_from_pose(model: RobotModel, C: Pose, C_d: Pose, mode: ErrorMode) -> np.ndarray:
    rows = list(model.task_selector)
    if all(k >= 3 for k in rows):
        # position-only task: exact translational error in the EE frame
        err = np.concatenate([np.zeros(3), C.rotation.T @ (C_d.translation - C.translation)])
    else:
        err = pose_error(C, C_d, mode)
    return err[rows]


def task_error(model: RobotModel, q, C_d: Pose, mode: ErrorMode | str = ErrorMode.LOG) -> np.ndarray:
    """Task-selected error twist at ``q`` (rows of ``model.task_selector``)."""
    return _task_error_from_pose(model, forward_kinematics(model, q), C_d, ErrorMode(mode))


def _nullspace_term(J: np.ndarray, g: Gradient, q: np.ndarray, rank_tol: float) -> np.ndarray:
    # (I - J^+ J) g with the same truncation as J^+; directions whose
    # singular value falls below the cutoff count as null motions
    g = np.asarray(g(q) if callable(g) else g, dtype=float)
    f = SvdFactors.of(J)
    Vr = f.V[:, : f.rank(rank_tol)]
    return g - Vr @ (Vr.T @ g)


def _increment(J, e, q, config: SolverConfig) -> np.ndarray:
    dq = config.inverse.apply(J) @ e
    if config.nullspace_gradient is not None:
        dq = dq + _nullspace_term(J, config.nullspace_gradient, q, config.rank_tol)
    return config.step_scale * dq


def ik_step(model: RobotModel, q, C_d: Pose, config: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """One update ``dq = J^+(q) err(q)``; returns ``(dq, task error twist)``."""
    q = model.check_q(q)
    C, J = pose_and_jacobian(model, q)
    e = _task_error_from_pose(model, C, C_d, config.error_mode)
    return _increment(J, e, q, config), e


def _record(k, q, e, J, step_norm, config) -> TraceRecord:
    f = SvdFactors.of(J)
    return TraceRecord(k, float(np.linalg.norm(e)), step_norm, f.rank(config.rank_tol), float(f.singular_values[-1]), q.copy())


def _iterate(model, q, C_d, config: SolverConfig, records, start=0, step_norm=0.0, first_J=None) -> SolveOutcome:
    """Newton loop from ``q``, whose record gets index ``start``.

    ``records`` holds the trace prefix, ``step_norm`` the size of the move
    that led to ``q``. ``first_J`` replaces the Jacobian at ``q``.
    """
    locked = 0
    for k in range(start, config.max_iters + 1):
        try:
            C, J = pose_and_jacobian(model, q)
            e = _task_error_from_pose(model, C, C_d, config.error_mode)
        except (AngleAtPi, np.linalg.LinAlgError):
            return SolveOutcome(Status.NUMERICAL_FAILURE, q, ConvergenceTrace(records))
        if first_J is not None:
            J, first_J = first_J, None
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(e)) and np.all(np.isfinite(J))):
            return SolveOutcome(Status.NUMERICAL_FAILURE, q, ConvergenceTrace(records))
        rec = _record(k, q, e, J, step_norm, config)
        records.append(rec)
        if rec.error_norm <= config.tol:
            return SolveOutcome(Status.CONVERGED, q, ConvergenceTrace(records))
        locked = locked + 1 if k >= 1 and step_norm < config.lockup_step_tol else 0
        if locked >= 2 and k >= config.lockup_horizon:
            return SolveOutcome(Status.LOCKED_UP, q, ConvergenceTrace(records))
        if k == config.max_iters:
            break
        dq = _increment(J, e, q, config)
        q = q + dq
        step_norm = float(np.linalg.norm(dq))
    status = Status.LOCKED_UP if locked >= 2 else Status.MAX_ITERS
    return SolveOutcome(status, q, ConvergenceTrace(records))


def solve(model: RobotModel, q0, C_d: Pose, config: SolverConfig | None = None) -> SolveOutcome:
    config = config or SolverConfig()
    return _iterate(model, model.check_q(q0).copy(), C_d, config, [])


def _solve_from_offset(model, q0, C_d, offset, config: SolverConfig, first_J=None) -> SolveOutcome:
    # iteration 0 at q0, iteration 1 at q0 + offset, Newton from there
    q0 = model.check_q(q0).copy()
    try:
        C, J = pose_and_jacobian(model, q0)
        e0 = _task_error_from_pose(model, C, C_d, config.error_mode)
    except AngleAtPi:
        return SolveOutcome(Status.NUMERICAL_FAILURE, q0, ConvergenceTrace([]))
    rec0 = _record(0, q0, e0, J, 0.0, config)
    if rec0.error_norm <= config.tol:
        return SolveOutcome(Status.CONVERGED, q0, ConvergenceTrace([rec0]))
    offset = np.asarray(offset, dtype=float)
    return _iterate(model, q0 + offset, C_d, config, [rec0], 1, float(np.linalg.norm(offset)), first_J)


def solve_ai_ik(
    model: RobotModel, q0, C_d: Pose, basis: SingularBasis, epsilon, config: SolverConfig | None = None
) -> SolveOutcome:
    """AI-IK: replace the first step by the transversal perturbation ``x``."""
    config = config or SolverConfig()
    q0 = model.check_q(q0)
    if basis.config.shape != q0.shape or np.max(np.abs(basis.config - q0)) > 1e-9:
        raise StartNotSingular("start configuration does not match the singular basis configuration")
    x = regularizing_perturbation(basis, epsilon).x
    first_J = None
    if config.prolonged_order is not None:
        J_full = prolonged_jacobian(model, q0, x, config.prolonged_order, frame="body")
        first_J = J_full[list(model.task_selector), :]
    return _solve_from_offset(model, q0, C_d, x, config, first_J)


def solve_perturbed(model: RobotModel, q0, C_d: Pose, epsilon, config: SolverConfig | None = None) -> SolveOutcome:
    """Baseline: start from ``q0 + epsilon`` without projecting ``epsilon``."""
    config = config or SolverConfig()
    return _solve_from_offset(model, q0, C_d, epsilon, config)
