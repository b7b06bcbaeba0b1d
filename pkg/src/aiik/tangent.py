"""Singular-motion bases, transversal perturbations and Jacobian prolongation.

Two Jacobian frames are supported for the Lie-bracket differentials:

* ``"reference"``: columns in the fixed frame that coincides with the EE
  frame at ``q = 0``. Column ``i`` depends only on joints ``j < i`` and
  ``dJ_i = sum_{j<i} x_j [J_j, J_i]``.
* ``"body"``: columns in the moving EE frame. Column ``i`` depends only on
  joints ``j > i`` and ``dJ_i = sum_{j>i} x_j [J_i, J_j]``.

Both coincide at ``q = 0``; the iiwa reference differential is the
``"reference"`` one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .kinematics import DimensionMismatch, RobotModel, geometric_jacobian, rank_at
from .liegroup import lie_bracket
from .pinv import DEFAULT_RTOL

ORTHO_TOL = 1e-10


class NotOrthonormal(ValueError):
    pass


class DegeneratePerturbation(ValueError):
    pass


class UnsupportedOrder(ValueError):
    pass


class NotConverged(RuntimeWarning):
    pass


def _orthonormal(S: np.ndarray, what: str = "basis") -> None:
    k = S.shape[1]
    if k and np.max(np.abs(S.T @ S - np.eye(k))) > ORTHO_TOL:
        raise NotOrthonormal(f"{what} columns are not orthonormal")


@dataclass(frozen=True, eq=False)
class SingularBasis:
    """Orthonormal basis ``S`` (n x s) of motions that stay singular at ``config``.

    ``component_spaces`` optionally lists bases of the tangent-cone component
    spaces; every column of ``S`` must lie in each of them.
    """

    config: np.ndarray
    basis: np.ndarray
    component_spaces: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        q = np.asarray(self.config, dtype=float).reshape(-1)
        n = q.shape[0]
        S = np.asarray(self.basis, dtype=float).reshape(n, -1)
        if S.shape[1] >= n:
            raise ValueError(f"singular basis must have fewer than {n} columns")
        _orthonormal(S)
        spaces = []
        for k, K in enumerate(self.component_spaces):
            K = np.asarray(K, dtype=float).reshape(n, -1)
            Q, _ = np.linalg.qr(K)
            resid = S - Q @ (Q.T @ S)
            if S.shape[1] and np.max(np.abs(resid)) > ORTHO_TOL:
                raise ValueError(f"basis vector outside component space {k}")
            spaces.append(K)
        object.__setattr__(self, "config", q)
        object.__setattr__(self, "basis", S)
        object.__setattr__(self, "component_spaces", spaces)

    @property
    def n(self) -> int:
        return self.config.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class Perturbation:
    epsilon: np.ndarray
    x: np.ndarray


def _basis_matrix(S) -> np.ndarray:
    if isinstance(S, SingularBasis):
        return S.basis
    S = np.asarray(S, dtype=float)
    return S.reshape(S.shape[0], -1)


def transversal_projector(S) -> np.ndarray:
    """``I - S S^T``: orthogonal projector onto the complement of ``span S``."""
    S = _basis_matrix(S)
    _orthonormal(S)
    n = S.shape[0]
    return np.eye(n) - S @ S.T


def regularizing_perturbation(S, epsilon) -> Perturbation:
    P = transversal_projector(S)
    eps = np.asarray(epsilon, dtype=float).reshape(-1)
    if eps.shape[0] != P.shape[0]:
        raise DimensionMismatch(f"epsilon has length {eps.shape[0]}, expected {P.shape[0]}")
    x = P @ eps
    if np.linalg.norm(x) < 1e-12:
        raise DegeneratePerturbation("perturbation vanishes after projection; epsilon lies in the singular-motion span")
    return Perturbation(eps, x)


# Lie-bracket differentials --------------------------------------------------


def _screws(model: RobotModel, q0, x, frame: str) -> tuple[np.ndarray, np.ndarray]:
    J = geometric_jacobian(model, q0, full=True, frame=frame)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.n:
        raise DimensionMismatch(f"x has length {x.shape[0]}, expected {model.n}")
    return J, x


def _bracket_table(J: np.ndarray) -> np.ndarray:
    n = J.shape[1]
    B = np.zeros((n, n, 6))
    for i in range(n):
        for j in range(i + 1, n):
            B[i, j] = lie_bracket(J[:, i], J[:, j])
            B[j, i] = -B[i, j]
    return B


def jacobian_first_differential(model: RobotModel, q0, x, frame: str = "reference") -> np.ndarray:
    J, x = _screws(model, q0, x, frame)
    B = _bracket_table(J)
    n = model.n
    dJ = np.zeros((6, n))
    for i in range(n):
        if frame == "reference":
            for j in range(i):
                dJ[:, i] += x[j] * B[j, i]
        else:
            for j in range(i + 1, n):
                dJ[:, i] += x[j] * B[i, j]
    return dJ


def jacobian_second_differential(model: RobotModel, q0, x, frame: str = "reference") -> np.ndarray:
    """Second differential ``d^2 J(q0, x)``, quadratic in ``x``.

    Reference frame: ``sum_{j,k<i} x_j x_k [J_min(j,k), [J_max(j,k), J_i]]``.
    Body frame: ``sum_{j,k>i} x_j x_k [J_max(j,k), [J_min(j,k), J_i]]``.
    """
    J, x = _screws(model, q0, x, frame)
    B = _bracket_table(J)
    n = model.n
    d2J = np.zeros((6, n))
    for i in range(n):
        idx = range(i) if frame == "reference" else range(i + 1, n)
        for j in idx:
            for k in idx:
                if x[j] == 0.0 or x[k] == 0.0:
                    continue
                lo, hi = min(j, k), max(j, k)
                if frame == "reference":
                    term = lie_bracket(J[:, lo], B[hi, i])
                else:
                    term = lie_bracket(J[:, hi], B[lo, i])
                d2J[:, i] += x[j] * x[k] * term
    return d2J


def prolonged_jacobian(model: RobotModel, q0, x, order: int = 1, frame: str = "reference") -> np.ndarray:
    """Truncated series ``J(q0) + dJ + 1/2 d^2 J`` up to ``order`` (6 x n)."""
    if order not in (0, 1, 2):
        raise UnsupportedOrder(f"prolongation order {order} not supported (0, 1 or 2)")
    J = geometric_jacobian(model, q0, full=True, frame=frame)
    if order >= 1:
        J = J + jacobian_first_differential(model, q0, x, frame)
    if order >= 2:
        J = J + 0.5 * jacobian_second_differential(model, q0, x, frame)
    return J


def _span_dim(vectors: np.ndarray, rows: list[int], tol: float) -> int:
    M = vectors[rows, :]
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def closure_order(model: RobotModel, q0, max_order: int = 4, tol: float = DEFAULT_RTOL) -> tuple[int, list[int]]:
    """Bracket depth at which the span of the joint screws stops growing.

    Level 0 is ``span(J_i)``; level ``k`` adds ``[J_i, v]`` for every ``v``
    added at level ``k - 1``. Dimensions are counted in task coordinates and
    the loop stops at the task dimension or when a level adds nothing.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    J = geometric_jacobian(model, q0, full=True)
    rows = list(model.task_selector)
    gens = [J[:, i] for i in range(model.n)]
    span = J.copy()
    frontier = gens
    dims = [_span_dim(span, rows, tol)]
    level = 0
    while dims[-1] < model.m:
        if level == max_order:
            warnings.warn(NotConverged(f"bracket span still growing at order {max_order}: {dims}"))
            break
        new = [lie_bracket(g, v) for g in gens for v in frontier]
        if not new:
            break
        cand = np.column_stack([span, *new])
        d = _span_dim(cand, rows, tol)
        if d <= dims[-1]:
            break
        span, frontier = cand, new
        dims.append(d)
        level += 1
    return len(dims) - 1, dims


def verify_singular_direction(
    model: RobotModel, q0, direction, steps=(0.05, 0.1, 0.2), tol: float = DEFAULT_RTOL
) -> bool:
    """True iff ``q0 + t * direction`` is singular for every ``t`` in ``steps``."""
    d = np.asarray(direction, dtype=float).reshape(-1)
    if not np.any(d):
        raise ValueError("direction must be nonzero")
    q0 = model.check_q(q0)
    return all(rank_at(model, q0 + t * d, tol) < model.m for t in steps)
