"""SVD-based generalized inverses of Jacobians.

Everything goes through one SVD so that rank, kernel and the inverses share
the same truncation decision. Thresholds are relative to the largest
singular value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

DEFAULT_RTOL = 1e-8


class SingularUndamped(np.linalg.LinAlgError):
    pass


class RankDeficient(np.linalg.LinAlgError):
    pass


class NotSPD(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SvdFactors:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @classmethod
    def of(cls, J) -> "SvdFactors":
        U, s, Vt = np.linalg.svd(np.asarray(J, dtype=float), full_matrices=True)
        return cls(U, s, Vt.T)

    def rank(self, tol: float = DEFAULT_RTOL) -> int:
        s = self.singular_values
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.count_nonzero(s > tol * s[0]))


# inverse kinds -------------------------------------------------------------


@dataclass(frozen=True)
class PseudoInverse:
    tol: float = DEFAULT_RTOL

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def apply(self, J):
        return pseudoinverse(J, self.tol)

    @property
    def label(self) -> str:
        return "PI"


@dataclass(frozen=True)
class Damped:
    lam: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lambda must be non-negative")

    @classmethod
    def from_lambda_sq(cls, lambda_sq: float) -> "Damped":
        if lambda_sq < 0:
            raise ValueError("lambda^2 must be non-negative")
        return cls(float(np.sqrt(lambda_sq)))

    def apply(self, J):
        return damped_pseudoinverse(J, self.lam)

    @property
    def label(self) -> str:
        return f"DPI(lambda^2={self.lam**2:.0e})"


@dataclass(frozen=True, eq=False)
class WeightedRight:
    M: np.ndarray

    def __post_init__(self):
        _check_spd(np.asarray(self.M, dtype=float))

    def apply(self, J):
        return weighted_right_pseudoinverse(J, self.M)

    @property
    def label(self) -> str:
        return "WPI"


InverseKind = Union[PseudoInverse, Damped, WeightedRight]


# operations ----------------------------------------------------------------


def pseudoinverse(J, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Moore-Penrose inverse ``V S^+ U^T`` with relative truncation ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    f = SvdFactors.of(J)
    m, n = f.U.shape[0], f.V.shape[0]
    r = f.rank(tol)
    Sinv = np.zeros((n, m))
    idx = np.arange(r)
    Sinv[idx, idx] = 1.0 / f.singular_values[:r]
    return f.V @ Sinv @ f.U.T


def damped_pseudoinverse(J, lam: float, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """``J^T (J J^T + lam^2 I)^-1`` evaluated as ``V diag(s/(s^2+lam^2)) U^T``.

    Singular values at or below ``tol * s_max`` count as zero, so rounding
    noise in the SVD of a rank-deficient ``J`` cannot leak into the kernel
    directions. With ``lam = 0`` this is the right inverse and needs full row
    rank.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    J = np.asarray(J, dtype=float)
    f = SvdFactors.of(J)
    m, n = J.shape
    if lam == 0.0 and f.rank(tol) < m:
        raise SingularUndamped("undamped inverse of a row-rank-deficient Jacobian; use pseudoinverse()")
    r = f.rank(tol)
    s = f.singular_values[:r]
    Sl = np.zeros((n, m))
    idx = np.arange(r)
    # s / (s^2 + lam^2) rearranged so that tiny s cannot underflow s^2 to 0
    Sl[idx, idx] = 1.0 / (s + (lam / s) * lam)
    return f.V @ Sl @ f.U.T


def _check_spd(M: np.ndarray) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSPD("weight must be square")
    if np.max(np.abs(M - M.T)) > 1e-12:
        raise NotSPD("weight is not symmetric")
    if np.min(np.linalg.eigvalsh(M)) <= 0.0:
        raise NotSPD("weight is not positive definite")


def weighted_right_pseudoinverse(J, M, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """``M^-1 J^T (J M^-1 J^T)^-1``, the ``q^T M q``-minimal right inverse.

    Computed as ``L^-T (J L^-T)^+`` with ``M = L L^T``, which is the same
    matrix but reuses the SVD rank test.
    """
    J = np.asarray(J, dtype=float)
    M = np.asarray(M, dtype=float)
    _check_spd(M)
    L = np.linalg.cholesky(M)
    Linv_T = np.linalg.inv(L).T
    JL = J @ Linv_T
    if SvdFactors.of(JL).rank(tol) < J.shape[0]:
        raise RankDeficient("weighted right inverse needs full row rank")
    return Linv_T @ pseudoinverse(JL, tol)


def kernel_basis(J, tol: float = DEFAULT_RTOL) -> list[np.ndarray]:
    """Orthonormal basis of ``ker J^T``: twists no joint velocity can produce."""
    f = SvdFactors.of(J)
    r = f.rank(tol)
    return [f.U[:, k].copy() for k in range(r, f.U.shape[0])]


def apply_inverse(kind: InverseKind, J) -> np.ndarray:
    return kind.apply(J)
