"""SE(3) / se(3) numerics.

Twists are plain length-6 numpy arrays ordered ``(angular; linear)``, i.e.
``t[:3]`` is the angular part and ``t[3:]`` the linear part. This ordering is
used everywhere in the package, including Jacobian rows and model files.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# below this rotation angle exp/log switch to truncated series
SMALL_ANGLE = 1e-4


class NotSkew(ValueError):
    """Rotation block of a would-be se(3) matrix is not skew-symmetric."""


class AngleAtPi(ValueError):
    """Rotation angle too close to pi for a unique logarithm."""


class ErrorMode(str, enum.Enum):
    LOG = "log"
    FIRST_ORDER = "first-order"


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform ``(R, r)``; acts on points as ``R @ p + r``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        r = np.array(self.translation, dtype=float).reshape(3)
        R.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", r)

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_matrix(cls, T) -> "Pose":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3], T[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def inverse(self) -> "Pose":
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)

    def __matmul__(self, other: "Pose") -> "Pose":
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def is_valid(self, tol: float = 1e-10) -> bool:
        R = self.rotation
        return bool(
            np.allclose(R.T @ R, np.eye(3), atol=tol, rtol=0)
            and abs(np.linalg.det(R) - 1.0) <= tol
        )

    def __repr__(self) -> str:
        return f"Pose(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


def skew(w) -> np.ndarray:
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def hat(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    A = np.zeros((4, 4))
    A[:3, :3] = skew(t[:3])
    A[:3, 3] = t[3:]
    return A


def vee(A, tol: float = 1e-8) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    W = A[:3, :3]
    asym = np.max(np.abs(W + W.T))
    if asym > tol:
        raise NotSkew(f"rotation block not skew-symmetric (|W + W^T| = {asym:.3g} > {tol:.3g})")
    return np.array([W[2, 1], W[0, 2], W[1, 0], A[0, 3], A[1, 3], A[2, 3]])


def _exp_coeffs(theta: float) -> tuple[float, float, float]:
    # A = sin(t)/t, B = (1 - cos t)/t^2, C = (t - sin t)/t^3
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    s, c = np.sin(theta), np.cos(theta)
    return s / theta, (1.0 - c) / theta**2, (theta - s) / theta**3


def exp(t) -> Pose:
    """Closed-form SE(3) exponential of a twist."""
    t = np.asarray(t, dtype=float)
    w, v = t[:3], t[3:]
    theta = float(np.linalg.norm(w))
    A, B, C = _exp_coeffs(theta)
    W = skew(w)
    W2 = W @ W
    R = np.eye(3) + A * W + B * W2
    V = np.eye(3) + B * W + C * W2
    return Pose(R, V @ v)


def log(C: Pose, pi_tol: float = 1e-9) -> np.ndarray:
    """SE(3) logarithm on the open ball of rotation angles below pi."""
    R = C.rotation
    tr = float(np.trace(R))
    if tr <= -1.0 + pi_tol:
        raise AngleAtPi(f"rotation angle at pi (trace {tr:.12g})")
    cos_theta = min(1.0, (tr - 1.0) / 2.0)
    theta = float(np.arccos(cos_theta))
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        k = 0.5 * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0)
        D = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    else:
        s = np.sin(theta)
        k = theta / (2.0 * s)
        D = (1.0 - theta * s / (2.0 * (1.0 - np.cos(theta)))) / theta**2
    Wm = k * (R - R.T)
    w = np.array([Wm[2, 1], Wm[0, 2], Wm[1, 0]])
    W = skew(w)
    Vinv = np.eye(3) - 0.5 * W + D * (W @ W)
    return np.concatenate([w, Vinv @ C.translation])


def adjoint(C: Pose) -> np.ndarray:
    """6x6 adjoint for ``(angular; linear)`` twists: ``[[R, 0], [r^ R, R]]``."""
    R, r = C.rotation, C.translation
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[3:, 3:] = R
    Ad[3:, :3] = skew(r) @ R
    return Ad


def ad(t) -> np.ndarray:
    """Matrix of ``b -> [t, b]``."""
    t = np.asarray(t, dtype=float)
    W, Vs = skew(t[:3]), skew(t[3:])
    M = np.zeros((6, 6))
    M[:3, :3] = W
    M[3:, 3:] = W
    M[3:, :3] = Vs
    return M


def lie_bracket(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    wa, va, wb, vb = a[:3], a[3:], b[:3], b[3:]
    return np.concatenate([np.cross(wa, wb), np.cross(wa, vb) - np.cross(wb, va)])


def delta_pose(C: Pose, C_d: Pose) -> Pose:
    """``C^-1 C_d``: the desired pose seen from the current EE frame."""
    return C.inverse() @ C_d


def pose_error(C: Pose, C_d: Pose, mode: ErrorMode | str = ErrorMode.LOG) -> np.ndarray:
    """Error twist of ``C_d`` relative to ``C`` in the current EE frame.

    ``LOG`` returns ``log(C^-1 C_d)``. ``FIRST_ORDER`` returns the vee of
    ``C^-1 C_d - I`` after projecting the rotation block onto its skew part;
    the two agree to first order in the displacement.
    """
    mode = ErrorMode(mode)
    D = delta_pose(C, C_d)
    if mode is ErrorMode.LOG:
        return log(D)
    W = 0.5 * (D.rotation - D.rotation.T)
    return np.array([W[2, 1], W[0, 2], W[1, 0], *D.translation])
