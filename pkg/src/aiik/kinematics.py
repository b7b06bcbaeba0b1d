"""Serial-chain model, product-of-exponentials FK and geometric Jacobians."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .liegroup import Pose, adjoint, exp
from .pinv import DEFAULT_RTOL, SvdFactors

if TYPE_CHECKING:
    from .tangent import SingularBasis

ALL_ROWS = (0, 1, 2, 3, 4, 5)


class DimensionMismatch(ValueError):
    pass


class ModelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RobotModel:
    """Serial robot given by joint screws in the reference configuration.

    ``joint_screws_ref`` is ``n x 6``; row ``i`` is the screw of joint ``i``
    in base-frame coordinates at ``q = 0``. ``home_pose`` is the EE pose at
    ``q = 0``. ``task_selector`` picks the twist rows of the task space.
    """

    name: str
    joint_screws_ref: np.ndarray
    home_pose: Pose
    task_selector: tuple[int, ...] = ALL_ROWS
    joint_names: tuple[str, ...] = ()
    singularities: dict[str, "SingularBasis"] = field(default_factory=dict)

    def __post_init__(self):
        S = np.array(self.joint_screws_ref, dtype=float)
        if S.ndim != 2 or S.shape[1] != 6 or S.shape[0] < 1:
            raise ModelError(f"joint screws must be an n x 6 array, got shape {S.shape}")
        for i, s in enumerate(S):
            w = np.linalg.norm(s[:3])
            if w == 0.0:
                if abs(np.linalg.norm(s[3:]) - 1.0) > 1e-10:
                    raise ModelError(f"prismatic joint {i} needs a unit linear part")
            elif abs(w - 1.0) > 1e-10:
                raise ModelError(f"revolute joint {i} needs a unit angular part")
        S.flags.writeable = False
        object.__setattr__(self, "joint_screws_ref", S)

        sel = tuple(int(k) for k in self.task_selector)
        if not 1 <= len(sel) <= 6 or any(k not in ALL_ROWS for k in sel):
            raise ModelError(f"bad task selector {sel}")
        if list(sel) != sorted(set(sel)):
            raise ModelError("task selector must be unique and ascending")
        object.__setattr__(self, "task_selector", sel)

        names = tuple(self.joint_names) or tuple(f"joint{i + 1}" for i in range(S.shape[0]))
        if len(names) != S.shape[0]:
            raise ModelError("joint_names length does not match joint count")
        object.__setattr__(self, "joint_names", names)
        if not self.home_pose.is_valid():
            raise ModelError("home pose rotation is not a rotation matrix")

    @property
    def n(self) -> int:
        return self.joint_screws_ref.shape[0]

    @property
    def m(self) -> int:
        return len(self.task_selector)

    def check_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape[0] != self.n:
            raise DimensionMismatch(f"{self.name}: expected {self.n} joint values, got {q.shape[0]}")
        return q


def _chain(model: RobotModel, q) -> tuple[Pose, np.ndarray]:
    # one pass over the chain: EE pose and base-frame joint screws
    q = model.check_q(q)
    J = np.zeros((6, model.n))
    T = Pose.identity()
    for i, (s, qi) in enumerate(zip(model.joint_screws_ref, q)):
        J[:, i] = adjoint(T) @ s
        T = T @ exp(s * qi)
    return T @ model.home_pose, J


def forward_kinematics(model: RobotModel, q) -> Pose:
    return _chain(model, q)[0]


def space_jacobian(model: RobotModel, q) -> np.ndarray:
    """Joint screws at ``q`` in base-frame coordinates (6 x n)."""
    return _chain(model, q)[1]


def pose_and_jacobian(model: RobotModel, q) -> tuple[Pose, np.ndarray]:
    """``(forward_kinematics, geometric_jacobian)`` in the body frame, one pass."""
    C, Js = _chain(model, q)
    J = adjoint(C.inverse()) @ Js
    return C, J[list(model.task_selector), :]


def geometric_jacobian(model: RobotModel, q, full: bool = False, frame: str = "body") -> np.ndarray:
    """Geometric Jacobian with columns expressed in an EE frame.

    ``frame="body"`` uses the current EE frame (pairs with the error twist
    ``log(C^-1 C_d)``). ``frame="reference"`` uses the fixed frame that
    coincides with the EE frame at ``q = 0``. Both agree at ``q = 0``.
    Rows are restricted to the task selector unless ``full``.
    """
    C, Js = _chain(model, q)
    if frame == "body":
        J = adjoint(C.inverse()) @ Js
    elif frame == "reference":
        J = adjoint(model.home_pose.inverse()) @ Js
    else:
        raise ValueError(f"unknown frame {frame!r}")
    return J if full else J[list(model.task_selector), :]


def rank_at(model: RobotModel, q, tol: float = DEFAULT_RTOL) -> int:
    if not tol > 0:
        raise ValueError("tol must be positive")
    return SvdFactors.of(geometric_jacobian(model, q)).rank(tol)


def is_singular(model: RobotModel, q, tol: float = DEFAULT_RTOL) -> bool:
    return rank_at(model, q, tol) < model.m


# built-in robots -----------------------------------------------------------

IIWA_LENGTHS = (0.42, 0.4, 0.126)


def _revolute(axis: Sequence[float], point: Sequence[float]) -> np.ndarray:
    w = np.asarray(axis, dtype=float)
    p = np.asarray(point, dtype=float)
    return np.concatenate([w, -np.cross(w, p)])


def planar3r(L1: float = 1.0, L2: float = 1.0, L3: float = 1.0) -> RobotModel:
    """3R regional robot: vertical base joint, two parallel horizontal joints.

    At ``q = 0`` the arm stands straight up on the base axis, which is
    simultaneously a shoulder and a fully-stretched singularity. The task is
    the EE position (linear rows).
    """
    from .tangent import SingularBasis

    z, y = (0, 0, 1), (0, 1, 0)
    screws = [
        _revolute(z, (0, 0, 0)),
        _revolute(y, (0, 0, L1)),
        _revolute(y, (0, 0, L1 + L2)),
    ]
    model = RobotModel(
        name="planar3r",
        joint_screws_ref=np.array(screws),
        home_pose=Pose(np.eye(3), (0.0, 0.0, L1 + L2 + L3)),
        task_selector=(3, 4, 5),
        joint_names=("base", "shoulder", "elbow"),
    )
    k2 = np.array([0.0, L3, -(L2 + L3)])
    model.singularities["upright"] = SingularBasis(
        config=np.zeros(3),
        basis=np.array([[1.0], [0.0], [0.0]]),
        component_spaces=[
            np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),  # x3 = 0
            np.column_stack([[1.0, 0.0, 0.0], k2 / np.linalg.norm(k2)]),  # off-axis motion
        ],
    )
    return model


def iiwa14(a: float = IIWA_LENGTHS[0], b: float = IIWA_LENGTHS[1], c: float = IIWA_LENGTHS[2]) -> RobotModel:
    """KUKA LBR iiwa 14 R820 in the stretched reference configuration.

    Base frame sits on the joint-2 axis with axes parallel to the EE frame at
    ``q = 0``: z along the arm, x along the axes of joints 2, 4, 6. ``a``,
    ``b``, ``c`` are the joint-2/joint-4, joint-4/joint-6 and joint-6/flange
    distances.
    """
    from .tangent import SingularBasis

    x, z = (1, 0, 0), (0, 0, 1)
    o = (0, 0, 0)
    screws = [
        _revolute(z, o),
        _revolute(x, o),
        _revolute(z, o),
        _revolute(x, (0, 0, a)),
        _revolute(z, o),
        _revolute(x, (0, 0, a + b)),
        _revolute(z, o),
    ]
    model = RobotModel(
        name="iiwa14",
        joint_screws_ref=np.array(screws),
        home_pose=Pose(np.eye(3), (0.0, 0.0, a + b + c)),
        joint_names=tuple(f"A{i}" for i in range(1, 8)),
    )
    eye = np.eye(7)
    model.singularities["stretched"] = SingularBasis(
        config=np.zeros(7),
        basis=eye[:, [0, 2, 4, 6]],
        component_spaces=[
            eye[:, [0, 1, 2, 4, 5, 6]],  # x4 = 0
            eye[:, [0, 2, 3, 4, 6]],  # x2 = x6 = 0
        ],
    )
    return model


BUILTIN_MODELS = {"planar3r": planar3r, "iiwa14": iiwa14}


def builtin_model(name: str) -> RobotModel:
    try:
        return BUILTIN_MODELS[name]()
    except KeyError:
        raise ModelError(f"unknown built-in model {name!r}; choose from {sorted(BUILTIN_MODELS)}") from None
