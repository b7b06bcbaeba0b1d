"""Inverse kinematics at forward-kinematics singularities.

Iterative pseudoinverse / damped-least-squares IK on SE(3), and the
analytically informed start (AI-IK) that perturbs a singular configuration
transversally to its singular motions before iterating.
"""

from .kinematics import RobotModel, forward_kinematics, geometric_jacobian, iiwa14, planar3r, rank_at
from .liegroup import ErrorMode, Pose, exp, hat, lie_bracket, log, pose_error, vee
from .pinv import Damped, PseudoInverse, WeightedRight, damped_pseudoinverse, kernel_basis, pseudoinverse
from .solver import SolverConfig, Status, solve, solve_ai_ik, solve_perturbed
from .tangent import SingularBasis, prolonged_jacobian, regularizing_perturbation, transversal_projector

__version__ = "0.1.0"
