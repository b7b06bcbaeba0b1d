import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from aiik.liegroup import (
    AngleAtPi,
    ErrorMode,
    NotSkew,
    Pose,
    ad,
    adjoint,
    delta_pose,
    exp,
    hat,
    lie_bracket,
    log,
    pose_error,
    vee,
)
from strategies import twists, vectors


def test_hat_of_unit_rotation_about_z():
    A = hat([0, 0, 1, 0, 0, 0])
    expected = np.zeros((4, 4))
    expected[0, 1], expected[1, 0] = -1.0, 1.0
    np.testing.assert_array_equal(A, expected)


def test_vee_inverts_hat():
    t = np.array([0.3, -0.2, 0.1, 1.0, 2.0, -3.0])
    np.testing.assert_array_equal(vee(hat(t)), t)


def test_vee_rejects_non_skew_block():
    A = hat(np.zeros(6))
    A[0, 1] = 1.0
    with pytest.raises(NotSkew):
        vee(A)


def test_exp_of_zero_is_identity():
    C = exp(np.zeros(6))
    np.testing.assert_array_equal(C.matrix, np.eye(4))


def test_exp_quarter_turn_about_z():
    C = exp([0, 0, np.pi / 2, 0, 0, 0])
    np.testing.assert_allclose(C.rotation, [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)


def test_exp_pure_translation():
    C = exp([0, 0, 0, 1, 2, 3])
    np.testing.assert_array_equal(C.rotation, np.eye(3))
    np.testing.assert_array_equal(C.translation, [1, 2, 3])


def test_log_at_pi_is_rejected():
    C = Pose(np.diag([1.0, -1.0, -1.0]), (0, 0, 0))
    with pytest.raises(AngleAtPi):
        log(C)


@pytest.mark.parametrize("theta", [1e-9, 1e-6, 5e-5, 1e-4, 2e-4, 1e-2])
def test_exp_small_angles_match_matrix_exponential(theta):
    # both sides of the series/closed-form switch
    t = np.array([theta, -0.5 * theta, 0.25 * theta, 0.3, -0.1, 0.2])
    np.testing.assert_allclose(exp(t).matrix, sla.expm(hat(t)), atol=1e-14)
    np.testing.assert_allclose(log(exp(t)), t, atol=1e-14)


@given(twists)
def test_exp_matches_matrix_exponential(t):
    np.testing.assert_allclose(exp(t).matrix, sla.expm(hat(t)), atol=1e-10)


@given(twists)
def test_log_exp_roundtrip(t):
    np.testing.assert_allclose(log(exp(t)), t, atol=1e-10)


@given(twists)
def test_exp_log_roundtrip_on_poses(t):
    C = exp(t)
    np.testing.assert_allclose(exp(log(C)).matrix, C.matrix, atol=1e-10)


# scipy's norm estimator inside logm divides by zero entries of near-identity inputs
@pytest.mark.filterwarnings("ignore::RuntimeWarning:scipy")
@given(twists)
def test_log_matches_matrix_logarithm(t):
    # scipy's logm is the principal logarithm, same branch as ours
    L = np.real(sla.logm(exp(t).matrix))
    np.testing.assert_allclose(log(exp(t)), vee(L, tol=1e-8), atol=1e-8)


@given(vectors(6), vectors(6))
def test_bracket_matches_matrix_commutator(a, b):
    A, B = hat(a), hat(b)
    np.testing.assert_allclose(lie_bracket(a, b), vee(A @ B - B @ A), atol=1e-12)
    np.testing.assert_allclose(ad(a) @ b, lie_bracket(a, b), atol=1e-12)


@given(vectors(6), vectors(6))
def test_bracket_antisymmetry(a, b):
    np.testing.assert_allclose(lie_bracket(a, b), -lie_bracket(b, a), atol=1e-12)


@given(vectors(6), vectors(6), vectors(6))
def test_jacobi_identity(a, b, c):
    total = (
        lie_bracket(a, lie_bracket(b, c))
        + lie_bracket(b, lie_bracket(c, a))
        + lie_bracket(c, lie_bracket(a, b))
    )
    assert np.max(np.abs(total)) <= 1e-12


@given(twists, vectors(6))
def test_adjoint_conjugates_hat(t, s):
    C = exp(t)
    T = C.matrix
    np.testing.assert_allclose(hat(adjoint(C) @ s), T @ hat(s) @ np.linalg.inv(T), atol=1e-10)


@given(twists, twists)
def test_delta_pose_recovers_target(a, b):
    C, C_d = exp(a), exp(b)
    np.testing.assert_allclose((C @ delta_pose(C, C_d)).matrix, C_d.matrix, atol=1e-12)


def test_pose_error_of_identical_poses_is_zero():
    C = exp([0.1, 0.2, 0.3, 1, 2, 3])
    for mode in ErrorMode:
        np.testing.assert_allclose(pose_error(C, C, mode), 0.0, atol=1e-15)


def test_pose_error_modes_agree_to_first_order():
    C = exp([0.1, -0.4, 0.2, 0.3, 0.0, -1.0])
    d = np.array([0.3, -0.2, 0.5, 0.1, 0.4, -0.2])
    gaps = []
    for h in (1e-2, 1e-3):
        C_d = C @ exp(h * d)
        gap = np.linalg.norm(pose_error(C, C_d, "log") - pose_error(C, C_d, "first-order"))
        gaps.append(gap)
    # the two error maps differ at second order in the displacement
    assert gaps[0] / gaps[1] > 50


def test_pose_error_of_pure_translation():
    C = Pose.identity()
    C_d = Pose(np.eye(3), (0.01, 0.0, -0.01))
    e = pose_error(C, C_d)
    np.testing.assert_allclose(e, [0, 0, 0, 0.01, 0, -0.01], atol=1e-17)
    assert np.linalg.norm(e) == pytest.approx(np.sqrt(2) * 0.01)


@given(st.floats(-3.0, 3.0))
def test_pose_inverse_and_validity(theta):
    C = exp([0, theta, 0, 1, 0, 0])
    assert C.is_valid()
    np.testing.assert_allclose((C @ C.inverse()).matrix, np.eye(4), atol=1e-14)
