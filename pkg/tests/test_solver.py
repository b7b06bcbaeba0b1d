import numpy as np
import pytest
from hypothesis import given, settings

from aiik.kinematics import forward_kinematics, geometric_jacobian, iiwa14
from aiik.liegroup import ErrorMode, Pose, exp
from aiik.pinv import Damped, PseudoInverse, kernel_basis, pseudoinverse
from aiik.solver import (
    SolverConfig,
    StartNotSingular,
    Status,
    ik_step,
    solve,
    solve_ai_ik,
    solve_perturbed,
    task_error,
)
from aiik.tangent import DegeneratePerturbation
from strategies import vectors

Q0 = np.zeros(7)
EPS = np.full(7, 1e-3)


def xz_target(model):
    return forward_kinematics(model, Q0) @ Pose(np.eye(3), (0.01, 0.0, -0.01))


def dpi(lambda_sq, **kw):
    return SolverConfig(inverse=Damped.from_lambda_sq(lambda_sq), **kw)


def test_step_at_singularity_is_zero(iiwa):
    dq, e = ik_step(iiwa, Q0, xz_target(iiwa), dpi(1e-4))
    np.testing.assert_array_equal(dq, 0.0)
    np.testing.assert_allclose(e, [0, 0, 0, 0.01, 0, -0.01], atol=1e-17)


def test_newton_step_reduces_error_tenfold(iiwa):
    q = np.array([0.3, 0.5, -0.2, 1.0, 0.4, -0.6, 0.1])
    C_d = forward_kinematics(iiwa, q + 0.02 * np.ones(7))
    dq, e = ik_step(iiwa, q, C_d, SolverConfig())
    e_next = task_error(iiwa, q + dq, C_d)
    assert np.linalg.norm(e_next) <= 0.1 * np.linalg.norm(e)


def test_converged_at_target(iiwa):
    out = solve(iiwa, Q0, forward_kinematics(iiwa, Q0))
    assert out.status is Status.CONVERGED
    assert out.iterations == 0


def test_singular_start_locks_up(iiwa):
    out = solve(iiwa, Q0, xz_target(iiwa), dpi(1e-4))
    assert out.status is Status.LOCKED_UP
    errs = out.trace.errors
    assert np.ptp(errs) <= 1e-15


def test_lockup_horizon_extends_trace(iiwa):
    out = solve(iiwa, Q0, xz_target(iiwa), dpi(1e-4, lockup_horizon=15))
    assert out.status is Status.LOCKED_UP
    assert out.iterations == 15


def test_lockup_error_lies_in_unreachable_subspace(iiwa):
    C_d = xz_target(iiwa)
    out = solve(iiwa, Q0, C_d, dpi(1e-6))
    e = task_error(iiwa, out.q_final, C_d)
    K = np.column_stack(kernel_basis(geometric_jacobian(iiwa, out.q_final)))
    assert np.linalg.norm(e - K @ (K.T @ e)) <= 1e-8


def test_ai_ik_converges(iiwa):
    sb = iiwa.singularities["stretched"]
    out = solve_ai_ik(iiwa, Q0, xz_target(iiwa), sb, EPS, SolverConfig(max_iters=30))
    assert out.status is Status.CONVERGED
    assert out.iterations <= 15
    assert out.trace[1].step_norm == pytest.approx(np.sqrt(3) * 1e-3)
    assert out.trace[1].rank == 6


def test_ai_ik_first_step_with_prolonged_jacobian(iiwa):
    sb = iiwa.singularities["stretched"]
    out = solve_ai_ik(iiwa, Q0, xz_target(iiwa), sb, EPS, SolverConfig(max_iters=30, prolonged_order=1))
    assert out.status is Status.CONVERGED


def test_ai_ik_checks_start(iiwa):
    sb = iiwa.singularities["stretched"]
    with pytest.raises(StartNotSingular):
        solve_ai_ik(iiwa, np.full(7, 0.1), xz_target(iiwa), sb, EPS)
    with pytest.raises(DegeneratePerturbation):
        solve_ai_ik(iiwa, Q0, xz_target(iiwa), sb, [1, 0, 1, 0, 1, 0, 1])


def test_zero_perturbation_reduces_to_plain_solve(iiwa):
    cfg = dpi(1e-4, lockup_horizon=5)
    out = solve_perturbed(iiwa, Q0, xz_target(iiwa), np.zeros(7), cfg)
    assert out.status is Status.LOCKED_UP


def test_first_order_error_mode_converges(iiwa):
    sb = iiwa.singularities["stretched"]
    cfg = SolverConfig(error_mode=ErrorMode.FIRST_ORDER, max_iters=50)
    out = solve_ai_ik(iiwa, Q0, xz_target(iiwa), sb, EPS, cfg)
    assert out.status is Status.CONVERGED


def test_rotation_by_pi_is_numerical_failure(iiwa):
    C_d = forward_kinematics(iiwa, Q0) @ Pose(np.diag([1.0, -1.0, -1.0]), (0, 0, 0))
    out = solve(iiwa, Q0, C_d)
    assert out.status is Status.NUMERICAL_FAILURE


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(step_scale=1.5)


def test_planar3r_lockup_and_escape(r3):
    sb = r3.singularities["upright"]
    C_d = forward_kinematics(r3, sb.config) @ Pose(np.eye(3), (0.0, 0.1, -0.1))
    assert solve(r3, sb.config, C_d, dpi(1e-4)).status is Status.LOCKED_UP
    out = solve_ai_ik(r3, sb.config, C_d, sb, np.full(3, 1e-3), SolverConfig(max_iters=50))
    assert out.status is Status.CONVERGED


@settings(max_examples=20)
@given(vectors(7, -1.0, 1.0), vectors(7, -0.2, 0.2))
def test_converged_outcomes_recheck(q, dq):
    model = iiwa14()
    C_d = forward_kinematics(model, q + dq)
    out = solve(model, q, C_d, SolverConfig(max_iters=50))
    assert out.status is Status.CONVERGED
    # recheck from the returned configuration, not from the trace
    assert np.linalg.norm(task_error(model, out.q_final, C_d)) <= 1e-10
    # monotone tail of converging undamped runs
    assert np.all(np.diff(out.trace.errors[-5:]) < 0)


def test_determinism(iiwa):
    sb = iiwa.singularities["stretched"]
    a = solve_ai_ik(iiwa, Q0, xz_target(iiwa), sb, EPS, dpi(1e-4, max_iters=40))
    b = solve_ai_ik(iiwa, Q0, xz_target(iiwa), sb, EPS, dpi(1e-4, max_iters=40))
    assert [(r.error_norm, r.step_norm, r.sigma_min) for r in a.trace] == [(r.error_norm, r.step_norm, r.sigma_min) for r in b.trace]
    np.testing.assert_array_equal(a.q_final, b.q_final)


def _nullspace_motion(q, g):
    model = iiwa14()
    J = geometric_jacobian(model, q)
    C_d = forward_kinematics(model, q) @ exp(np.full(6, 1e-3))
    with_g, _ = ik_step(model, q, C_d, SolverConfig(nullspace_gradient=g))
    without, _ = ik_step(model, q, C_d, SolverConfig())
    return J, np.max(np.abs(J @ (with_g - without)))


@given(vectors(7, -1.0, 1.0), vectors(7))
def test_nullspace_term_does_not_move_the_ee(q, g):
    J, moved = _nullspace_motion(q, g)
    s = np.linalg.svd(J, compute_uv=False)
    # exact away from the truncation band; inside it the truncated singular
    # directions are treated as null and move the EE by at most sigma |g|
    if s[-1] > 1e-6 * s[0] or s[-1] < 1e-14 * s[0]:
        assert moved <= 1e-10
    else:
        assert moved <= 1e-8 * s[0] * np.linalg.norm(g) + 1e-12


@given(vectors(7))
def test_nullspace_term_at_the_singularity(g):
    _, moved = _nullspace_motion(Q0, g)
    assert moved <= 1e-10


def test_nullspace_term_matches_projector(iiwa, rng):
    q = rng.uniform(-1, 1, 7)
    g = rng.normal(size=7)
    J = geometric_jacobian(iiwa, q)
    C_d = forward_kinematics(iiwa, q)
    dq, _ = ik_step(iiwa, q, C_d, SolverConfig(nullspace_gradient=g, inverse=PseudoInverse()))
    np.testing.assert_allclose(dq, (np.eye(7) - pseudoinverse(J) @ J) @ g, atol=1e-12)
    # callable gradients are evaluated at q
    seen = []
    cb, _ = ik_step(iiwa, q, C_d, SolverConfig(nullspace_gradient=lambda qq: seen.append(qq) or g))
    np.testing.assert_allclose(cb, dq, atol=1e-14)
    np.testing.assert_array_equal(seen[0], q)
