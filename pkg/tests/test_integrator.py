import numpy as np
import pytest
from hypothesis import given, settings

from diracred import tulczyjew as tz
from diracred.connection import DiscreteConnection
from diracred.integrator import (
    NewtonConfig,
    NoConvergence,
    SingularJacobian,
    SolverError,
    newton,
    newton_solve,
    project,
    reconstruct,
    run,
    run_unreduced,
    step_ld_minus,
    step_ld_plus,
    step_lpd_minus,
    step_lpd_plus,
    variational_residual,
)
from diracred.lagrangian import DiscreteLagrangian, ReducedLagrangianMinus, ReducedLagrangianPlus, reduced_grad_plus
from diracred.spaces import TrivializedSpace
from diracred.systems import ChargedParticleParams, charged_particle_system, pendulum_system
from diracred.systems.charged_particle import potential
from diracred.systems.quadratic import QuadraticSystem, random_quadratic_system

from conftest import rand_cov, rand_point, seeds
from helpers import free_particle

SP = TrivializedSpace(3, 1)


def _random(seed, max_dim=6):
    rng = np.random.default_rng(seed)
    system, c, ic = random_quadratic_system(rng, max_dim)
    return system, system.lagrangian(), c, ic


def _state(ic):
    return tz.ReducedState(ic.q.x, ic.w, ic.mu)


# -- Newton ----------------------------------------------------------------


def test_newton_linear_one_iteration():
    c = np.array([1.0, -2.0, 3.0])
    res = newton(lambda u: u - c, np.zeros(3), jacobian=lambda u: np.eye(3))
    np.testing.assert_array_equal(res.u, c)
    assert res.iterations == 1
    # forward differences carry ~1e-10 relative Jacobian error, hence a second pass
    res = newton(lambda u: u - c, np.zeros(3))
    np.testing.assert_allclose(res.u, c, atol=1e-12)
    assert res.iterations <= 2


def test_newton_scalar():
    u = newton_solve(lambda u: u * u - 4.0, np.array([1.0]))
    assert abs(u[0] - 2.0) <= 1e-12


def test_newton_analytic_jacobian():
    res = newton(lambda u: np.array([u[0] ** 3 - 8.0]), np.array([1.0]), jacobian=lambda u: np.array([[3 * u[0] ** 2]]))
    assert res.u[0] == pytest.approx(2.0, abs=1e-12)


def test_newton_singular():
    with pytest.raises(SingularJacobian):
        newton_solve(lambda u: np.array([u[0] + u[1] - 1.0, 2 * (u[0] + u[1]) - 2.0]), np.zeros(2))


def test_newton_no_convergence():
    with pytest.raises(NoConvergence) as e:
        newton_solve(lambda u: u * u + 1.0, np.array([0.5]), NewtonConfig(max_iter=20))
    assert e.value.residual_norm >= 1.0


def test_newton_max_iter_reports_residual():
    with pytest.raises(NoConvergence) as e:
        newton_solve(lambda u: u ** 10 - 1.0, np.array([5.0]), NewtonConfig(max_iter=2))
    assert "after 2 iterations" in str(e.value)
    assert np.isfinite(e.value.residual_norm)


def test_newton_non_finite_start():
    with pytest.raises(SolverError):
        with np.errstate(invalid="ignore"):
            newton_solve(lambda u: np.log(u), np.array([-1.0]))


def test_newton_config_validation():
    for kw in ({"tol": 0}, {"max_iter": 0}, {"fd_jacobian_step": -1}, {"stall_limit": 0}):
        with pytest.raises(ValueError):
            NewtonConfig(**kw)


def test_solver_error_carries_step():
    e = NoConvergence("x", 1.0, step=4)
    assert str(e) == "step 4: x"


# -- unreduced steps -------------------------------------------------------


def test_free_particle_step(rng):
    m, h = 2.0, 0.1
    L = free_particle(SP, m, h)
    q, p = rand_point(rng, SP), rand_cov(rng, SP)
    for step in (step_ld_plus, step_ld_minus):
        q1, p1 = step(L, q, p)
        np.testing.assert_allclose(q1.flat(), q.flat() + (h / m) * p.flat(), atol=1e-14)
        np.testing.assert_allclose(p1.flat(), p.flat(), atol=1e-12)
    q1, p1 = step_ld_plus(L, q, SP.zero_covector())
    assert q1 == q


def test_unreduced_steppers_agree():
    L, c, ic = charged_particle_system()
    q, p = tz.hat_lambda_d_inv(c, ic.q, ic.w, ic.mu)
    qm, pm = q, p
    for _ in range(50):
        q, p = step_ld_plus(L, q, p)
        qm, pm = step_ld_minus(L, qm, pm)
    np.testing.assert_allclose(q.flat(), qm.flat(), atol=1e-9)
    np.testing.assert_allclose(p.flat(), pm.flat(), atol=1e-9)


# -- reduced steps ---------------------------------------------------------


def test_charged_particle_step_matches_linear_solve():
    # with mu fixed by the momentum equation, the first step is linear in dq
    params = ChargedParticleParams(h=0.2)
    L, c, ic = charged_particle_system(params)
    rng = np.random.default_rng(5)
    x, w, mu = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3), rng.uniform(0.5, 1.5, 1)
    h, m, b = params.h, params.m, params.B0
    a = potential(x, b)
    J = np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]], float)
    dq = np.linalg.solve(m / h * np.eye(3) - mu[0] * b / 2 * J, w - mu[0] * a)
    x1, g_inc, w1, mu1 = step_lpd_plus(ReducedLagrangianPlus(L, c), x, w, mu)
    np.testing.assert_allclose(x1, x + dq, atol=1e-12)
    np.testing.assert_allclose(g_inc, h * mu - a @ dq, atol=1e-12)
    np.testing.assert_allclose(w1, m * dq / h + mu[0] * a, atol=1e-12)
    np.testing.assert_array_equal(mu1, mu)


def test_flat_fiber_free_reduces_to_shape_step():
    # H = 0 and no shape/fiber coupling: the shape part is a plain DEL step
    sp = TrivializedSpace(2, 1)
    rng = np.random.default_rng(2)
    M = np.diag([2.0, 3.0, 1.5])
    K = np.array([[1.0, 0.2], [0.2, 2.0]])
    Lq = QuadraticSystem(sp, M, K, 0.3, 0.1).lagrangian()
    shape = QuadraticSystem(TrivializedSpace(2, 0), M[:2, :2], K, 0.3, 0.1).lagrangian()
    x, w = rng.uniform(-1, 1, (2, 2))
    x1, _, w1, _ = step_lpd_plus(ReducedLagrangianPlus(Lq, DiscreteConnection.flat(sp)), x, w, [0.7])
    s = shape.space
    q1, p1 = step_ld_plus(shape, s.point(x, []), s.covector(w, []))
    np.testing.assert_allclose(x1, q1.x, atol=1e-12)
    np.testing.assert_allclose(w1, p1.w, atol=1e-12)


@given(seeds)
@settings(max_examples=25)
def test_reduced_orbits_match_unreduced(seed):
    system, L, c, ic = _random(seed)
    N = 20
    rp = run(ReducedLagrangianPlus(L, c), _state(ic), ic.q.g, N, h=system.h)
    rm = run(ReducedLagrangianMinus(L, c), _state(ic), ic.q.g, N, h=system.h)
    q0, p0 = tz.hat_lambda_d_inv(c, ic.q, ic.w, ic.mu)
    tu = run_unreduced(L, q0, p0, N, h=system.h)
    assert rp.complete and rm.complete and tu.error is None
    x, g, w, mu = project(tu, c)
    for tr in (rp, rm):
        np.testing.assert_allclose(tr.x, x, atol=1e-9)
        np.testing.assert_allclose(tr.g_abs, g, atol=1e-9)
        np.testing.assert_allclose(tr.w, w, atol=1e-9)
        np.testing.assert_allclose(tr.mu, mu, atol=1e-9)
        assert np.nanmax(tr.struct_residual) <= 1e-9
        assert tr.momentum_drift() <= 1e-10


@given(seeds)
@settings(max_examples=25)
def test_w_update_cancels_to_reduced_partial(seed):
    system, L, c, ic = _random(seed)
    rl = ReducedLagrangianPlus(L, c)
    tr = run(rl, _state(ic), ic.q.g, 3, h=system.h)
    for k in range(3):
        lx1 = reduced_grad_plus(rl, tr.x[k], tr.xp[k], tr.gp[k])[1]
        np.testing.assert_allclose(tr.w[k + 1], lx1, atol=1e-12)


def test_minus_stepper_public_api():
    system, L, c, ic = _random(11)
    out_m = step_lpd_minus(ReducedLagrangianMinus(L, c), ic.q.x, ic.w, ic.mu)
    out_p = step_lpd_plus(ReducedLagrangianPlus(L, c), ic.q.x, ic.w, ic.mu)
    for a, b in zip(out_m, out_p):
        np.testing.assert_allclose(a, b, atol=1e-10)


def test_momentum_modes():
    system, L, c, ic = _random(7)
    rl = ReducedLagrangianPlus(L, c)
    ev = run(rl, _state(ic), ic.q.g, 30, h=system.h, momentum="evaluated")
    assert ev.momentum_drift() <= 1e-10
    assert ev.momentum_drift() > 0 or np.all(ev.mu == ev.mu[0])
    with pytest.raises(ValueError):
        run(rl, _state(ic), ic.q.g, 2, h=system.h, momentum="bogus")


def test_reconstruct():
    g = np.array([0.3, -1.0])
    np.testing.assert_array_equal(reconstruct(g, np.zeros(2)), g)
    a, b = np.array([0.1, 0.2]), np.array([-0.5, 0.4])
    np.testing.assert_allclose(reconstruct(reconstruct(g, a), b), reconstruct(g, a + b), atol=1e-15)
    wrapped = reconstruct(np.array([3.0]), np.array([1.0]), wrap=lambda v: (v + np.pi) % (2 * np.pi) - np.pi)
    assert -np.pi < wrapped[0] < np.pi


def test_charged_particle_fiber_reconstruction():
    L, c, ic = charged_particle_system()
    tr = run(ReducedLagrangianPlus(L, c), _state(ic), ic.q.g, 20, h=0.2)
    q0, p0 = tz.hat_lambda_d_inv(c, ic.q, ic.w, ic.mu)
    tu = run_unreduced(L, q0, p0, 20, h=0.2)
    np.testing.assert_allclose(tr.g_abs[1:, 0], tr.g_abs[:-1, 0] + tr.gp[:, 0], atol=1e-15)
    np.testing.assert_allclose(tr.g_abs[:, 0], tu.q[:, 3], atol=1e-10)


# -- trajectories ----------------------------------------------------------


def test_run_zero_steps():
    L, c, ic = charged_particle_system()
    tr = run(ReducedLagrangianPlus(L, c), _state(ic), ic.q.g, 0, h=0.2)
    assert tr.n_steps == 0 and tr.complete
    np.testing.assert_array_equal(tr.x[0], ic.q.x)


def test_run_table_entry():
    from diracred.systems import final_error

    L, c, ic = charged_particle_system(ChargedParticleParams(h=0.2))
    tr = run(ReducedLagrangianPlus(L, c), _state(ic), ic.q.g, 100, h=0.2)
    assert final_error(tr) == pytest.approx(0.06626, rel=5e-3)
    np.testing.assert_allclose(tr.times[-1], 20.0)
    assert np.isnan(tr.energy[-1]) and np.all(np.isfinite(tr.energy[:-1]))


def test_run_returns_partial_trajectory_on_failure():
    L, c, ic = charged_particle_system()
    tr = run(ReducedLagrangianPlus(L, c), _state(ic), ic.q.g, 10, NewtonConfig(max_iter=1), h=0.2)
    assert not tr.complete
    assert tr.error.step == tr.n_steps
    assert "step" in str(tr.error)


def test_run_validates_arguments():
    L, c, ic = charged_particle_system()
    rl = ReducedLagrangianPlus(L, c)
    with pytest.raises(ValueError):
        run(rl, _state(ic), ic.q.g, -1)
    with pytest.raises(ValueError):
        run(rl, _state(ic), ic.q.g, 1, variant="sideways")


def test_pendulum_momentum_and_equivalence_short():
    L, c, ic = pendulum_system()
    rl = ReducedLagrangianPlus(L, c)
    tr = run(rl, _state(ic), ic.q.g, 50, h=0.01)
    q0, p0 = tz.hat_lambda_d_inv(c, ic.q, ic.w, ic.mu)
    x, g, w, mu = project(run_unreduced(L, q0, p0, 50, h=0.01), c)
    assert tr.momentum_drift() == 0.0
    np.testing.assert_allclose(tr.x, x, atol=1e-8)
    np.testing.assert_allclose(tr.w, w, atol=1e-8)


def test_hanging_rest_is_fixed_point():
    from diracred.systems.pendulum import DEFAULT_MU0

    L, c, ic = pendulum_system(q0=(0.3, np.pi, 0.1, np.pi), w0=(0, 0, 0), mu0=0.0, chart_guard=False)
    tr = run(ReducedLagrangianPlus(L, c), _state(ic), ic.q.g, 5, h=0.01)
    np.testing.assert_allclose(tr.x, np.tile(ic.q.x, (6, 1)), atol=1e-12)
    np.testing.assert_allclose(tr.w, 0, atol=1e-6)


# -- variational residual --------------------------------------------------


@pytest.mark.parametrize("seed", [0, 1])
def test_variational_residual_at_solution(seed):
    system, L, c, ic = _random(seed, 4)
    rl = ReducedLagrangianPlus(L, c)
    tr = run(rl, _state(ic), ic.q.g, 10, h=system.h)
    assert variational_residual(rl, tr) <= 1e-6


def test_variational_residual_detects_perturbation():
    system, L, c, ic = _random(0, 4)
    rl = ReducedLagrangianPlus(L, c)
    tr = run(rl, _state(ic), ic.q.g, 10, h=system.h)
    tr.xp[4] += 1e-2
    assert variational_residual(rl, tr) > 1e-3


def test_variational_residual_single_free_step():
    sp = TrivializedSpace(1, 1)
    L = free_particle(sp, 1.0, 0.5)
    rl = ReducedLagrangianPlus(L, DiscreteConnection(sp, [[0.4]]))
    tr = run(rl, tz.ReducedState(np.array([0.2]), np.array([1.0]), np.array([0.5])), [0.0], 1, h=0.5)
    assert variational_residual(rl, tr) <= 1e-9
    with pytest.raises(ValueError):
        variational_residual(rl, run(ReducedLagrangianMinus(L, rl.conn), tz.ReducedState(np.array([0.2]), np.array([1.0]), np.array([0.5])), [0.0], 1, h=0.5))


def test_user_lagrangian_with_fd_gradient():
    sp = TrivializedSpace(2, 1)
    sysq = QuadraticSystem(sp, np.diag([1.0, 2.0, 1.0]) + 0.1, np.eye(2), 0.0, 0.1)
    Lk = sysq.lagrangian()
    L = DiscreteLagrangian(Lk.eval, sp, invariant=True)
    c = DiscreteConnection(sp, [[0.5, -0.5]])
    st = tz.ReducedState(np.array([0.1, 0.2]), np.array([0.3, -0.1]), np.array([0.2]))
    a = run(ReducedLagrangianPlus(L, c), st, [0.0], 10, h=0.1)
    b = run(ReducedLagrangianPlus(Lk, c), st, [0.0], 10, h=0.1)
    np.testing.assert_allclose(a.x, b.x, atol=1e-7)
