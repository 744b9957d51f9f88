import numpy as np
import pytest
from dataclasses import replace

from lagdisc import domains as dom
from lagdisc import families as fam
from lagdisc import hamiltonians as hams
from lagdisc import residuals as res
from lagdisc import solver as sol
from lagdisc.algebra import symplectic
from conftest import random_unitary

BALL = dom.unit_ball()


def small_cfg(**kw):
    defaults = dict(continuation=sol.default_continuation(), grad_tol=1e-9,
                    max_iters=200)
    defaults.update(kw)
    return sol.SolverConfig(**defaults)


# ---------------------------------------------------------------------------
# energy and gradient
# ---------------------------------------------------------------------------
def test_energy_flat_disc(mesh_cache):
    m = mesh_cache(16, 64)
    u = fam.sample(fam.flat_disc(np.eye(2)), m)
    E, G = sol.energy_and_gradient(u, BALL, 10.0, 100.0)
    assert abs(E - np.pi) <= 0.01          # mesh area = pi - O(h^2)
    assert abs(E - float(np.sum(m.areas))) <= 1e-12
    # penalty parts vanish on the exact flat disc
    E2, _ = sol.energy_and_gradient(u, BALL, 1e6, 1e6)
    assert abs(E2 - E) <= 1e-12


def test_energy_zero_map(mesh_cache):
    m = mesh_cache(8, 32)
    u0 = fam.sample(fam.flat_disc(np.eye(2)), m)
    uz = replace(u0, values=np.zeros_like(u0.values), exact_frames=None,
                 source=None)
    lam2 = 100.0
    E, G = sol.energy_and_gradient(uz, BALL, 10.0, lam2)
    w = sol._boundary_weights(m)[m.is_boundary].sum()
    assert E == pytest.approx(lam2 * w, rel=1e-12)
    assert np.all(G == 0.0)                # gradF(0) = 0


def test_gradient_finite_difference(mesh_cache, rng):
    m = mesh_cache(6, 24)
    u = fam.sample(fam.sw_cone(1, 2), m)
    u = replace(u, exact_frames=None, source=None)
    E0, G = sol.energy_and_gradient(u, BALL, 10.0, 100.0)
    for _ in range(20):
        d = rng.normal(size=u.values.shape)
        d /= np.linalg.norm(d)
        step = 1e-6
        Ep, _ = sol.energy_and_gradient(replace(u, values=u.values + step * d),
                                        BALL, 10.0, 100.0)
        Em, _ = sol.energy_and_gradient(replace(u, values=u.values - step * d),
                                        BALL, 10.0, 100.0)
        fd = (Ep - Em) / (2 * step)
        assert abs(fd - float(np.sum(G * d))) <= 1e-6 * (1 + abs(E0))


def test_energy_needs_level_set(mesh_cache):
    d = dom.curve_domain_from_map(fam.nonminimal_map())
    u = fam.sample(fam.nonminimal_map(), mesh_cache(4, 16))
    with pytest.raises(dom.Unsupported):
        sol.energy_and_gradient(u, d, 1.0, 1.0)


# ---------------------------------------------------------------------------
# minimize
# ---------------------------------------------------------------------------
def test_minimize_flat_disc_immediate(mesh_cache):
    m = mesh_cache(12, 48)
    u0 = fam.sample(fam.flat_disc(np.eye(2)), m)
    u_star, hist = sol.minimize(u0, BALL, small_cfg(grad_tol=1e-7))
    # converged in at most 5 accepted iterations per stage: the flat disc is
    # an exact critical point of the projected scheme
    assert all(s["iters"] <= 5 for s in hist["stages"])
    assert hist["rows"][-1]["grad_norm"] <= 1e-7
    assert abs(hist["rows"][-1]["E"] - float(np.sum(m.areas))) <= 1e-10


def test_minimize_max_iters_zero(mesh_cache):
    m = mesh_cache(8, 32)
    u0 = fam.sample(fam.flat_disc(np.eye(2)), m)
    u_star, hist = sol.minimize(u0, BALL, small_cfg(max_iters=0, fd_check=False))
    assert np.array_equal(u_star.values, u0.values)
    assert hist["rows"] == []


def test_minimize_requires_projection_tube(mesh_cache):
    m = mesh_cache(8, 32)
    u0 = fam.sample(fam.flat_disc(np.eye(2)), m)
    bad = replace(u0, values=2.5 * u0.values, exact_frames=None, source=None)
    with pytest.raises(ValueError):
        sol.minimize(bad, BALL, small_cfg())


def test_minimize_perturbed_recovers(mesh_cache, rng):
    m = mesh_cache(12, 48)
    u0 = fam.sample(fam.flat_disc(np.eye(2)), m)
    fs = sol.random_sphere_tangent_hamiltonians(rng, BALL, count=3)
    scales = []
    for f in fs:
        gmax = float(np.max(np.linalg.norm(f.gradient(u0.values), axis=1)))
        scales.append((0.05 / 3) / max(gmax, 1e-9))
    state = sol.perturb_by_hamiltonian_flows(u0, fs, scales, BALL)
    u_star, hist = sol.minimize(state.u, BALL, small_cfg(grad_tol=1e-8))
    last = hist["rows"][-1]
    assert last["E"] <= np.pi + 1e-3
    assert last["lagrangian"] <= 1e-6
    # energy is monotone within each stage
    splits = np.cumsum([s["iters"] for s in hist["stages"]])
    start = 0
    for stop in splits:
        Es = [r["E"] for r in hist["rows"][start:stop]]
        assert all(b <= a + 1e-12 for a, b in zip(Es, Es[1:]))
        start = stop


def test_minimize_unitary_equivariance(mesh_cache, rng):
    m = mesh_cache(8, 32)
    u0 = fam.sample(fam.flat_disc(np.eye(2)), m)
    f = hams.hopf_invariant_quadratic([0.4, -0.2, 0.6, 0.1], domain=BALL)
    state = sol.perturb_by_hamiltonian_flows(u0, [f], [0.03], BALL)
    cfg = small_cfg(grad_tol=1e-10, fd_check=False)
    u_a, hist_a = sol.minimize(state.u, BALL, cfg)
    U = random_unitary(rng)
    Ur = np.zeros((4, 4))
    Ur[0::2, 0::2] = U.real
    Ur[0::2, 1::2] = -U.imag
    Ur[1::2, 0::2] = U.imag
    Ur[1::2, 1::2] = U.real
    rotated = replace(state.u, values=state.u.values @ Ur.T)
    u_b, hist_b = sol.minimize(rotated, BALL, cfg)
    Ea, Eb = hist_a["rows"][-1]["E"], hist_b["rows"][-1]["E"]
    assert abs(Ea - Eb) <= 1e-8
    da, _, la = sol.flat_disc_distance(u_a)
    db, _, lb = sol.flat_disc_distance(u_b)
    assert abs(da - db) <= 1e-8
    assert abs(la - lb) <= 1e-8


# ---------------------------------------------------------------------------
# Hamiltonian flow
# ---------------------------------------------------------------------------
def test_flow_zero_hamiltonian(mesh_cache):
    m = mesh_cache(8, 32)
    u = fam.sample(fam.flat_disc(np.eye(2)), m)
    f0 = hams.interior_bump(np.zeros(4), 0.3, 0.0)
    st = sol.hamiltonian_flow_step(sol.FlowState(u=u), f0, 1e-2, BALL)
    assert np.array_equal(st.u.values, u.values)
    assert st.t == pytest.approx(1e-2)


def test_flow_hopf_invariance(mesh_cache):
    m = mesh_cache(8, 32)
    u = fam.sample(fam.flat_disc(np.eye(2)), m)
    f = hams.hopf_invariant_quadratic([1, 0, 0, 0], domain=BALL)
    st = sol.FlowState(u=u)
    for _ in range(100):
        st = sol.hamiltonian_flow_step(st, f, 1e-2, BALL)
        assert st.diagnostics["boundary_violation"] <= 1e-12
    assert st.diagnostics["lagrangian"] <= 1e-6


def test_flow_drift_single_step_order():
    f = hams.hopf_invariant_quadratic(
        [1.0, -0.5, 0.7, 0.3], profile=hams.smooth_cutoff_profile(0.5, 1.3),
        domain=BALL)
    z0 = np.array([0.5, 0.1, 0.4, -0.2])
    frame = (np.array([1.0, 0, 0, 0]), np.array([0.0, 0, 1.0, 0]))
    dts = (1e-2, 5e-3, 2.5e-3)
    drifts = []
    for dt in dts:
        _, fr = sol.flow_frame_step(z0, frame, f, dt, method="rk2")
        drifts.append(abs(symplectic(fr[0], fr[1])))
    slope = np.polyfit(np.log(dts), np.log(np.maximum(drifts, 1e-300)), 1)[0]
    assert slope >= 2.5


def test_flow_rejects_bad_dt(mesh_cache):
    u = fam.sample(fam.flat_disc(np.eye(2)), mesh_cache(4, 16))
    f = hams.hopf_invariant_quadratic([1, 0, 0, 0], domain=BALL)
    with pytest.raises(ValueError):
        sol.hamiltonian_flow_step(sol.FlowState(u=u), f, -1e-2, BALL)


# ---------------------------------------------------------------------------
# flat-disc distance
# ---------------------------------------------------------------------------
def test_flat_disc_distance_exact(mesh_cache, rng):
    m = mesh_cache(8, 32)
    d, plane, lag = sol.flat_disc_distance(fam.sample(fam.flat_disc(np.eye(2)), m))
    assert d <= 1e-12 and lag <= 1e-12
    for _ in range(5):
        U = random_unitary(rng)
        d, _, lag = sol.flat_disc_distance(fam.sample(fam.flat_disc(U), m))
        assert d <= 1e-12
        assert lag <= 1e-12     # unitary images of Lagrangian planes


def test_flat_disc_distance_cone(mesh_cache):
    d, _, _ = sol.flat_disc_distance(fam.sample(fam.sw_cone(1, 2),
                                                mesh_cache(8, 32)))
    assert d >= 0.1


def test_flat_disc_distance_degenerate(mesh_cache):
    from types import SimpleNamespace
    m = mesh_cache(4, 16)
    u = fam.sample(fam.flat_disc(np.eye(2)), m)
    with pytest.raises(sol.DegeneratePointCloud):
        sol.flat_disc_distance(SimpleNamespace(values=u.values[:8], mesh=m))
    collapsed = replace(u, values=np.tile([0.5, 0.0, 0.0, 0.0],
                                          (len(m.nodes), 1)),
                        exact_frames=None, source=None)
    with pytest.raises(sol.DegeneratePointCloud):
        sol.flat_disc_distance(collapsed)


def test_normal_wave_perturbation(mesh_cache):
    m = mesh_cache(12, 48)
    u = fam.sample(fam.flat_disc(np.eye(2)), m)
    up = sol.normal_wave_perturbation(u, amplitude=0.05)
    disp = up.values - u.values
    assert np.max(np.abs(disp)) == pytest.approx(0.05, rel=1e-12)
    assert np.allclose(disp[:, [0, 2, 3]], 0.0)   # purely along I e_x


# ---------------------------------------------------------------------------
# rigidity experiment
# ---------------------------------------------------------------------------
def test_rigidity_eps_zero(mesh_cache):
    rep, u_final, hist = sol.rigidity_experiment(seed=1, eps=0.0,
                                                 mesh=mesh_cache(12, 48))
    assert rep.passed
    assert rep.flat_disc_distance <= 1e-10
    assert rep.angle_variance <= 1e-10
    assert rep.circle_defect <= 1e-10


def test_rigidity_small_mesh_pass(mesh_cache):
    rep, _, _ = sol.rigidity_experiment(seed=2, eps=0.05,
                                        mesh=mesh_cache(12, 48))
    assert rep.passed
    assert rep.flat_disc_distance <= 1e-3
    assert rep.angle_variance <= 1e-6
    assert rep.circle_defect <= 1e-3


def test_rigidity_control_without_lagrangian_penalty(mesh_cache):
    rep, _, _ = sol.rigidity_experiment(seed=2, eps=0.05,
                                        mesh=mesh_cache(12, 48),
                                        lagrangian_penalty_on=False)
    assert not rep.passed          # a control run never claims PASS
    assert np.isfinite(rep.final_lagrangian)


def test_rigidity_rejects_large_eps(mesh_cache):
    with pytest.raises(ValueError):
        sol.rigidity_experiment(seed=1, eps=0.5, mesh=mesh_cache(4, 16))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        sol.SolverConfig(penalty_lagrangian=-1.0)
    with pytest.raises(ValueError):
        sol.SolverConfig(grad_tol=0.0)
