import numpy as np
import pytest

from lagdisc import algebra as alg
from lagdisc import domains as dom
from lagdisc.families import flat_disc, nonminimal_map


# ---------------------------------------------------------------------------
# unit ball
# ---------------------------------------------------------------------------
def test_ball_normals():
    ball = dom.unit_ball()
    assert np.allclose(ball.normal_at(np.array([1.0, 0, 0, 0])), [1, 0, 0, 0])
    assert np.allclose(ball.normal_at(np.array([0.0, 1, 0, 0])), [0, 1, 0, 0])
    # the normal extension is defined off the boundary (radial normalization)
    assert np.allclose(ball.normal_extension(np.array([0.0, 0, 0, 2.0])),
                       [0, 0, 0, 1])
    assert ball.F(np.array([0.5, 0, 0, 0])) == pytest.approx(-0.75)


def test_ball_normal_at_requires_boundary():
    ball = dom.unit_ball()
    with pytest.raises(dom.NotOnBoundary):
        ball.normal_at(np.array([0.9, 0, 0, 0]))  # 0.1 away from the sphere


def test_ball_projection():
    ball = dom.unit_ball()
    assert np.allclose(ball.project_to_boundary(np.array([2.0, 0, 0, 0])),
                       [1, 0, 0, 0])
    assert np.allclose(ball.project_to_boundary(np.array([0.9, 0, 0, 0])),
                       [1, 0, 0, 0])
    with pytest.raises(dom.ProjectionDiverged):
        ball.project_to_boundary(np.zeros(4))


def test_ball_projection_idempotent(rng):
    ball = dom.unit_ball()
    z = rng.normal(size=(1000, 4))
    z *= rng.uniform(0.5, 1.5, size=1000)[:, None] / alg.norm(z)[:, None]
    p = ball.project_to_boundary(z)
    p2 = ball.project_to_boundary(p)
    assert np.max(np.abs(p2 - p)) <= 1e-12
    # displacement parallel to gradF (radial) at the result
    disp = z - p
    radial = p / alg.norm(p)[:, None]
    off = disp - alg.inner(disp, radial)[:, None] * radial
    assert np.max(alg.norm(off)) <= 1e-8


# ---------------------------------------------------------------------------
# curve domains
# ---------------------------------------------------------------------------
def test_curve_domain_from_nonminimal():
    nm = nonminimal_map()
    d = dom.curve_domain_from_map(nm)
    # |X| >= 1 > 0.5 on the grid (oracle: |X|^2 = 2 - cos^2 theta)
    th = d.theta_grid
    X = nm.boundary_X(th)
    assert np.min(alg.norm(X)) > 0.5
    assert np.max(np.abs(alg.norm(X) ** 2 - (2 - np.cos(th) ** 2))) <= 1e-12
    assert d.tangency_residual <= 1e-8


def test_curve_normal_at_quarter_turn():
    nm = nonminimal_map()
    d = dom.curve_domain_from_map(nm)
    p = nm.value(1.0, np.pi / 2)
    assert np.allclose(p, [1, 0, 0, 1], atol=1e-14)
    n = d.normal_at(p)
    assert np.allclose(n, np.array([-1.0, 0, 0, 1.0]) / np.sqrt(2), atol=1e-9)


def test_curve_normal_off_curve_rejected():
    d = dom.curve_domain_from_map(nonminimal_map())
    with pytest.raises(dom.NotOnBoundary):
        d.normal_at(np.array([0.0, 0, 0, 0.5]))


def test_curve_projection_unsupported():
    d = dom.curve_domain_from_map(nonminimal_map())
    with pytest.raises(dom.Unsupported):
        d.project_to_boundary(np.zeros(4))


def test_curve_grid_refinement_stability():
    nm = nonminimal_map()
    d1 = dom.curve_domain_from_map(nm, n_grid=256)
    d2 = dom.curve_domain_from_map(nm, n_grid=512)
    th = np.linspace(0, 2 * np.pi, 1001)
    n1 = d1.normal_at_theta(th)
    n2 = d2.normal_at_theta(th)
    assert np.max(np.abs(n1 - n2)) <= 1e-6


def test_curve_degenerate_normal():
    nm = nonminimal_map()
    with pytest.raises(dom.DegenerateNormal):
        dom.curve_domain_from_map(nm, X=lambda th: np.zeros((len(th), 4)))


def test_flat_disc_curve_reproduces_ball_normals():
    # X := u along the great circle gives back the sphere normal N = u
    fd = flat_disc(np.eye(2))
    d = dom.curve_domain_from_map(
        fd, X=lambda th: fd.value(np.ones_like(th), th))
    ball = dom.unit_ball()
    for th in np.linspace(0, 2 * np.pi, 17):
        p = fd.value(1.0, th)
        assert np.allclose(d.normal_at(p), ball.normal_at(p), atol=1e-9)


def test_curve_serialization():
    d = dom.curve_domain_from_map(nonminimal_map())
    payload = d.to_json_dict()
    assert set(payload) == {"curve_points", "curve_normals"}
    assert len(payload["curve_points"]) == len(d.theta_grid)
    assert all(len(row) == 4 for row in payload["curve_normals"])


def test_curve_requires_enough_grid():
    with pytest.raises(ValueError):
        dom.curve_domain_from_map(nonminimal_map(), n_grid=128)
