import numpy as np
import pytest

from epaut import clebsch as cb
from epaut import epaut2d as e2
from epaut import lie


def make_grid(N=32, L=2 * np.pi):
    return e2.Grid2D(Lx=L, Ly=L, Nx=N, Ny=N)


def random_state(N=32, spec=None, k=2, seed=0, with_linear=False, with_theta=True):
    spec = spec or lie.abelian(1)
    g = make_grid(N)
    Q = np.stack([e2.random_band_limited(g, kmax=3, seed=seed + i) for i in range(k)])
    P = np.stack([e2.random_band_limited(g, kmax=3, seed=seed + 10 + i) for i in range(k)])
    sg = np.stack([e2.random_band_limited(g, kmax=3, amplitude=0.5, seed=seed + 20 + a)
                   for a in range(spec.dim)])
    if with_theta:
        xi = np.stack([e2.random_band_limited(g, kmax=2, amplitude=0.4, seed=seed + 30 + a)
                       for a in range(spec.dim)])
        theta = np.zeros((g.Nx, g.Ny, spec.rep_dim, spec.rep_dim))
        for i in range(g.Nx):
            for j in range(g.Ny):
                theta[i, j] = lie.group_exp(spec, xi[:, i, j])
    else:
        theta = cb.identity_theta(g, spec)
    lin = np.zeros((k, 2))
    if with_linear:
        lin[0] = [1.0, 0.0]
    return cb.ClebschState(grid=g, Q=Q, P=P, sigma=sg, theta=theta, spec=spec,
                           Q_linear=lin)


# ---------------------------------------------------------------------------
# j_right

def test_j_right_constant_maps():
    spec = lie.so3()
    g = make_grid(16)
    s = cb.ClebschState(g, np.full((1, 16, 16), 0.7), np.full((1, 16, 16), -1.2),
                        np.ones((3, 16, 16)) * np.array([0.1, 0.2, 0.3])[:, None, None],
                        cb.identity_theta(g, spec), spec)
    varpi, sbar = cb.j_right(s)
    np.testing.assert_allclose(varpi, 0.0, atol=1e-12)
    np.testing.assert_allclose(sbar, s.sigma, atol=1e-13)


def test_j_right_q_is_x():
    spec = lie.abelian(1)
    g = make_grid(64)
    X, Y = g.mesh()
    p = np.sin(Y) + 0.3 * np.cos(X + 2 * Y)
    s = cb.ClebschState(g, np.zeros((1, 64, 64)), p[None],
                        np.zeros((1, 64, 64)), cb.identity_theta(g, spec), spec,
                        Q_linear=np.array([[1.0, 0.0]]))
    varpi, _ = cb.j_right(s)
    _, py = e2.spectral_gradient(g, p)
    np.testing.assert_allclose(varpi, -py, atol=1e-11)


def test_j_right_single_valued_phase_is_curl_free():
    spec = lie.abelian(1)
    g = make_grid(64)
    phi = e2.random_band_limited(g, kmax=3, amplitude=0.7, seed=3)
    s = cb.ClebschState(g, np.zeros((1, 64, 64)), np.zeros((1, 64, 64)),
                        np.full((1, 64, 64), 0.8),
                        np.exp(phi)[:, :, None, None], spec)
    varpi, sbar = cb.j_right(s)
    assert np.max(np.abs(varpi)) < 1e-10
    np.testing.assert_allclose(sbar, s.sigma, atol=1e-12)


def test_j_right_pure_gauge_state():
    # P = Q makes alpha = grad(Q^2)/2; adding an exact-phase charge term
    # keeps the one-form exact, so the curl vanishes
    spec = lie.abelian(1)
    g = make_grid(64)
    Q = e2.random_band_limited(g, kmax=3, seed=4)
    phi = e2.random_band_limited(g, kmax=3, amplitude=0.5, seed=5)
    s = cb.ClebschState(g, Q[None], Q[None], np.full((1, 64, 64), 1.3),
                        np.exp(phi)[:, :, None, None], spec)
    varpi, _ = cb.j_right(s)
    assert np.max(np.abs(varpi)) < 1e-10


def test_j_right_rejects_singular_theta():
    spec = lie.abelian(1)
    g = make_grid(16)
    s = cb.ClebschState(g, np.zeros((1, 16, 16)), np.zeros((1, 16, 16)),
                        np.zeros((1, 16, 16)), np.zeros((16, 16, 1, 1)) , spec)
    with pytest.raises(cb.ClebschError):
        cb.j_right(s)


def test_j_right_3d_hand_value():
    spec = lie.abelian(1)
    N = 16
    L = 2 * np.pi
    x = np.arange(N) * L / N
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    Q = np.sin(X)[None]
    P = np.cos(Y)[None]
    sg = np.zeros((1, N, N, N))
    th = np.broadcast_to(np.eye(1), (N, N, N, 1, 1)).copy()
    curl, sbar = cb.j_right_3d((L, L, L, N, N, N), Q, P, sg, th, spec)
    # alpha = (cos y cos x, 0, 0): curl = (0, 0, sin y cos x)
    np.testing.assert_allclose(curl[0], 0.0, atol=1e-12)
    np.testing.assert_allclose(curl[1], 0.0, atol=1e-12)
    np.testing.assert_allclose(curl[2], np.sin(Y) * np.cos(X), atol=1e-11)
    np.testing.assert_allclose(sbar, sg, atol=1e-14)


# ---------------------------------------------------------------------------
# test hamiltonians

def free_motion(k, dim):
    return cb.TestHamiltonian(
        h=lambda q, p, z: 0.5 * np.sum(p ** 2, axis=0),
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: p,
        dzeta=lambda q, p, z: np.zeros_like(z))


def zeta_component(dim, a=0):
    def dz(q, p, z):
        out = np.zeros_like(z)
        out[a] = 1.0
        return out
    return cb.TestHamiltonian(
        h=lambda q, p, z: z[a],
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: np.zeros_like(p),
        dzeta=dz)


def zeta_quadratic():
    return cb.TestHamiltonian(
        h=lambda q, p, z: 0.5 * np.sum(z ** 2, axis=0),
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: np.zeros_like(p),
        dzeta=lambda q, p, z: z)


def test_partials_check_passes_and_fails():
    free_motion(2, 3).check_partials(2, 3)
    bad = cb.TestHamiltonian(
        h=lambda q, p, z: 0.5 * np.sum(p ** 2, axis=0),
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: 2.0 * p,
        dzeta=lambda q, p, z: np.zeros_like(z))
    with pytest.raises(cb.ClebschError):
        bad.check_partials(2, 3)


# ---------------------------------------------------------------------------
# j_left

def test_j_left_total_volume_and_moment():
    s = random_state(32, spec=lie.so3(), k=1, seed=7)
    vol = cb.TestHamiltonian(
        h=lambda q, p, z: np.ones(q.shape[1:]),
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: np.zeros_like(p),
        dzeta=lambda q, p, z: np.zeros_like(z))
    assert abs(cb.j_left_pair(s, vol) - (2 * np.pi) ** 2) < 1e-10
    mom = cb.TestHamiltonian(
        h=lambda q, p, z: q[0],
        dq=lambda q, p, z: np.stack([np.ones(q.shape[1:])] + [np.zeros(q.shape[1:])] * (q.shape[0] - 1)),
        dp=lambda q, p, z: np.zeros_like(p),
        dzeta=lambda q, p, z: np.zeros_like(z))
    want = np.sum(s.Q[0]) * s.grid.cell
    assert abs(cb.j_left_pair(s, mom) - want) < 1e-10


def test_j_left_translation_invariant():
    s = random_state(32, spec=lie.abelian(2), k=2, seed=9)
    h = cb.TestHamiltonian(
        h=lambda q, p, z: q[0] * p[1] + np.sum(z ** 2, axis=0),
        dq=lambda q, p, z: np.stack([p[1], np.zeros_like(p[1])]),
        dp=lambda q, p, z: np.stack([np.zeros_like(q[0]), q[0]]),
        dzeta=lambda q, p, z: 2 * z)
    a = cb.j_left_pair(s, h)
    b = cb.j_left_pair(cb.translate_state(s, (5, 11)), h)
    assert abs(a - b) < 1e-12


# ---------------------------------------------------------------------------
# canonical dynamics

def test_canonical_rhs_free_motion():
    s = random_state(16, spec=lie.so3(), k=2, seed=13)
    d = cb.canonical_rhs(s, free_motion(2, 3))
    np.testing.assert_allclose(d.Q, s.P, atol=1e-14)
    np.testing.assert_allclose(d.P, 0.0, atol=1e-14)
    np.testing.assert_allclose(d.sigma, 0.0, atol=1e-14)
    np.testing.assert_allclose(d.theta, 0.0, atol=1e-14)


def test_canonical_rhs_abelian_phase():
    spec = lie.abelian(1)
    s = random_state(16, spec=spec, k=1, seed=15, with_theta=True)
    d = cb.canonical_rhs(s, zeta_component(1))
    np.testing.assert_allclose(d.sigma, 0.0, atol=1e-14)
    np.testing.assert_allclose(d.theta, s.theta, atol=1e-13)


def test_canonical_rhs_so3_quadratic_zeta():
    s = random_state(16, spec=lie.so3(), k=1, seed=17)
    d = cb.canonical_rhs(s, zeta_quadratic())
    np.testing.assert_allclose(d.sigma, 0.0, atol=1e-13)  # ad*_sigma sigma = 0


def test_canonical_rhs_is_bracket_hamiltonian_field():
    # dF(canonical_rhs(h)) equals the collective bracket {F, h}
    spec = lie.so3()
    s = random_state(16, spec=spec, k=2, seed=19)
    F = cb.TestHamiltonian(
        h=lambda q, p, z: q[0] * p[0] + q[1] * z[2],
        dq=lambda q, p, z: np.stack([p[0], z[2]]),
        dp=lambda q, p, z: np.stack([q[0], np.zeros_like(q[0])]),
        dzeta=lambda q, p, z: np.stack([np.zeros_like(z[0])] * 2 + [q[1]]))
    H = cb.TestHamiltonian(
        h=lambda q, p, z: 0.5 * np.sum(p ** 2, axis=0) + 0.5 * np.sum(z ** 2, axis=0),
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: p,
        dzeta=lambda q, p, z: z)
    d = cb.canonical_rhs(s, H)
    X, Y = s.grid.mesh()
    q_full = s.Q + np.einsum("al,lxy->axy", s.Q_linear, np.stack([X, Y]))
    args = (q_full, s.P, s.sigma)
    dF = np.sum((np.einsum("axy,axy->xy", F.dq(*args), d.Q)
                 + np.einsum("axy,axy->xy", F.dp(*args), d.P)
                 + np.einsum("axy,axy->xy", F.dzeta(*args), d.sigma)) * s.w) * s.grid.cell
    br = cb.collective_bracket(s, F, H)
    assert abs(dF - br) < 1e-8


def test_collective_bracket_antisymmetry_and_canonical_pair():
    s = random_state(16, spec=lie.so3(), k=1, seed=21)
    F = free_motion(1, 3)
    G = zeta_quadratic()
    assert abs(cb.collective_bracket(s, F, G) + cb.collective_bracket(s, G, F)) < 1e-10
    Fq = cb.TestHamiltonian(
        h=lambda q, p, z: q[0],
        dq=lambda q, p, z: np.ones_like(q),
        dp=lambda q, p, z: np.zeros_like(p),
        dzeta=lambda q, p, z: np.zeros_like(z))
    Gp = cb.TestHamiltonian(
        h=lambda q, p, z: p[0],
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: np.ones_like(p),
        dzeta=lambda q, p, z: np.zeros_like(z))
    assert abs(cb.collective_bracket(s, Fq, Gp) - (2 * np.pi) ** 2) < 1e-10


# ---------------------------------------------------------------------------
# advective dynamics

def test_advective_rhs_zero_input():
    s = random_state(16, spec=lie.abelian(1), k=1, seed=23)
    g = s.grid
    d = cb.advective_rhs(s, (np.zeros((16, 16)), np.zeros((16, 16))),
                         np.zeros((1, 16, 16)))
    for f in (d.Q, d.P, d.sigma, d.theta):
        np.testing.assert_allclose(f, 0.0, atol=1e-14)


def test_advective_rhs_uniform_gauge_rotation():
    spec = lie.so3()
    g = make_grid(16)
    s = cb.ClebschState(g, np.zeros((1, 16, 16)), np.zeros((1, 16, 16)),
                        np.zeros((3, 16, 16)), cb.identity_theta(g, spec), spec)
    zeta = np.broadcast_to(np.array([0.3, -0.1, 0.2])[:, None, None],
                           (3, 16, 16)).copy()
    d = cb.advective_rhs(s, (np.zeros((16, 16)), np.zeros((16, 16))), zeta)
    want = cb.SIGN * np.einsum("xyab,xybc->xyac", s.theta,
                               cb._hat_field(spec, zeta))
    np.testing.assert_allclose(d.theta, want, atol=1e-13)


def test_advective_rhs_rejects_compressible_velocity():
    s = random_state(16, seed=25)
    g = s.grid
    X, _ = g.mesh()
    with pytest.raises(cb.ClebschError):
        cb.advective_rhs(s, (np.sin(X), np.zeros((16, 16))), np.zeros((1, 16, 16)))


def test_sign_calibration():
    assert cb.calibrate_sign() == cb.SIGN


# ---------------------------------------------------------------------------
# consistency with the direct solver

def test_collective_evolve_zero_data_stays_zero():
    spec = lie.abelian(1)
    g = make_grid(32)
    s = cb.ClebschState(g, np.full((1, 32, 32), 0.4), np.full((1, 32, 32), 1.1),
                        np.zeros((1, 32, 32)), cb.identity_theta(g, spec), spec)
    out = cb.collective_evolve(s, dt=5e-3, T=0.05, stride=5)
    assert np.max(out["mismatch"]) < 1e-14
    varpi, _ = cb.j_right(out["states"][-1])
    assert np.max(np.abs(varpi)) < 1e-12


def test_collective_evolve_euler_consistency():
    g = make_grid(64)
    s = cb.euler_seed(g, seed=31, kmax=3, amplitude=1.0)
    out = cb.collective_evolve(s, dt=1e-3, T=0.5, stride=50)
    assert np.max(out["mismatch"]) < 1e-3


def test_collective_evolve_charged_consistency():
    g = make_grid(64)
    s = cb.charged_seed(g, seed=37, kmax=3, amplitude=0.8, charge=0.5)
    out = cb.collective_evolve(s, dt=1e-3, T=0.5, stride=50)
    assert np.max(out["mismatch"]) < 1e-3


def test_noether_moment_conserved_along_collective_evolve():
    g = make_grid(64)
    s = cb.charged_seed(g, seed=41, kmax=3, amplitude=0.8, charge=0.5)
    h = cb.TestHamiltonian(
        h=lambda q, p, z: 0.5 * np.sum(p ** 2, axis=0) + 0.5 * np.sum(z ** 2, axis=0),
        dq=lambda q, p, z: np.zeros_like(q),
        dp=lambda q, p, z: p,
        dzeta=lambda q, p, z: z)
    out = cb.collective_evolve(s, dt=1e-3, T=0.2, stride=50)
    vals = [cb.j_left_pair(st, h) for st in out["states"]]
    drift = np.max(np.abs(np.asarray(vals) - vals[0]))
    assert drift / max(abs(vals[0]), 1.0) < 1e-6


# ---------------------------------------------------------------------------
# equivariance

def test_equivariance_identity():
    s = random_state(32, spec=lie.abelian(1), k=1, seed=43, with_linear=True)
    assert cb.equivariance_check(s, "identity") == 0.0


def test_equivariance_translation():
    s = random_state(32, spec=lie.abelian(1), k=2, seed=47, with_linear=True)
    assert cb.equivariance_check(s, ("translate", (7, 3))) < 1e-12


def test_equivariance_rotation():
    s = random_state(32, spec=lie.abelian(1), k=2, seed=53, with_linear=True)
    assert cb.equivariance_check(s, "rotate90") < 1e-12


def test_equivariance_rotation_so3():
    s = random_state(16, spec=lie.so3(), k=1, seed=59)
    assert cb.equivariance_check(s, "rotate90") < 1e-12


# ---------------------------------------------------------------------------
# theta projection

def test_project_theta_orthogonal():
    s = random_state(16, spec=lie.so3(), k=1, seed=61)
    bumped = s
    object.__setattr__(bumped, "theta", s.theta + 1e-9)
    out = cb.project_theta(bumped)
    th = out.theta
    err = np.max(np.abs(np.einsum("xyab,xycb->xyac", th, th)
                        - np.eye(3)[None, None]))
    assert err < 1e-12


def test_project_theta_drift_threshold():
    s = random_state(16, spec=lie.so3(), k=1, seed=67)
    bad = cb.ClebschState(s.grid, s.Q, s.P, s.sigma, s.theta + 1e-3, s.spec)
    with pytest.raises(cb.ClebschError):
        cb.project_theta(bad)
