"""Charged-peakon particle dynamics.

N point particles carry positions Q, momenta P and internal charges mu in
the dual of the order-parameter algebra.  Their collective Hamiltonian is
the double sum

    H = 1/2 sum_ij G1(|Qi-Qj|) (Pi - mu_i.A(Qi)) . (Pj - mu_j.A(Qj))
      + 1/2 sum_ij G2(|Qi-Qj|) <mu_i, gamma^-1 mu_j>

and the evolution is canonical in (Q, P) with Lie-Poisson charge dynamics
mu_i' = -ad*_{dH/dmu_i} mu_i.  Optionally group elements theta_i are
reconstructed along the flow, giving the conserved body-frame charges
Ad*_theta mu.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import lie
from .kernels import Kernel
from .lie import LieAlgebraSpec

__all__ = [
    "ParticleState",
    "MagneticPotential",
    "IntegrationBlowup",
    "zero_potential",
    "constant_potential",
    "collective_hamiltonian",
    "hamiltonian_gradients",
    "rhs",
    "step_rk4",
    "run",
    "noether_charges",
    "j_left_pair",
    "reduced_bracket",
    "write_trajectory_csv",
]


class IntegrationBlowup(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"non-finite values at t = {t:.6g}")
        self.t = t


@dataclass(frozen=True)
class ParticleState:
    Q: np.ndarray                     # (N, n)
    P: np.ndarray                     # (N, n)
    mu: np.ndarray                    # (N, dim)
    theta: Optional[np.ndarray] = None  # (N, rep_dim, rep_dim)

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        mu = np.atleast_2d(np.asarray(self.mu, dtype=float))
        if Q.shape != P.shape or Q.shape[0] != mu.shape[0]:
            raise ValueError(f"inconsistent shapes Q{Q.shape} P{P.shape} mu{mu.shape}")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "mu", mu)
        if self.theta is not None:
            th = np.asarray(self.theta, dtype=float)
            if th.ndim != 3 or th.shape[0] != Q.shape[0]:
                raise ValueError(f"theta shape {th.shape}")
            object.__setattr__(self, "theta", th)

    @property
    def N(self) -> int:
        return self.Q.shape[0]

    @property
    def n(self) -> int:
        return self.Q.shape[1]

    def is_finite(self) -> bool:
        ok = np.all(np.isfinite(self.Q)) and np.all(np.isfinite(self.P)) \
            and np.all(np.isfinite(self.mu))
        if self.theta is not None:
            ok = ok and np.all(np.isfinite(self.theta))
        return bool(ok)


@dataclass(frozen=True)
class MagneticPotential:
    """o-valued one-form A on R^n: A(x) is (n, dim), dA(x)[a, b, alpha] is
    the partial of A_{b,alpha} with respect to x_a."""

    A: Callable[[np.ndarray], np.ndarray]
    dA: Callable[[np.ndarray], np.ndarray]
    descriptor: str = ""

    def check_gradient(self, points: np.ndarray, h: float = 1e-6, rtol: float = 1e-6):
        for x in np.atleast_2d(points):
            num = np.stack([
                (self.A(x + h * e) - self.A(x - h * e)) / (2 * h)
                for e in np.eye(len(x))
            ])
            ana = self.dA(x)
            scale = max(1.0, np.max(np.abs(num)))
            if np.max(np.abs(num - ana)) > rtol * scale:
                raise ValueError("potential gradient does not match central differences")


def zero_potential(n: int, dim: int) -> MagneticPotential:
    return MagneticPotential(
        A=lambda x: np.zeros((n, dim)),
        dA=lambda x: np.zeros((n, n, dim)),
        descriptor="zero",
    )


def constant_potential(A0: np.ndarray) -> MagneticPotential:
    A0 = np.asarray(A0, dtype=float)
    n, dim = A0.shape
    return MagneticPotential(
        A=lambda x: A0,
        dA=lambda x: np.zeros((n, n, dim)),
        descriptor="constant",
    )


def _pairwise_r(Q: np.ndarray):
    diff = Q[:, None, :] - Q[None, :, :]          # (N, N, n)
    r = np.sqrt(np.sum(diff ** 2, axis=-1))       # (N, N)
    return diff, r


def _unit(diff, r):
    # direction Q_i - Q_j; zero at coincident points (grad(0) = 0 convention)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = diff / r[..., None]
    u[r == 0] = 0.0
    return u


def _effective_momentum(state: ParticleState, A: MagneticPotential):
    """pi_i = P_i - mu_i . A(Q_i)."""
    shift = np.stack([state.mu[i] @ A.A(state.Q[i]).T for i in range(state.N)])
    return state.P - shift


def collective_hamiltonian(state: ParticleState, kernel1: Kernel, kernel2: Kernel,
                           A: MagneticPotential, spec: LieAlgebraSpec) -> float:
    _, r = _pairwise_r(state.Q)
    G1 = kernel1.value(r)
    G2 = kernel2.value(r)
    pi = _effective_momentum(state, A)
    ginv = spec.gamma_inv
    h1 = 0.5 * np.einsum("ij,ia,ja->", G1, pi, pi)
    h2 = 0.5 * np.einsum("ij,ia,ab,jb->", G2, state.mu, ginv, state.mu)
    return float(h1 + h2)


def hamiltonian_gradients(state: ParticleState, kernel1: Kernel, kernel2: Kernel,
                          A: MagneticPotential, spec: LieAlgebraSpec):
    """Analytic partials (dH/dQ, dH/dP, dH/dmu)."""
    diff, r = _pairwise_r(state.Q)
    rhat = _unit(diff, r)
    G1, G2 = kernel1.value(r), kernel2.value(r)
    dG1, dG2 = kernel1.grad(r), kernel2.grad(r)
    pi = _effective_momentum(state, A)
    ginv = spec.gamma_inv
    mug = state.mu @ ginv                          # (N, dim)

    dP = np.einsum("ij,ja->ia", G1, pi)

    pipj = np.einsum("ia,ja->ij", pi, pi)
    mumu = np.einsum("ia,ja->ij", mug, state.mu)
    # kernel-shape part of dH/dQ; grad(0) = 0 kills the i = j diagonal
    dQ = np.einsum("ij,ija,ij->ia", dG1, rhat, pipj) \
        + np.einsum("ij,ija,ij->ia", dG2, rhat, mumu)
    # A(Q)-dependence of the effective momenta
    for i in range(state.N):
        dAi = A.dA(state.Q[i])                     # (n, n, dim)
        # d pi_i_b / d Q_i_a = - mu_i_alpha dA[a, b, alpha]
        dpi = -np.einsum("abm,m->ab", dAi, state.mu[i])
        dQ[i] += dpi @ dP[i]

    dmu = np.einsum("ij,jb,ba->ia", G2, state.mu, ginv.T)
    for i in range(state.N):
        Ai = A.A(state.Q[i])                       # (n, dim)
        dmu[i] += -np.einsum("bm,b->m", Ai, dP[i])
    return dQ, dP, dmu


def rhs(state: ParticleState, kernel1: Kernel, kernel2: Kernel,
        A: MagneticPotential, spec: LieAlgebraSpec) -> ParticleState:
    """Time derivative (dQ, dP, dmu, dtheta).

    Charges evolve by mu' = -ad*_zeta mu with zeta = dH/dmu; reconstruction
    uses theta' = zeta theta (spatial frame), which transports the Noether
    charge Ad*_theta mu invariantly.
    """
    dQ, dP, dmu = hamiltonian_gradients(state, kernel1, kernel2, A, spec)
    zeta = dmu
    mudot = -lie.ad_star(spec, zeta, state.mu)
    thetadot = None
    if state.theta is not None:
        thetadot = np.stack([spec.hat(zeta[i]) @ state.theta[i] for i in range(state.N)])
    return ParticleState(Q=dP, P=-dQ, mu=mudot, theta=thetadot)


def _axpy(state: ParticleState, a: float, d: ParticleState) -> ParticleState:
    theta = None
    if state.theta is not None:
        theta = state.theta + a * d.theta
    return ParticleState(Q=state.Q + a * d.Q, P=state.P + a * d.P,
                         mu=state.mu + a * d.mu, theta=theta)


def step_rk4(state: ParticleState, dt: float, kernel1: Kernel, kernel2: Kernel,
             A: MagneticPotential, spec: LieAlgebraSpec) -> ParticleState:
    f = lambda s: rhs(s, kernel1, kernel2, A, spec)
    k1 = f(state)
    k2 = f(_axpy(state, dt / 2, k1))
    k3 = f(_axpy(state, dt / 2, k2))
    k4 = f(_axpy(state, dt, k3))
    out = state
    for a, k in ((dt / 6, k1), (dt / 3, k2), (dt / 3, k3), (dt / 6, k4)):
        out = _axpy(out, a, k)
    return out


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: Sequence[ParticleState]
    observations: dict


def run(state: ParticleState, dt: float, T: float, kernel1: Kernel, kernel2: Kernel,
        A: MagneticPotential, spec: LieAlgebraSpec,
        observers: Optional[dict] = None, stride: int = 1) -> Trajectory:
    """Integrate with RK4, sampling the state and observers every `stride` steps."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not state.is_finite():
        raise IntegrationBlowup(0.0)
    nsteps = int(round(T / dt))
    observers = observers or {}
    times = [0.0]
    states = [state]
    obs = {name: [fn(state)] for name, fn in observers.items()}
    s = state
    for i in range(nsteps):
        s = step_rk4(s, dt, kernel1, kernel2, A, spec)
        if not s.is_finite():
            raise IntegrationBlowup((i + 1) * dt)
        if (i + 1) % stride == 0 or i == nsteps - 1:
            times.append((i + 1) * dt)
            states.append(s)
            for name, fn in observers.items():
                obs[name].append(fn(s))
    return Trajectory(times=np.asarray(times), states=states, observations=obs)


def noether_charges(state: ParticleState, spec: LieAlgebraSpec) -> np.ndarray:
    """Body-frame charges c_i = Ad*_{theta_i} mu_i; constant along exact flows."""
    if state.theta is None:
        raise ValueError("state has no reconstructed group elements")
    return np.stack([lie.Ad_star(spec, state.theta[i], state.mu[i])
                     for i in range(state.N)])


def j_left_pair(state: ParticleState, w: Callable, xi: Callable) -> float:
    """<J_L(state), (w, xi)> = sum_i P_i . w(Q_i) + sum_i <mu_i, xi(Q_i)>."""
    total = 0.0
    for i in range(state.N):
        total += float(np.dot(state.P[i], w(state.Q[i])))
        total += float(np.dot(state.mu[i], xi(state.Q[i])))
    return total


def j_left_pair_shifted(state: ParticleState, w: Callable, xi: Callable,
                        A: MagneticPotential) -> float:
    """Connection-shifted variant: P_i replaced by P_i - mu_i . A(Q_i)."""
    pi = _effective_momentum(state, A)
    total = 0.0
    for i in range(state.N):
        total += float(np.dot(pi[i], w(state.Q[i])))
        total += float(np.dot(state.mu[i], xi(state.Q[i])))
    return total


def reduced_bracket(gradF, gradG, state: ParticleState, spec: LieAlgebraSpec) -> float:
    """Canonical (Q, P) bracket plus the Lie-Poisson term
    sum_i <mu_i, [dF/dmu_i, dG/dmu_i]>.

    gradF / gradG are callables state -> (dQ, dP, dmu).
    """
    FQ, FP, Fmu = (np.asarray(a, dtype=float) for a in gradF(state))
    GQ, GP, Gmu = (np.asarray(a, dtype=float) for a in gradG(state))
    canonical = float(np.sum(FQ * GP) - np.sum(FP * GQ))
    lp = float(np.sum(state.mu * lie.bracket(spec, Fmu, Gmu)))
    return canonical + lp


def write_trajectory_csv(path, traj: Trajectory, spec: LieAlgebraSpec,
                         energy: Optional[Sequence[float]] = None):
    """One row per sample: t, Q, P, mu, H (if given), Noether charges (if theta)."""
    s0 = traj.states[0]
    header = ["t"]
    for i in range(s0.N):
        header += [f"Q{i+1}_{a+1}" for a in range(s0.n)]
    for i in range(s0.N):
        header += [f"P{i+1}_{a+1}" for a in range(s0.n)]
    for i in range(s0.N):
        header += [f"mu{i+1}_{a+1}" for a in range(s0.mu.shape[1])]
    if energy is not None:
        header.append("H")
    has_theta = s0.theta is not None
    if has_theta:
        for i in range(s0.N):
            header += [f"c{i+1}_{a+1}" for a in range(spec.dim)]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for idx, (t, s) in enumerate(zip(traj.times, traj.states)):
            row = [f"{t:.12g}"]
            row += [f"{v:.17g}" for v in s.Q.ravel()]
            row += [f"{v:.17g}" for v in s.P.ravel()]
            row += [f"{v:.17g}" for v in s.mu.ravel()]
            if energy is not None:
                row.append(f"{energy[idx]:.17g}")
            if has_theta:
                row += [f"{v:.17g}" for v in noether_charges(s, spec).ravel()]
            wr.writerow(row)
