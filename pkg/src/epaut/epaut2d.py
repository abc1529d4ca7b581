"""Incompressible flow with internal charges on the flat 2D torus.

Pseudospectral solver for the vorticity / charge-density system

    d varpi / dt = -{varpi, psi} - sum_i {sigma_i, nu_i}
    d sigma / dt = -{sigma, psi} - ad*_nu sigma

with varpi = -Lap psi, u = (d_y psi, -d_x psi), {f, g} = f_x g_y - f_y g_x,
and nu = gamma^-1 (-Lap)^-1 sigma under the default quadratic Lagrangian
(energy = half integral of psi varpi plus half integral of nu.sigma).
sigma = 0 is 2D Euler vorticity advection; the abelian one-component case is
the low-beta reduced-MHD family.

Both fields live in the zero-mean sector (constants are annihilated by the
dual pairing); harmonic one-forms on the torus are gauged away and the
solver never leaves this sector.  Dealiasing is the 2/3 rule, stepping RK4
with a CFL guard.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .lie import LieAlgebraSpec
from . import lie

__all__ = [
    "Grid2D",
    "FieldState2D",
    "MaterialLoop",
    "Solver2DError",
    "CFLViolation2D",
    "stream",
    "velocity",
    "poisson_bracket",
    "spectral_gradient",
    "dealias2",
    "nu_field",
    "rhs",
    "energy",
    "enstrophy",
    "total_vorticity",
    "casimirs",
    "step_rk4",
    "run",
    "interp_field",
    "circulation",
    "advect_loop",
    "shear_layer",
    "dipole",
    "random_band_limited",
]

MEAN_TOL = 1e-12


class Solver2DError(ValueError):
    pass


class CFLViolation2D(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid2D:
    Lx: float
    Ly: float
    Nx: int
    Ny: int

    def __post_init__(self):
        if self.Nx < 8 or self.Ny < 8:
            raise Solver2DError("Nx, Ny must be at least 8")
        if self.Lx <= 0 or self.Ly <= 0:
            raise Solver2DError("Lx, Ly must be positive")

    @property
    def dx(self) -> float:
        return self.Lx / self.Nx

    @property
    def dy(self) -> float:
        return self.Ly / self.Ny

    @property
    def cell(self) -> float:
        return self.dx * self.dy

    def x(self) -> np.ndarray:
        return np.arange(self.Nx) * self.dx

    def y(self) -> np.ndarray:
        return np.arange(self.Ny) * self.dy

    def mesh(self):
        return np.meshgrid(self.x(), self.y(), indexing="ij")

    def kx(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Nx, d=self.dx)

    def ky(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Ny, d=self.dy)

    def kmesh(self):
        return np.meshgrid(self.kx(), self.ky(), indexing="ij")


def _check_field(grid: Grid2D, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[-2:] != (grid.Nx, grid.Ny):
        raise Solver2DError(f"field shape {f.shape} incompatible with grid "
                            f"({grid.Nx}, {grid.Ny})")
    return f


@dataclass(frozen=True)
class FieldState2D:
    grid: Grid2D
    varpi: np.ndarray            # (Nx, Ny), zero mean
    sigma: np.ndarray            # (dim, Nx, Ny), each component zero mean
    spec: LieAlgebraSpec

    def __post_init__(self):
        w = _check_field(self.grid, self.varpi)
        s = np.asarray(self.sigma, dtype=float)
        if s.ndim == 2:
            s = s[None]
        if s.shape != (self.spec.dim, self.grid.Nx, self.grid.Ny):
            raise Solver2DError(f"sigma shape {s.shape}")
        if abs(np.mean(w)) > MEAN_TOL or np.max(np.abs(np.mean(s, axis=(1, 2)))) > MEAN_TOL:
            raise Solver2DError("fields must have zero mean (quotient-dual sector)")
        object.__setattr__(self, "varpi", w)
        object.__setattr__(self, "sigma", s)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.varpi)) and np.all(np.isfinite(self.sigma)))


def zero_mean(f: np.ndarray) -> np.ndarray:
    """Project onto the zero-mean sector (over the last two axes)."""
    return f - np.mean(f, axis=(-2, -1), keepdims=True)


# ---------------------------------------------------------------------------
# spectral operators

def _inv_laplacian(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """(-Lap)^-1 with the zero mode gauged to zero."""
    KX, KY = grid.kmesh()
    k2 = KX ** 2 + KY ** 2
    k2[0, 0] = 1.0
    fh = np.fft.fft2(f, axes=(-2, -1)) / k2
    fh[..., 0, 0] = 0.0
    return np.real(np.fft.ifft2(fh, axes=(-2, -1)))


def stream(grid: Grid2D, varpi: np.ndarray) -> np.ndarray:
    """Stream function psi = (-Lap)^-1 varpi, zero-mean gauge."""
    varpi = _check_field(grid, varpi)
    if np.max(np.abs(np.mean(varpi, axis=(-2, -1)))) > 1e-10:
        raise Solver2DError("stream requires zero-mean vorticity")
    return _inv_laplacian(grid, varpi)


def spectral_gradient(grid: Grid2D, f: np.ndarray):
    fh = np.fft.fft2(_check_field(grid, f), axes=(-2, -1))
    KX, KY = grid.kmesh()
    fx = np.real(np.fft.ifft2(1j * KX * fh, axes=(-2, -1)))
    fy = np.real(np.fft.ifft2(1j * KY * fh, axes=(-2, -1)))
    return fx, fy


def velocity(grid: Grid2D, psi: np.ndarray):
    """u = (d_y psi, -d_x psi): divergence-free, scalar curl(u) = -Lap psi."""
    px, py = spectral_gradient(grid, psi)
    return py, -px


def dealias2(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """2/3-rule dealiasing in both directions."""
    fh = np.fft.fft2(_check_field(grid, f), axes=(-2, -1))
    mx = np.abs(np.fft.fftfreq(grid.Nx) * grid.Nx) > grid.Nx / 3.0
    my = np.abs(np.fft.fftfreq(grid.Ny) * grid.Ny) > grid.Ny / 3.0
    fh[..., mx, :] = 0.0
    fh[..., :, my] = 0.0
    return np.real(np.fft.ifft2(fh, axes=(-2, -1)))


def poisson_bracket(grid: Grid2D, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """{f, g} = f_x g_y - f_y g_x, spectral derivatives, dealiased product."""
    fx, fy = spectral_gradient(grid, f)
    gx, gy = spectral_gradient(grid, g)
    return dealias2(grid, fx * gy - fy * gx)


# ---------------------------------------------------------------------------
# dynamics

def nu_field(state: FieldState2D) -> np.ndarray:
    """nu = gamma^-1 (-Lap)^-1 sigma, componentwise."""
    pot = _inv_laplacian(state.grid, state.sigma)
    return np.einsum("ab,bxy->axy", state.spec.gamma_inv, pot)


def rhs(state: FieldState2D) -> FieldState2D:
    g = state.grid
    psi = stream(g, state.varpi)
    nu = nu_field(state)
    wdot = -poisson_bracket(g, state.varpi, psi)
    for a in range(state.spec.dim):
        wdot -= poisson_bracket(g, state.sigma[a], nu[a])
    sdot = np.stack([-poisson_bracket(g, state.sigma[a], psi)
                     for a in range(state.spec.dim)])
    adterm = np.einsum("ijk,ixy,kxy->jxy", state.spec.structure_constants,
                       nu, state.sigma)
    sdot -= dealias2(g, adterm)
    # zero modes are conserved analytically; pin them against round-off
    return replace(state, varpi=zero_mean(wdot), sigma=zero_mean(sdot))


def energy(state: FieldState2D) -> float:
    g = state.grid
    psi = stream(g, state.varpi)
    nu = nu_field(state)
    e = 0.5 * np.sum(psi * state.varpi) + 0.5 * np.einsum(
        "axy,axy->", nu, state.sigma)
    return float(e * g.cell)


def enstrophy(state: FieldState2D) -> float:
    return float(0.5 * np.sum(state.varpi ** 2) * state.grid.cell)


def total_vorticity(state: FieldState2D) -> float:
    return float(np.sum(state.varpi) * state.grid.cell)


def casimirs(state: FieldState2D) -> dict:
    g = state.grid
    out = {
        "total_vorticity": total_vorticity(state),
        "total_charge": np.sum(state.sigma, axis=(1, 2)) * g.cell,
        "enstrophy": enstrophy(state),
    }
    if state.spec.dim == 1:
        out["sigma2"] = float(np.sum(state.sigma[0] ** 2) * g.cell)
    else:
        out["sigma2"] = float(np.einsum("axy,ab,bxy->", state.sigma,
                                        state.spec.gamma_inv, state.sigma) * g.cell)
    return out


def step_rk4(state: FieldState2D, dt: float) -> FieldState2D:
    k1 = rhs(state)
    k2 = rhs(_axpy(state, dt / 2, k1))
    k3 = rhs(_axpy(state, dt / 2, k2))
    k4 = rhs(_axpy(state, dt, k3))
    out = state
    for a, k in ((dt / 6, k1), (dt / 3, k2), (dt / 3, k3), (dt / 6, k4)):
        out = _axpy(out, a, k)
    return out


def _axpy(s: FieldState2D, a: float, d: FieldState2D) -> FieldState2D:
    return replace(s, varpi=s.varpi + a * d.varpi, sigma=s.sigma + a * d.sigma)


def run(state: FieldState2D, dt: float, T: float,
        observers: Optional[dict] = None, stride: int = 1, cfl: float = 0.5,
        loop: Optional["MaterialLoop"] = None):
    """RK4 stepping with CFL guard; optionally co-advects a material loop."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    nsteps = int(round(T / dt))
    observers = observers or {}
    g = state.grid
    times = [0.0]
    states = [state]
    obs = {name: [fn(state)] for name, fn in observers.items()}
    loops = [loop] if loop is not None else None
    s = state
    for i in range(nsteps):
        u1, u2 = velocity(g, stream(g, s.varpi))
        umax = max(np.max(np.abs(u1)), np.max(np.abs(u2)))
        if umax > 0 and dt > cfl * min(g.dx, g.dy) / umax:
            raise CFLViolation2D(
                f"dt = {dt:g} exceeds the CFL bound at t = {i * dt:g}")
        if loop is not None:
            s_half = step_rk4(s, dt / 2)
            s_next = step_rk4(s_half, dt / 2)
            loop = advect_loop(s, s_half, s_next, loop, dt)
            s = s_next
        else:
            s = step_rk4(s, dt)
        if not s.is_finite():
            raise CFLViolation2D(f"non-finite fields at t = {(i + 1) * dt:g}")
        if (i + 1) % stride == 0 or i == nsteps - 1:
            times.append((i + 1) * dt)
            states.append(s)
            for name, fn in observers.items():
                obs[name].append(fn(s))
            if loop is not None:
                loops.append(loop)
    out = {"times": np.asarray(times), "states": states, "observations": obs}
    if loops is not None:
        out["loops"] = loops
    return out


# ---------------------------------------------------------------------------
# material loops and circulation

@dataclass(frozen=True)
class MaterialLoop:
    """Closed polyline of markers (M, 2); the closing edge back to the first
    marker is implicit."""
    markers: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.markers, dtype=float)
        if m.ndim != 2 or m.shape[1] != 2 or m.shape[0] < 32:
            raise Solver2DError("loop needs at least 32 markers of shape (M, 2)")
        object.__setattr__(self, "markers", m)


def rectangle_loop(x0: float, y0: float, x1: float, y1: float, n_per_side: int = 32) -> MaterialLoop:
    t = np.linspace(0.0, 1.0, n_per_side, endpoint=False)
    bottom = np.column_stack([x0 + (x1 - x0) * t, np.full_like(t, y0)])
    right = np.column_stack([np.full_like(t, x1), y0 + (y1 - y0) * t])
    top = np.column_stack([x1 - (x1 - x0) * t, np.full_like(t, y1)])
    left = np.column_stack([np.full_like(t, x0), y1 - (y1 - y0) * t])
    return MaterialLoop(np.vstack([bottom, right, top, left]))


def interp_field(grid: Grid2D, f: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Bicubic periodic interpolation of a scalar field at points (M, 2)."""
    from scipy.interpolate import RectBivariateSpline
    pad = 4
    ix = np.r_[np.arange(grid.Nx), np.arange(pad)]
    iy = np.r_[np.arange(grid.Ny), np.arange(pad)]
    xs = np.r_[grid.x(), grid.Lx + np.arange(pad) * grid.dx]
    ys = np.r_[grid.y(), grid.Ly + np.arange(pad) * grid.dy]
    sp = RectBivariateSpline(xs, ys, f[np.ix_(ix, iy)], kx=3, ky=3)
    px = np.mod(pts[:, 0], grid.Lx)
    py = np.mod(pts[:, 1], grid.Ly)
    return sp.ev(px, py)


def circulation(state: FieldState2D, loop: MaterialLoop) -> float:
    """Loop integral of u . dl along the closed polyline (trapezoid in arc)."""
    g = state.grid
    u1f, u2f = velocity(g, stream(g, state.varpi))
    m = loop.markers
    mc = np.vstack([m, m[:1]])
    u1 = interp_field(g, u1f, mc)
    u2 = interp_field(g, u2f, mc)
    d = np.diff(mc, axis=0)
    # wrap displacements for loops crossing the periodic seam
    d[:, 0] = np.mod(d[:, 0] + g.Lx / 2, g.Lx) - g.Lx / 2
    d[:, 1] = np.mod(d[:, 1] + g.Ly / 2, g.Ly) - g.Ly / 2
    um = 0.5 * np.column_stack([u1[:-1] + u1[1:], u2[:-1] + u2[1:]])
    return float(np.sum(um * d))


def advect_loop(s0: FieldState2D, s_half: FieldState2D, s_full: FieldState2D,
                loop: MaterialLoop, dt: float) -> MaterialLoop:
    """RK4 marker advection using the field states at the stage times."""
    g = s0.grid

    def vel_at(s: FieldState2D, pts):
        u1f, u2f = velocity(g, stream(g, s.varpi))
        return np.column_stack([interp_field(g, u1f, pts),
                                interp_field(g, u2f, pts)])

    m = loop.markers
    k1 = vel_at(s0, m)
    k2 = vel_at(s_half, m + dt / 2 * k1)
    k3 = vel_at(s_half, m + dt / 2 * k2)
    k4 = vel_at(s_full, m + dt * k3)
    new = m + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    new[:, 0] = np.mod(new[:, 0], g.Lx)
    new[:, 1] = np.mod(new[:, 1], g.Ly)
    return MaterialLoop(new)


# ---------------------------------------------------------------------------
# initial-data presets

def shear_layer(grid: Grid2D, thickness: float = 0.2, perturb: float = 0.05) -> np.ndarray:
    """Double shear layer vorticity (zero mean)."""
    X, Y = grid.mesh()
    w = (1.0 / np.cosh((Y - grid.Ly / 4) / thickness) ** 2
         - 1.0 / np.cosh((Y - 3 * grid.Ly / 4) / thickness) ** 2)
    w += perturb * np.cos(2 * np.pi * X / grid.Lx)
    return zero_mean(w)


def dipole(grid: Grid2D, separation: float = 1.0, radius: float = 0.5) -> np.ndarray:
    """Opposite-signed Gaussian vortex pair (zero mean)."""
    X, Y = grid.mesh()

    def blob(x0, y0, s):
        dx = np.mod(X - x0 + grid.Lx / 2, grid.Lx) - grid.Lx / 2
        dy = np.mod(Y - y0 + grid.Ly / 2, grid.Ly) - grid.Ly / 2
        return s * np.exp(-(dx ** 2 + dy ** 2) / (2 * radius ** 2))

    w = blob(grid.Lx / 2, grid.Ly / 2 + separation / 2, 1.0) \
        + blob(grid.Lx / 2, grid.Ly / 2 - separation / 2, -1.0)
    return zero_mean(w)


def random_band_limited(grid: Grid2D, kmax: int = 6, amplitude: float = 1.0,
                        seed: int = 0) -> np.ndarray:
    """Random real field supported on 1 <= |k| <= kmax, zero mean."""
    rng = np.random.default_rng(seed)
    fh = np.zeros((grid.Nx, grid.Ny), dtype=complex)
    KX, KY = np.meshgrid(np.fft.fftfreq(grid.Nx) * grid.Nx,
                         np.fft.fftfreq(grid.Ny) * grid.Ny, indexing="ij")
    band = (KX ** 2 + KY ** 2 <= kmax ** 2) & (KX ** 2 + KY ** 2 > 0)
    fh[band] = rng.normal(size=band.sum()) + 1j * rng.normal(size=band.sum())
    f = np.real(np.fft.ifft2(fh))
    f *= amplitude / max(np.max(np.abs(f)), 1e-300)
    return zero_mean(f)
