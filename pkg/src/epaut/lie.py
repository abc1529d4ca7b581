"""Finite-dimensional Lie algebra/group kernel.

Everything downstream (peakon charges, 1D/2D field solvers, Clebsch maps)
works against a LieAlgebraSpec: structure constants, an inner product gamma
on the algebra, and a faithful matrix representation used for group elements
and exponentials.  The dual space is identified with the algebra
coefficient-wise via the dual basis; gamma only enters kinetic-energy terms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "LieAlgebraSpec",
    "LieValidationError",
    "abelian",
    "so3",
    "load_spec",
    "bracket",
    "ad_star",
    "Ad",
    "Ad_star",
    "group_exp",
    "validate",
]

# Tolerance for "is this matrix in the span of the representation basis".
REP_TOL = 1e-9


class LieValidationError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Structure constants c[i,j,k] ([e_i,e_j] = c[i,j,k] e_k), inner product
    gamma, and matrix representation e_i -> rep_basis[i]."""

    dim: int
    structure_constants: np.ndarray  # (dim, dim, dim)
    gamma: np.ndarray                # (dim, dim), SPD
    rep_dim: int
    rep_basis: np.ndarray            # (dim, rep_dim, rep_dim)
    ad_invariant: bool = False
    name: str = "custom"
    # pseudo-inverse of the flattened rep basis, for expanding matrices back
    # into algebra coefficients
    _rep_pinv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        g = np.asarray(self.gamma, dtype=float)
        B = np.asarray(self.rep_basis, dtype=float)
        if c.shape != (self.dim,) * 3:
            raise LieValidationError(f"structure constants shape {c.shape}")
        if g.shape != (self.dim, self.dim):
            raise LieValidationError(f"gamma shape {g.shape}")
        if B.shape != (self.dim, self.rep_dim, self.rep_dim):
            raise LieValidationError(f"rep basis shape {B.shape}")
        object.__setattr__(self, "structure_constants", c)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "rep_basis", B)
        flat = B.reshape(self.dim, self.rep_dim ** 2)
        object.__setattr__(self, "_rep_pinv", np.linalg.pinv(flat))

    @property
    def gamma_inv(self) -> np.ndarray:
        return np.linalg.inv(self.gamma)

    def hat(self, xi: np.ndarray) -> np.ndarray:
        """Coefficients -> representation matrix."""
        xi = np.asarray(xi, dtype=float)
        return np.tensordot(xi, self.rep_basis, axes=(-1, 0))

    def unhat(self, X: np.ndarray) -> np.ndarray:
        """Representation matrix -> coefficients (checks span membership)."""
        X = np.asarray(X, dtype=float)
        coeffs = self._rep_pinv.T @ X.reshape(self.rep_dim ** 2)
        resid = np.max(np.abs(self.hat(coeffs) - X))
        scale = max(1.0, np.max(np.abs(X)))
        if resid > REP_TOL * scale:
            raise LieValidationError(
                f"matrix not in span of rep basis (residual {resid:.2e})")
        return coeffs

    def identity(self) -> np.ndarray:
        return np.eye(self.rep_dim)


def _check_dim(spec: LieAlgebraSpec, *vecs: np.ndarray):
    for v in vecs:
        v = np.asarray(v)
        if v.shape[-1] != spec.dim:
            raise LieValidationError(
                f"element of size {v.shape[-1]} does not match dim {spec.dim}")


def bracket(spec: LieAlgebraSpec, xi, eta) -> np.ndarray:
    """[xi, eta] in coefficients.  Supports leading batch axes."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    _check_dim(spec, xi, eta)
    return np.einsum("ijk,...i,...j->...k", spec.structure_constants, xi, eta)


def ad_star(spec: LieAlgebraSpec, xi, mu) -> np.ndarray:
    """ad*_xi mu, defined by <ad*_xi mu, eta> = <mu, [xi, eta]>."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _check_dim(spec, xi, mu)
    return np.einsum("ijk,...i,...k->...j", spec.structure_constants, xi, mu)


def Ad(spec: LieAlgebraSpec, g: np.ndarray, xi) -> np.ndarray:
    """Adjoint action g xi g^-1, re-expressed in the basis."""
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g)) < 1e-14:
        raise LieValidationError("singular group element")
    X = spec.hat(xi)
    return spec.unhat(g @ X @ np.linalg.inv(g))


def Ad_matrix(spec: LieAlgebraSpec, g: np.ndarray) -> np.ndarray:
    """Matrix of Ad_g in the chosen basis (columns are Ad_g e_i)."""
    cols = [Ad(spec, g, np.eye(spec.dim)[i]) for i in range(spec.dim)]
    return np.stack(cols, axis=1)


def Ad_star(spec: LieAlgebraSpec, g: np.ndarray, mu) -> np.ndarray:
    """<Ad*_g mu, xi> = <mu, Ad_g xi>."""
    mu = np.asarray(mu, dtype=float)
    _check_dim(spec, mu)
    return Ad_matrix(spec, g).T @ mu


def group_exp(spec: LieAlgebraSpec, xi) -> np.ndarray:
    """Matrix exponential of hat(xi)."""
    xi = np.asarray(xi, dtype=float)
    _check_dim(spec, xi)
    if not np.all(np.isfinite(xi)):
        raise LieValidationError("non-finite algebra element")
    return scipy.linalg.expm(spec.hat(xi))


def validate(spec: LieAlgebraSpec, tol: float = 1e-12):
    """Assert antisymmetry, Jacobi, gamma SPD, rep-basis consistency and
    (if flagged) Ad-invariance of gamma.  Raises LieValidationError."""
    c = spec.structure_constants
    anti = np.max(np.abs(c + np.swapaxes(c, 0, 1)))
    if anti > tol:
        raise LieValidationError(f"antisymmetry residual {anti:.2e}")
    jac = np.einsum("ijm,mkl->ijkl", c, c)
    jacobi = jac + np.einsum("jkm,mil->ijkl", c, c) + np.einsum("kim,mjl->ijkl", c, c)
    jr = np.max(np.abs(jacobi))
    if jr > tol:
        raise LieValidationError(f"Jacobi residual {jr:.2e}")
    g = spec.gamma
    if np.max(np.abs(g - g.T)) > tol:
        raise LieValidationError("gamma not symmetric")
    if np.min(np.linalg.eigvalsh(g)) <= 0:
        raise LieValidationError("gamma not positive definite")
    # commutators of the rep basis realize the structure constants
    B = spec.rep_basis
    comm = np.einsum("iab,jbc->ijac", B, B) - np.einsum("jab,ibc->ijac", B, B)
    target = np.einsum("ijk,kab->ijab", c, B)
    cr = np.max(np.abs(comm - target))
    if cr > tol:
        raise LieValidationError(f"rep commutator residual {cr:.2e}")
    if spec.ad_invariant:
        # gamma([xi,zeta],eta) + gamma(zeta,[xi,eta]) = 0 on basis triples
        t = np.einsum("izm,me->ize", c, g) + np.einsum("iem,zm->ize", c, g)
        ar = np.max(np.abs(t))
        if ar > tol:
            raise LieValidationError(f"Ad-invariance residual {ar:.2e}")


# ---------------------------------------------------------------------------
# built-in specs

def abelian(k: int = 1) -> LieAlgebraSpec:
    """Abelian algebra of dimension k, represented by diagonal matrix units."""
    c = np.zeros((k, k, k))
    B = np.zeros((k, k, k))
    for i in range(k):
        B[i, i, i] = 1.0
    return LieAlgebraSpec(dim=k, structure_constants=c, gamma=np.eye(k),
                          rep_dim=k, rep_basis=B, ad_invariant=True,
                          name=f"abelian({k})")


def so3() -> LieAlgebraSpec:
    """so(3) with the epsilon_ijk structure constants and the standard
    antisymmetric generators."""
    c = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                c[i, j, k] = _levi_civita(i, j, k)
    B = np.zeros((3, 3, 3))
    for i in range(3):
        for a in range(3):
            for b in range(3):
                B[i, a, b] = -_levi_civita(i, a, b)
    return LieAlgebraSpec(dim=3, structure_constants=c, gamma=np.eye(3),
                          rep_dim=3, rep_basis=B, ad_invariant=True, name="so3")


def _levi_civita(i, j, k) -> float:
    return float((i - j) * (j - k) * (k - i)) / 2.0


def load_spec(path) -> LieAlgebraSpec:
    """Load a LieAlgebraSpec from a JSON file.

    Schema: {"dim": int, "structure_constants": nested [dim][dim][dim],
    "gamma": [dim][dim], "rep_dim": int, "rep_basis": [dim][rep][rep],
    "ad_invariant": bool (optional), "name": str (optional)}.
    """
    with open(path) as fh:
        data = json.load(fh)
    required = {"dim", "structure_constants", "gamma", "rep_dim", "rep_basis"}
    missing = required - data.keys()
    if missing:
        raise LieValidationError(f"missing keys: {sorted(missing)}")
    spec = LieAlgebraSpec(
        dim=int(data["dim"]),
        structure_constants=np.asarray(data["structure_constants"], dtype=float),
        gamma=np.asarray(data["gamma"], dtype=float),
        rep_dim=int(data["rep_dim"]),
        rep_basis=np.asarray(data["rep_basis"], dtype=float),
        ad_invariant=bool(data.get("ad_invariant", False)),
        name=str(data.get("name", "custom")),
    )
    validate(spec)
    return spec
