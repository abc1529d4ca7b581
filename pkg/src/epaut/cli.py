"""Scenario-driven command line front end.

Scenarios are TOML files with a flat, typed schema (see parse_scenario);
`epaut run file.toml` dispatches to the owning solver module and writes CSV
time series, field snapshots, and optional SVG plots.  `epaut verify
[module]` runs reduced-scale property suites against the numbered
acceptance thresholds, and `epaut plot file.csv` renders a CSV into SVG.

All randomness is seeded from the scenario, outputs are written atomically
(temp file then rename), and repeated runs of the same scenario are
byte-identical.

Exit codes: 0 pass, 1 run failure, 2 validation failure, 3 threshold
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
import time
try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import clebsch as cb
from . import epaut1d as e1
from . import epaut2d as e2
from . import kernels as ker
from . import lie
from . import singular

__all__ = [
    "Scenario",
    "RunReport",
    "ScenarioValidationError",
    "parse_scenario",
    "run_scenario",
    "verify",
    "plot_csv",
    "main",
]

KINDS = ("peakons", "ch2", "mch2", "euler2d", "rmhd2d", "clebsch-check", "verify")
FORMATS = ("csv", "svg")
GROUPS = ("abelian", "so3")


class ScenarioValidationError(ValueError):
    """Carries the aggregated list of schema problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    params: dict
    out_dir: str = "."
    stride: int = 1
    formats: tuple = ("csv",)
    seed: int = 0


@dataclass
class RunReport:
    scenario: str
    wall_time: float = 0.0
    summary: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)  # (id, description, value, threshold, ok)

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.checks)

    def add(self, cid: str, desc: str, value: float, threshold: float):
        self.checks.append((cid, desc, float(value), float(threshold),
                            bool(value < threshold)))

    def render(self) -> str:
        lines = [f"scenario: {self.scenario}",
                 f"wall time: {self.wall_time:.2f} s"]
        for k, v in self.summary.items():
            lines.append(f"  {k}: {v}")
        for cid, desc, value, threshold, ok in self.checks:
            mark = "PASS" if ok else "FAIL"
            lines.append(f"  [{mark}] {cid}: {desc} ({value:.3e} vs {threshold:.0e})")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# parsing / validation

_COMMON_KEYS = {"name", "kind", "seed", "output", "params"}
_OUTPUT_KEYS = {"directory", "stride", "formats"}

_PARAM_KEYS = {
    "peakons": {"N", "n", "alpha", "L", "dt", "T", "group", "kernel",
                "preset", "Q", "P", "mu"},
    "ch2": {"L", "N", "alpha1", "dt", "T", "group",
            "m_preset", "m_expression", "sigma_amplitude", "A_preset"},
    "mch2": {"L", "N", "alpha1", "alpha2", "dt", "T", "group",
             "m_preset", "m_expression", "sigma_amplitude", "A_preset"},
    "euler2d": {"N", "L", "dt", "T", "preset", "kmax", "amplitude"},
    "rmhd2d": {"N", "L", "dt", "T", "preset", "kmax", "amplitude", "charge"},
    "clebsch-check": {"N", "dt", "T", "seed_kind", "symmetries"},
    "verify": {"modules"},
}

_POSITIVE = {"alpha", "alpha1", "alpha2", "L", "dt", "T", "N", "n",
             "kmax", "amplitude", "charge"}


def _validate(data: dict, errors: list) -> Optional[Scenario]:
    unknown = set(data) - _COMMON_KEYS
    if unknown:
        errors.append(f"unknown top-level keys: {sorted(unknown)}")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: required non-empty string")
        name = "?"
    kind = data.get("kind")
    if kind not in KINDS:
        errors.append(f"kind: must be one of {KINDS}, got {kind!r}")
        return None
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        errors.append("seed: must be an integer")
        seed = 0
    out = data.get("output", {})
    if not isinstance(out, dict):
        errors.append("output: must be a table")
        out = {}
    unknown = set(out) - _OUTPUT_KEYS
    if unknown:
        errors.append(f"output: unknown keys {sorted(unknown)}")
    out_dir = out.get("directory", ".")
    stride = out.get("stride", 1)
    if not isinstance(stride, int) or stride < 1:
        errors.append("output.stride: must be a positive integer")
        stride = 1
    formats = tuple(out.get("formats", ["csv"]))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        errors.append(f"output.formats: unknown formats {bad}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        errors.append("params: must be a table")
        params = {}
    allowed = _PARAM_KEYS[kind]
    unknown = set(params) - allowed
    if unknown:
        errors.append(f"params: unknown keys for kind {kind}: {sorted(unknown)}")
    for key in _POSITIVE & set(params):
        v = params[key]
        if not isinstance(v, (int, float)) or v <= 0:
            errors.append(f"params.{key}: must be positive, got {v!r}")
    if "group" in params and params["group"] not in GROUPS:
        errors.append(f"params.group: must be one of {GROUPS}")
    if kind in ("ch2", "mch2") and "m_preset" in params and "m_expression" in params:
        errors.append("params: m_preset and m_expression conflict; give one")
    if kind == "peakons" and "preset" in params and "Q" in params:
        errors.append("params: preset and explicit Q conflict; give one")
    return Scenario(name=name, kind=kind, params=dict(params), out_dir=out_dir,
                    stride=stride, formats=formats, seed=seed)


def parse_scenario(path) -> Scenario:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    errors: list = []
    scenario = _validate(data, errors)
    if errors or scenario is None:
        raise ScenarioValidationError(errors)
    return scenario


def serialize_scenario(s: Scenario) -> dict:
    return {"name": s.name, "kind": s.kind, "seed": s.seed,
            "output": {"directory": s.out_dir, "stride": s.stride,
                       "formats": list(s.formats)},
            "params": dict(s.params)}


# ---------------------------------------------------------------------------
# atomic output helpers

def _atomic_write(path: str, payload: bytes):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    _atomic_write(path, buf.getvalue().encode())


def write_matrix_csv(path: str, M: np.ndarray):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(M):
        w.writerow([f"{v:.17g}" for v in row])
    _atomic_write(path, buf.getvalue().encode())


# ---------------------------------------------------------------------------
# scenario dispatch

def _spec_for(group: str) -> lie.LieAlgebraSpec:
    return lie.so3() if group == "so3" else lie.abelian(1)


def _run_peakons(s: Scenario, rep: RunReport):
    p = s.params
    group = p.get("group", "abelian")
    spec = _spec_for(group)
    n = int(p.get("n", 1))
    alpha = float(p.get("alpha", 1.0))
    L = float(p.get("L", 2 * np.pi))
    dt = float(p.get("dt", 1e-3))
    T = float(p.get("T", 10.0))
    preset = p.get("preset", "two_peakon")
    if "Q" in p:
        Q = np.asarray(p["Q"], dtype=float)
        P = np.asarray(p["P"], dtype=float)
        mu = np.asarray(p.get("mu", np.zeros((len(Q), spec.dim))), dtype=float)
    elif preset == "two_peakon":
        Q = np.zeros((2, n))
        Q[:, 0] = [L / 2 - 1.5, L / 2 + 1.5]
        P = np.zeros((2, n))
        P[:, 0] = [1.0, 0.3]
        mu = np.zeros((2, spec.dim))
    elif preset == "random":
        rng = np.random.default_rng(s.seed)
        N = int(p.get("N", 2))
        Q = rng.uniform(0, L, size=(N, n))
        P = rng.normal(size=(N, n)) * 0.5
        mu = rng.normal(size=(N, spec.dim)) * 0.3
    else:
        raise ValueError(f"unknown peakon preset {preset!r}")
    kernel_name = p.get("kernel", "helmholtz_periodic")
    if kernel_name == "helmholtz_periodic":
        k1 = ker.helmholtz_green_periodic(alpha, L)
    elif kernel_name == "helmholtz_line":
        k1 = ker.helmholtz_green_line(alpha)
    elif kernel_name == "gaussian":
        k1 = ker.gaussian_kernel(alpha)
    else:
        raise ValueError(f"unknown kernel {kernel_name!r}")
    k2 = ker.identity_kernel()
    A = singular.zero_potential(n, spec.dim)
    state = singular.ParticleState(Q=Q, P=P, mu=mu)

    def H(st):
        return singular.collective_hamiltonian(st, k1, k2, A, spec)

    traj = singular.run(state, dt=dt, T=T, kernel1=k1, kernel2=k2, A=A,
                        spec=spec, observers={"H": H}, stride=s.stride)
    energy = traj.observations["H"]
    csv_path = os.path.join(s.out_dir, f"{s.name}.csv")
    if "csv" in s.formats:
        os.makedirs(s.out_dir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=s.out_dir, prefix=".tmp-")
        os.close(fd)
        try:
            singular.write_trajectory_csv(tmp, traj, spec, energy=energy)
            os.replace(tmp, csv_path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        rep.summary["csv"] = csv_path
    h0 = energy[0]
    drift = max(abs(h - h0) for h in energy) / max(abs(h0), 1e-300)
    rep.summary["H_drift"] = drift
    rep.add("AC4", "relative H drift", drift, 1e-8)
    psum0 = np.sum(traj.states[0].P, axis=0)
    pdrift = max(np.max(np.abs(np.sum(st.P, axis=0) - psum0)) for st in traj.states)
    rep.add("AC4", "total momentum drift", pdrift, 1e-10)
    if "svg" in s.formats:
        svg = os.path.join(s.out_dir, f"{s.name}.svg")
        plot_csv(csv_path, svg)
        rep.summary["svg"] = svg


_PRESET_FIELDS_1D = {
    "cosine": lambda x: np.cos(x),
    "two_mode": lambda x: np.cos(x) + 0.5 * np.sin(2 * x),
    "peakon": None,  # handled separately
}


def _run_ch(s: Scenario, rep: RunReport):
    p = s.params
    group = p.get("group", "abelian")
    spec = _spec_for(group)
    L = float(p.get("L", 2 * np.pi))
    N = int(p.get("N", 256))
    alpha1 = float(p.get("alpha1", 1.0))
    alpha2 = float(p.get("alpha2", 0.0)) if s.kind == "mch2" else 0.0
    dt = float(p.get("dt", 1e-3))
    T = float(p.get("T", 1.0))
    grid = ker.Grid1D(L=L, N=N)
    x = grid.x()
    expr = p.get("m_expression")
    preset = p.get("m_preset", "two_mode" if expr is None else None)
    if expr is not None:
        ns = {"x": x, "np": np, "pi": np.pi, "cos": np.cos, "sin": np.sin,
              "exp": np.exp, "L": L}
        m = np.asarray(eval(expr, {"__builtins__": {}}, ns), dtype=float)
        if m.shape != (N,):
            raise ValueError("m_expression must evaluate to an N-vector")
    elif preset == "peakon":
        m = e1.peakon_field(grid, L / 2, 1.0)
    elif preset in _PRESET_FIELDS_1D:
        m = 0.3 * _PRESET_FIELDS_1D[preset](x)
    else:
        raise ValueError(f"unknown m_preset {preset!r}")
    amp = float(p.get("sigma_amplitude", 0.2))
    rng = np.random.default_rng(s.seed)
    sigma = amp * np.stack([np.cos((a % 3 + 1) * x + rng.uniform(0, 2 * np.pi))
                            for a in range(spec.dim)])
    A = None
    if p.get("A_preset", "none") == "sine":
        A = 0.2 * np.stack([np.sin((a + 1) * x) for a in range(spec.dim)])
    state = e1.FieldState1D(grid=grid, m=m, sigma=sigma, spec=spec,
                            alpha1=alpha1, alpha2=alpha2, A=A)
    out = e1.run(state, dt=dt, T=T,
                 observers={"h": e1.hamiltonian, "charge": e1.total_charge},
                 stride=s.stride)
    rows = []
    for t, h, q in zip(out["times"], out["observations"]["h"],
                       out["observations"]["charge"]):
        rows.append([float(t), float(h)] + [float(v) for v in q])
    header = ["t", "h"] + [f"charge_{a+1}" for a in range(spec.dim)]
    csv_path = os.path.join(s.out_dir, f"{s.name}.csv")
    if "csv" in s.formats:
        write_csv(csv_path, header, rows)
        rep.summary["csv"] = csv_path
        snap = os.path.join(s.out_dir, f"{s.name}_m_final.csv")
        write_matrix_csv(snap, out["states"][-1].m[None, :])
        rep.summary["snapshot"] = snap
    h = np.asarray(out["observations"]["h"])
    drift = np.max(np.abs(h - h[0])) / max(abs(h[0]), 1e-300)
    rep.summary["h_drift"] = drift
    rep.add("AC-h1d", "relative energy drift", drift, 1e-5)
    if "svg" in s.formats:
        svg = os.path.join(s.out_dir, f"{s.name}.svg")
        plot_csv(csv_path, svg)
        rep.summary["svg"] = svg


def _run_2d(s: Scenario, rep: RunReport):
    p = s.params
    N = int(p.get("N", 128))
    L = float(p.get("L", 2 * np.pi))
    dt = float(p.get("dt", 1e-3))
    T = float(p.get("T", 1.0))
    preset = p.get("preset", "random")
    kmax = int(p.get("kmax", 4))
    amp = float(p.get("amplitude", 1.0))
    grid = e2.Grid2D(Lx=L, Ly=L, Nx=N, Ny=N)
    if preset == "shear_layer":
        w = e2.shear_layer(grid)
    elif preset == "dipole":
        w = e2.dipole(grid)
    elif preset == "random":
        w = e2.random_band_limited(grid, kmax=kmax, amplitude=amp, seed=s.seed)
    else:
        raise ValueError(f"unknown 2D preset {preset!r}")
    spec = lie.abelian(1)
    if s.kind == "rmhd2d":
        charge = float(p.get("charge", 0.5))
        sg = e2.random_band_limited(grid, kmax=kmax, amplitude=charge,
                                    seed=s.seed + 1)[None]
    else:
        sg = np.zeros((1, N, N))
    state = e2.FieldState2D(grid, w, sg, spec)
    out = e2.run(state, dt=dt, T=T,
                 observers={"E": e2.energy, "C": e2.casimirs}, stride=s.stride)
    rows = []
    for t, E, C in zip(out["times"], out["observations"]["E"],
                       out["observations"]["C"]):
        rows.append([float(t), float(E), C["total_vorticity"],
                     C["enstrophy"], C["sigma2"]])
    header = ["t", "energy", "total_vorticity", "enstrophy", "sigma2"]
    csv_path = os.path.join(s.out_dir, f"{s.name}.csv")
    if "csv" in s.formats:
        write_csv(csv_path, header, rows)
        rep.summary["csv"] = csv_path
        snap = os.path.join(s.out_dir, f"{s.name}_varpi_final.csv")
        write_matrix_csv(snap, out["states"][-1].varpi)
        rep.summary["snapshot"] = snap
    E = np.asarray(out["observations"]["E"])
    drift = np.max(np.abs(E - E[0])) / max(abs(E[0]), 1e-300)
    rep.summary["energy_drift"] = drift
    rep.add("AC9", "relative energy drift", drift, 1e-6)
    if s.kind == "rmhd2d":
        s2 = np.asarray([C["sigma2"] for C in out["observations"]["C"]])
        d2 = np.max(np.abs(s2 - s2[0])) / max(abs(s2[0]), 1e-300)
        rep.add("AC9", "relative sigma^2 drift", d2, 1e-6)
    else:
        Z = np.asarray([C["enstrophy"] for C in out["observations"]["C"]])
        dz = np.max(np.abs(Z - Z[0])) / max(abs(Z[0]), 1e-300)
        rep.add("AC9", "relative enstrophy drift", dz, 1e-6)
    if "svg" in s.formats:
        svg = os.path.join(s.out_dir, f"{s.name}_varpi_final.svg")
        plot_csv(rep.summary.get("snapshot", csv_path), svg)
        rep.summary["svg"] = svg


def _run_clebsch_check(s: Scenario, rep: RunReport):
    p = s.params
    N = int(p.get("N", 64))
    dt = float(p.get("dt", 1e-3))
    T = float(p.get("T", 0.5))
    seed_kind = p.get("seed_kind", "euler")
    grid = e2.Grid2D(2 * np.pi, 2 * np.pi, N, N)
    if seed_kind == "euler":
        state = cb.euler_seed(grid, seed=s.seed)
    elif seed_kind == "charged":
        state = cb.charged_seed(grid, seed=s.seed)
    else:
        raise ValueError(f"unknown seed_kind {seed_kind!r}")
    out = cb.collective_evolve(state, dt=dt, T=T, stride=s.stride)
    rows = [[float(t), float(m)] for t, m in zip(out["times"], out["mismatch"])]
    csv_path = os.path.join(s.out_dir, f"{s.name}.csv")
    if "csv" in s.formats:
        write_csv(csv_path, ["t", "l2_mismatch"], rows)
        rep.summary["csv"] = csv_path
    mis = float(np.max(out["mismatch"]))
    rep.summary["max_mismatch"] = mis
    rep.add("AC10", "J_R vs direct L2 mismatch", mis, 1e-3)
    for sym in p.get("symmetries", ["translation", "rotate90"]):
        if sym == "translation":
            r = cb.equivariance_check(state, ("translate", (3, 5)))
        elif sym == "rotate90":
            r = cb.equivariance_check(state, "rotate90")
        else:
            raise ValueError(f"unknown symmetry {sym!r}")
        rep.add("AC10", f"equivariance ({sym})", r, 1e-12)
    if "svg" in s.formats:
        svg = os.path.join(s.out_dir, f"{s.name}.svg")
        plot_csv(csv_path, svg)
        rep.summary["svg"] = svg


_DISPATCH: dict = {
    "peakons": _run_peakons,
    "ch2": _run_ch,
    "mch2": _run_ch,
    "euler2d": _run_2d,
    "rmhd2d": _run_2d,
    "clebsch-check": _run_clebsch_check,
}


def run_scenario(s: Scenario) -> RunReport:
    rep = RunReport(scenario=s.name)
    t0 = time.perf_counter()
    if s.kind == "verify":
        mods = s.params.get("modules")
        for name, fn in _VERIFIERS.items():
            if mods is None or name in mods:
                fn(rep)
        rep.wall_time = time.perf_counter() - t0
        return rep
    _DISPATCH[s.kind](s, rep)
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# verify: reduced-scale property suites, keyed by acceptance threshold IDs

def _verify_lie(rep: RunReport):
    for spec in (lie.abelian(1), lie.abelian(4), lie.so3()):
        try:
            lie.validate(spec, tol=1e-12)
            resid = 0.0
        except lie.LieValidationError:
            resid = 1.0
        rep.add("AC1", f"algebra identities ({spec.name})", resid, 1e-12)
    rng = np.random.default_rng(0)
    xi = rng.normal(size=3)
    t = np.linalg.norm(xi)
    n = xi / t
    nhat = lie.so3().hat(n)
    rodrigues = np.eye(3) + np.sin(t) * nhat + (1 - np.cos(t)) * (nhat @ nhat)
    err = np.max(np.abs(lie.group_exp(lie.so3(), xi) - rodrigues))
    rep.add("AC1", "exp vs Rodrigues", err, 1e-12)


def _verify_kernels(rep: RunReport):
    from scipy.special import polygamma
    a, L = 1.0, 2 * np.pi
    G = ker.helmholtz_green_periodic(a, L)
    K = 10000
    kk = np.arange(-K, K + 1)
    fourier = np.sum(np.cos(kk * 1.3) / (1 + kk.astype(float) ** 2)) / L
    tail = (polygamma(1, K + 1) - polygamma(3, K + 1) / 6
            + polygamma(5, K + 1) / 120)
    rep.add("AC2", "periodic kernel vs tail-corrected Fourier sum",
            abs(G.value(1.3) - fourier) - 2 * tail / L, 1e-10)
    grid = ker.Grid1D(L=L, N=1024)
    rng = np.random.default_rng(1)
    f = rng.normal(size=grid.N)
    back = ker.convolve_periodic(grid, G, ker.apply_helmholtz(grid, f, a))
    rep.add("AC2", "convolution round trip", float(np.max(np.abs(back - f))), 1e-10)


def _verify_singular(rep: RunReport):
    from .kernels import helmholtz_green_periodic, identity_kernel
    spec = lie.so3()
    rng = np.random.default_rng(2)
    st = singular.ParticleState(Q=rng.uniform(0, 2 * np.pi, (4, 2)),
                                P=rng.normal(size=(4, 2)),
                                mu=rng.normal(size=(4, 3)))
    k1 = ker.gaussian_kernel(1.0)
    k2 = identity_kernel()
    A = singular.zero_potential(2, 3)
    dQ, dP, dmu = singular.hamiltonian_gradients(st, k1, k2, A, spec)
    h = 1e-5
    worst = 0.0
    Q = st.Q.copy()
    for idx in np.ndindex(Q.shape):
        Qp, Qm = Q.copy(), Q.copy()
        Qp[idx] += h
        Qm[idx] -= h
        hi = singular.collective_hamiltonian(singular.ParticleState(Qp, st.P, st.mu), k1, k2, A, spec)
        lo = singular.collective_hamiltonian(singular.ParticleState(Qm, st.P, st.mu), k1, k2, A, spec)
        fd = (hi - lo) / (2 * h)
        worst = max(worst, abs(fd - dQ[idx]) / max(abs(fd), 1.0))
    rep.add("AC3", "analytic vs FD gradients (Q block)", worst, 1e-6)
    # two-peakon collision
    L = 2 * np.pi
    G = helmholtz_green_periodic(1.0, L)
    st2 = singular.ParticleState(Q=[[L / 2 - 1.5], [L / 2 + 1.5]],
                                 P=[[1.0], [0.3]], mu=np.zeros((2, 1)))
    ab = lie.abelian(1)
    A1 = singular.zero_potential(1, 1)

    def H(x):
        return singular.collective_hamiltonian(x, G, k2, A1, ab)

    traj = singular.run(st2, dt=1e-3, T=10.0, kernel1=G, kernel2=k2, A=A1,
                        spec=ab, observers={"H": H}, stride=100)
    Hs = np.asarray(traj.observations["H"])
    rep.add("AC4", "two-peakon H drift",
            float(np.max(np.abs(Hs - Hs[0])) / abs(Hs[0])), 1e-8)


def _verify_epaut1d(rep: RunReport):
    spec = lie.so3()
    grid = ker.Grid1D(L=2 * np.pi, N=256)
    x = grid.x()
    rng = np.random.default_rng(3)
    m = 0.3 * (np.cos(x) + 0.5 * np.sin(2 * x))
    sigma = 0.3 * np.stack([np.cos((a + 1) * x + rng.uniform(0, 2 * np.pi))
                            for a in range(3)])
    A = 0.3 * np.stack([np.sin((a % 2 + 1) * x) for a in range(3)])
    st = e1.FieldState1D(grid, m, sigma, spec, alpha1=1.0, A=A)
    a, b = e1.rhs(st), e1.rhs_curvature(st)
    rep.add("AC6", "rhs vs curvature formulation",
            float(max(np.max(np.abs(a.m - b.m)), np.max(np.abs(a.sigma - b.sigma)))),
            1e-10)
    # CH reduction on random data
    mr = np.real(np.fft.ifft(np.fft.fft(rng.normal(size=256)) *
                             (np.abs(np.fft.fftfreq(256) * 256) < 8)))
    stc = e1.FieldState1D(grid, mr, np.zeros((3, 256)), spec, alpha1=1.0)
    got = e1.rhs(stc).m
    k = grid.k()

    def dx(f):
        return np.real(np.fft.ifft(1j * k * np.fft.fft(f)))

    u = np.real(np.fft.ifft(np.fft.fft(mr) / (1 + k ** 2)))
    want = -(u * dx(mr) + 2 * dx(u) * mr)
    fh = np.fft.fft(want)
    fh[np.abs(np.fft.fftfreq(256) * 256) > 256 / 3] = 0
    want = np.real(np.fft.ifft(fh))
    rep.add("AC11", "CH reduction vs independent RHS",
            float(np.max(np.abs(got - want))), 1e-12)


def _verify_epaut2d(rep: RunReport):
    grid = e2.Grid2D(2 * np.pi, 2 * np.pi, 64, 64)
    w = e2.random_band_limited(grid, kmax=3, amplitude=1.0, seed=4)
    st = e2.FieldState2D(grid, w, np.zeros((1, 64, 64)), lie.abelian(1))
    out = e2.run(st, dt=2e-3, T=0.5, observers={"E": e2.energy, "Z": e2.enstrophy},
                 stride=50)
    E = np.asarray(out["observations"]["E"])
    Z = np.asarray(out["observations"]["Z"])
    rep.add("AC9", "Euler energy drift (reduced scale)",
            float(np.max(np.abs(E - E[0])) / abs(E[0])), 1e-6)
    rep.add("AC9", "Euler enstrophy drift (reduced scale)",
            float(np.max(np.abs(Z - Z[0])) / abs(Z[0])), 1e-6)


def _verify_clebsch(rep: RunReport):
    grid = e2.Grid2D(2 * np.pi, 2 * np.pi, 32, 32)
    state = cb.euler_seed(grid, seed=5)
    out = cb.collective_evolve(state, dt=2e-3, T=0.25, stride=25)
    rep.add("AC10", "Clebsch consistency (reduced scale)",
            float(np.max(out["mismatch"])), 1e-3)
    rep.add("AC10", "translation equivariance",
            cb.equivariance_check(state, ("translate", (3, 5))), 1e-12)
    rep.add("AC10", "rotation equivariance",
            cb.equivariance_check(state, "rotate90"), 1e-12)


_VERIFIERS = {
    "lie": _verify_lie,
    "kernels": _verify_kernels,
    "singular": _verify_singular,
    "epaut1d": _verify_epaut1d,
    "epaut2d": _verify_epaut2d,
    "clebsch": _verify_clebsch,
}


def verify(module: Optional[str] = None) -> RunReport:
    rep = RunReport(scenario=f"verify:{module or 'all'}")
    t0 = time.perf_counter()
    if module is not None and module not in _VERIFIERS:
        raise ScenarioValidationError([f"unknown module {module!r}; "
                                       f"choose from {sorted(_VERIFIERS)}"])
    for name, fn in _VERIFIERS.items():
        if module is None or name == module:
            fn(rep)
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# plotting

def plot_csv(csv_path: str, svg_path: str):
    """Render a CSV as SVG: time series get line plots (first column t),
    bare numeric matrices get symmetric-scale heatmaps."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "epaut"

    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(r for r in rows):
        raise ValueError(f"no data in {csv_path}")

    def floatable(tok):
        try:
            float(tok)
            return True
        except ValueError:
            return False

    fig, axis = plt.subplots(figsize=(6, 4))
    if all(floatable(tok) for tok in rows[0]):
        M = np.array([[float(v) for v in r] for r in rows])
        lim = np.max(np.abs(M)) or 1.0
        im = axis.imshow(M.T, origin="lower", cmap="RdBu_r", vmin=-lim, vmax=lim)
        fig.colorbar(im, ax=axis)
        axis.set_title(os.path.basename(csv_path))
    else:
        header = rows[0]
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        if data.size == 0:
            plt.close(fig)
            raise ValueError(f"no data rows in {csv_path}")
        for j in range(1, data.shape[1]):
            axis.plot(data[:, 0], data[:, j], label=header[j])
        axis.set_xlabel(header[0])
        axis.legend(loc="best", fontsize=8)
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    _atomic_write(svg_path, buf.getvalue())


# ---------------------------------------------------------------------------
# entry point

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="epaut",
                                     description="scenario runner for the "
                                                 "EPAut solver suite")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one or more scenario files")
    runp.add_argument("files", nargs="+")
    runp.add_argument("--out", default=None, help="override output directory")
    runp.add_argument("--stride", type=int, default=None)
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--threads", type=int, default=1)
    verp = sub.add_parser("verify", help="run property suites")
    verp.add_argument("module", nargs="?", default=None)
    plotp = sub.add_parser("plot", help="render a CSV to SVG")
    plotp.add_argument("csv")
    plotp.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    if args.command == "plot":
        out = args.out or os.path.splitext(args.csv)[0] + ".svg"
        try:
            plot_csv(args.csv, out)
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(out)
        return 0

    if args.command == "verify":
        try:
            rep = verify(args.module)
        except ScenarioValidationError as exc:
            for e in exc.errors:
                print(f"error: {e}", file=sys.stderr)
            return 2
        print(rep.render())
        return 0 if rep.passed else 3

    # run
    scenarios = []
    for path in args.files:
        try:
            s = parse_scenario(path)
        except ScenarioValidationError as exc:
            for e in exc.errors:
                print(f"{path}: {e}", file=sys.stderr)
            return 2
        except (OSError, tomllib.TOMLDecodeError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return 2
        if args.out is not None:
            s = Scenario(s.name, s.kind, s.params, args.out, s.stride,
                         s.formats, s.seed)
        if args.stride is not None:
            s = Scenario(s.name, s.kind, s.params, s.out_dir, args.stride,
                         s.formats, s.seed)
        if args.seed is not None:
            s = Scenario(s.name, s.kind, s.params, s.out_dir, s.stride,
                         s.formats, args.seed)
        scenarios.append(s)

    reports = []
    if args.threads > 1 and len(scenarios) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=args.threads) as ex:
            reports = list(ex.map(run_scenario, scenarios))
    else:
        for s in scenarios:
            try:
                reports.append(run_scenario(s))
            except Exception as exc:
                print(f"{s.name}: run failed: {exc}", file=sys.stderr)
                return 1
    for rep in reports:
        print(rep.render())
    return 0 if all(r.passed for r in reports) else 3


if __name__ == "__main__":
    sys.exit(main())
