"""IMEX well-balanced time marching on a 1D periodic grid.

One step solves, cell by cell,

    R_eps f_j^{n+1} = eps f_j^n + (eps dt/dx) V (B-block terms, neighbors),

    R_eps = eps I + (dt/dx) V [[I, -S0], [-S0, I]],

with the stiff leading scattering block S0 implicit and the eps-correction
blocks explicit.  S0 is interface-independent for every model here (the
limit closure does not see the local field), so a single LU factorization
serves all cells; the B blocks carry the per-interface field dependence.
State layout per cell: (f(v_1..v_K), f(-v_1..-v_K)).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import SolveFailure
from .scattering import (
    ScatteringDecomposition,
    chemo_interfaces,
    rte_closure,
    rte_smatrix,
    vfp_closure,
    vfp_smatrix,
)
from .spectral import dispersion_roots


def phi_tanh(u, chi: float = 1.0, delta: float = 1.0):
    """Default bounded odd tumbling response chi*tanh(u/delta)."""
    return chi * np.tanh(np.asarray(u, dtype=float) / delta)


@dataclass(frozen=True, eq=False)
class KineticGrid:
    """Periodic kinetic state: f[j] = (f_j(v_1..v_K), f_j(-v_1..-v_K))."""

    Nx: int
    dx: float
    dt: float
    epsilon: float
    q: object
    f: np.ndarray
    boundary: str = "periodic"

    def __post_init__(self):
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")
        if self.dx <= 0.0 or self.dt <= 0.0 or self.epsilon <= 0.0:
            raise ValueError("dx, dt, epsilon must be positive")
        f = np.array(self.f, dtype=float)
        if f.shape != (self.Nx, 2 * self.q.K):
            raise ValueError(f"f must have shape ({self.Nx}, {2*self.q.K})")
        if not np.all(np.isfinite(f)):
            raise ValueError("densities must be finite")
        f.flags.writeable = False
        object.__setattr__(self, "f", f)

    def with_f(self, f: np.ndarray) -> "KineticGrid":
        return KineticGrid(
            Nx=self.Nx, dx=self.dx, dt=self.dt, epsilon=self.epsilon,
            q=self.q, f=f, boundary=self.boundary,
        )

    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.Nx) + 0.5) * self.dx


@dataclass(frozen=True, eq=False)
class MacroField:
    rho: np.ndarray
    S: np.ndarray | None = None
    E_half: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class KineticModel:
    """Which collision model drives the step, plus its parameters."""

    name: str  # rte | chemo | vfp
    phi: Callable | None = None
    kappa: float | None = None

    def __post_init__(self):
        if self.name not in ("rte", "chemo", "vfp"):
            raise ValueError(f"unknown model {self.name!r}")
        if self.name == "chemo" and self.phi is None:
            object.__setattr__(self, "phi", phi_tanh)
        if self.name == "vfp" and (self.kappa is None or self.kappa <= 0.0):
            raise ValueError("vfp model requires kappa > 0")


def cfl_check(grid: KineticGrid) -> bool:
    """Advisory kinetic CFL max(v) dt <= eps dx (the positivity-proof bound;
    the IMEX stiff solve permits larger steps)."""
    vmax = float(grid.q.nodes[-1])
    return vmax * grid.dt <= grid.epsilon * grid.dx * (1.0 + 1e-12)


def density(grid: KineticGrid) -> MacroField:
    """Macroscopic density rho_j = sum_k w_k (f_j(v_k) + f_j(-v_k))."""
    K = grid.q.K
    w = grid.q.weights
    rho = grid.f[:, :K] @ w + grid.f[:, K:] @ w
    return MacroField(rho=rho)


def total_mass(grid: KineticGrid) -> float:
    return float(np.sum(density(grid).rho) * grid.dx)


def chemoattractant_update(rho: np.ndarray, dx: float) -> np.ndarray:
    """Solve -(S_{j+1} - 2 S_j + S_{j-1})/dx^2 + S_j = rho_j, periodic.

    The operator is circulant symmetric positive definite; constants map
    to themselves.
    """
    Nx = len(rho)
    first_col = np.zeros(Nx)
    first_col[0] = 1.0 + 2.0 / dx**2
    first_col[1] = -1.0 / dx**2
    first_col[-1] = -1.0 / dx**2
    return sla.solve_circulant(first_col, rho)


def assemble_cell_matrix(
    epsilon: float, dt: float, dx: float, q, S0_left: np.ndarray, S0_right: np.ndarray
) -> np.ndarray:
    """R_eps = eps I + (dt/dx) V [[I, -S0_left], [-S0_right, I]].

    The anti-diagonal placement of the leading scattering block makes the
    implicit solve strictly cell-local; at eps = 0 the matrix is singular
    with the model Maxwellian as kernel.
    """
    K = q.K
    Vd = np.concatenate([q.nodes, q.nodes])
    H = np.block([[np.eye(K), -S0_left], [-S0_right, np.eye(K)]])
    return epsilon * np.eye(2 * K) + dt / dx * (Vd[:, None] * H)


def interface_grad(values: np.ndarray, dx: float) -> np.ndarray:
    """(values_j - values_{j-1})/dx at interface x_{j-1/2}, periodic."""
    return (values - np.roll(values, 1)) / dx


def chemo_drift(q, grads, phi) -> np.ndarray:
    """Interface drift E_{j-1/2} = sum_k w_k v_k phi(v_k dS/dx)."""
    v, w = q.nodes, q.weights
    return np.array([float(np.sum(w * v * phi(v * g))) for g in np.asarray(grads)])


def assemble_interfaces(
    grid: KineticGrid, model: KineticModel, fields: MacroField | None
) -> list[ScatteringDecomposition]:
    """Per-interface scattering decompositions for the current fields.

    Interface i sits at x_{i-1/2}, between cells i-1 and i (periodic).
    """
    q = grid.q
    eps, dx = grid.epsilon, grid.dx
    if model.name == "rte":
        spec0 = dispersion_roots(q, np.ones(2 * q.K))
        dec = rte_smatrix(eps, dx, q, spec0, rte_closure(q, spec0))
        return [dec] * grid.Nx
    if model.name == "chemo":
        if fields is None or fields.S is None:
            raise ValueError("chemo interfaces need fields.S")
        return chemo_interfaces(eps, dx, q, interface_grad(fields.S, dx), model.phi)
    if fields is None or fields.E_half is None:
        raise ValueError("vfp interfaces need fields.E_half")
    closure = vfp_closure(q)
    return [
        vfp_smatrix(eps, dx, q, float(E), model.kappa, closure=closure)
        for E in fields.E_half
    ]


def imex_step(
    grid: KineticGrid,
    model: KineticModel | str,
    fields: MacroField | None = None,
    interfaces: list[ScatteringDecomposition] | None = None,
) -> KineticGrid:
    """One IMEX step; pure function grid -> grid.

    ``interfaces`` may carry precomputed decompositions (static fields);
    otherwise they are assembled from ``fields``.  The leading blocks of
    all interfaces must agree (they do for every model here), so a single
    LU factorization of R_eps is reused across cells.
    """
    if isinstance(model, str):
        model = KineticModel(name=model)
    if interfaces is None:
        interfaces = assemble_interfaces(grid, model, fields)
    Nx, K = grid.Nx, grid.q.K
    f = grid.f
    S0 = interfaces[0].S0_block
    R = assemble_cell_matrix(grid.epsilon, grid.dt, grid.dx, grid.q, S0, S0)
    try:
        lu = sla.lu_factor(R)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eps > 0 keeps R regular
        raise SolveFailure(f"cell matrix factorization failed: {exc}") from exc

    B1 = np.stack([dec.B_blocks[0] for dec in interfaces])
    B2 = np.stack([dec.B_blocks[1] for dec in interfaces])
    B3 = np.stack([dec.B_blocks[2] for dec in interfaces])
    B4 = np.stack([dec.B_blocks[3] for dec in interfaces])
    fp, fm = f[:, :K], f[:, K:]
    # cell j couples to interfaces j (left) and j+1 (right), periodic wrap
    bp = np.einsum("jab,jb->ja", B1, np.roll(fp, 1, axis=0)) + np.einsum(
        "jab,jb->ja", B2, fm
    )
    bm = np.einsum("jab,jb->ja", np.roll(B3, -1, axis=0), fp) + np.einsum(
        "jab,jb->ja", np.roll(B4, -1, axis=0), np.roll(fm, -1, axis=0)
    )
    Vd = np.concatenate([grid.q.nodes, grid.q.nodes])
    rhs = grid.epsilon * f + (grid.epsilon * grid.dt / grid.dx) * Vd * np.hstack([bp, bm])
    fnew = sla.lu_solve(lu, rhs.T).T
    return grid.with_f(fnew)


def equilibrium_state(model: KineticModel | str, q, rho: np.ndarray) -> np.ndarray:
    """Kinetic data at the model Maxwellian carrying the given density."""
    name = model if isinstance(model, str) else model.name
    K = len(q.nodes)
    if name in ("rte", "chemo"):
        half = np.repeat(rho[:, None] / 2.0, K, axis=1)
        return np.hstack([half, half])
    m = np.exp(-(q.nodes**2) / (2.0 * q.kappa))
    sigma0 = float(np.sum(q.weights * m))
    half = rho[:, None] / (2.0 * sigma0) * m[None, :]
    return np.hstack([half, half])


def grid_to_csv(grid: KineticGrid, path) -> None:
    """Columns j, x_j, f(v_1..v_K), f(-v_1..-v_K); 17 significant digits."""
    K = grid.q.K
    x = grid.cell_centers()
    with open(path, "w") as fh:
        fh.write(
            "j,x,"
            + ",".join(f"f_plus_{k+1}" for k in range(K))
            + ","
            + ",".join(f"f_minus_{k+1}" for k in range(K))
            + "\n"
        )
        for j in range(grid.Nx):
            vals = ",".join(f"{val:.17g}" for val in grid.f[j])
            fh.write(f"{j},{x[j]:.17g},{vals}\n")
