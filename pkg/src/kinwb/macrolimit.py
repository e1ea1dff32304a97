"""Reference drift-diffusion discretizations the kinetic schemes must reach.

The exponential-fitting flux for d_t rho - d_x(D d_x rho - E rho) = 0 is

    F_{j-1/2} = E (rho_{j-1} - exp(-E dx/D) rho_j) / (1 - exp(-E dx/D)),

written here through the Bernoulli function B(x) = x/(exp(x) - 1) as
F = (D/dx) (B(-u) rho_L - B(u) rho_R), u = E dx/D, which is finite and
smooth through u = 0 (pure diffusion).  Updates are conservative:
rho_j += (dt/dx)(F_{j-1/2} - F_{j+1/2}) on a periodic grid, with E_half[j]
the drift at interface x_{j-1/2}.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class DriftDiffusionParams:
    D: float
    E_half: np.ndarray
    dt: float
    dx: float

    def __post_init__(self):
        if self.D < 0.0:
            raise ValueError("diffusion coefficient must be nonnegative")
        if self.dt <= 0.0 or self.dx <= 0.0:
            raise ValueError("dt and dx must be positive")


def bernoulli(x):
    """x/(exp(x) - 1) with its Taylor series 1 - x/2 + x^2/12 - x^4/720
    below |x| = 1e-4 (removable singularity at 0)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 - xs / 2.0 + xs**2 / 12.0 - xs**4 / 720.0
    out[~small] = x[~small] / np.expm1(x[~small])
    return float(out[0]) if scalar else out


def sg_flux(E, D: float, dx: float, rho_left, rho_right):
    """Exponential-fitting interface flux; reduces to D*(rho_L - rho_R)/dx
    at E = 0 and vanishes on the discrete Boltzmann profile
    rho_R = exp(E dx/D) rho_L."""
    if D <= 0.0:
        raise ValueError("sg_flux requires D > 0")
    u = np.asarray(E, dtype=float) * dx / D
    return (D / dx) * (bernoulli(-u) * rho_left - bernoulli(u) * rho_right)


def sg_step(rho: np.ndarray, params: DriftDiffusionParams) -> np.ndarray:
    """One conservative step on a periodic grid; F[j] sits at x_{j-1/2}."""
    F = sg_flux(params.E_half, params.D, params.dx, np.roll(rho, 1), rho)
    return rho + params.dt / params.dx * (F - np.roll(F, -1))


def heat_step(rho: np.ndarray, q, dt: float, dx: float) -> np.ndarray:
    """Centered finite differences for the heat limit; the diffusion
    coefficient is the quadrature second moment (1/3 for Gauss rules)."""
    coef = float(np.sum(q.weights * q.nodes**2))
    return rho + dt / dx**2 * coef * (np.roll(rho, 1) - 2.0 * rho + np.roll(rho, -1))


def sg_chemo_step(rho: np.ndarray, E_half: np.ndarray, dt: float, dx: float) -> np.ndarray:
    """Keller-Segel-type limit: D = 1/3 and drift of the opposite
    orientation (the macroscopic flux is (1/3) d_x rho + E rho)."""
    return sg_step(rho, DriftDiffusionParams(D=1.0 / 3.0, E_half=-np.asarray(E_half), dt=dt, dx=dx))


def sg_vfp_step(
    rho: np.ndarray, E_half: np.ndarray, kappa: float, dt: float, dx: float
) -> np.ndarray:
    """Fokker-Planck limit: D = kappa, drift E."""
    return sg_step(rho, DriftDiffusionParams(D=kappa, E_half=np.asarray(E_half), dt=dt, dx=dx))


def rho_to_csv(rho: np.ndarray, dx: float, path) -> None:
    """Columns j, x, rho; 17 significant digits."""
    with open(path, "w") as fh:
        fh.write("j,x,rho\n")
        for j, val in enumerate(np.asarray(rho, dtype=float)):
            fh.write(f"{j},{(j + 0.5) * dx:.17g},{val:.17g}\n")
