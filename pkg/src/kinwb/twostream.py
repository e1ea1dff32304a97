"""Two-velocity run-and-tumble model with its closed-form 2x2 S-matrix.

The pedagogical instance: velocities +-1, tumbling biased by the
chemoattractant slope.  Everything that the general solver does through
mode matrices is explicit here, which makes it the cross-validation case
for the full machinery.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateDenominator
from .kinetic import chemoattractant_update, phi_tanh


@dataclass(frozen=True, eq=False)
class TwoStreamState:
    Nx: int
    dx: float
    dt: float
    epsilon: float
    f_plus: np.ndarray
    f_minus: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        for name in ("f_plus", "f_minus", "S"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.Nx,):
                raise ValueError(f"{name} must have shape ({self.Nx},)")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def rho(self) -> np.ndarray:
        return self.f_plus + self.f_minus

    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.Nx) + 0.5) * self.dx


def ts_smatrix(epsilon: float, dx: float, phi_half: float) -> np.ndarray:
    """Interface map (f+_{j-1}, f-_j) -> (fbar+, fbar-).

    With EE = exp(-phi dx) and D = EE - 1 - eps*phi*(1 + EE):

        [[-2 eps phi/D,      1 + 2 eps phi EE/D],
         [1 + 2 eps phi/D,   -2 eps phi EE/D   ]]

    which is left-stochastic by construction; phi = 0 gives the exact
    swap matrix.
    """
    if phi_half == 0.0:
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    EE = np.exp(-phi_half * dx)
    denom = EE - 1.0 - epsilon * phi_half * (1.0 + EE)
    if denom == 0.0:
        raise DegenerateDenominator(
            f"EE - 1 - eps*phi*(1+EE) = 0 at phi={phi_half}, eps={epsilon}"
        )
    r = 2.0 * epsilon * phi_half / denom
    return np.array([[-r, 1.0 + r * EE], [1.0 + r, -r * EE]])


def _currents(f_plus, f_minus, phi_half, epsilon, dx):
    """Jbar_{j-1/2} = -2 phi (f+_{j-1} - EE f-_j) / (EE - 1 - eps phi (1+EE))."""
    EE = np.exp(-phi_half * dx)
    denom = EE - 1.0 - epsilon * phi_half * (1.0 + EE)
    num = -2.0 * phi_half * (np.roll(f_plus, 1) - EE * f_minus)
    out = np.zeros_like(f_plus)
    nz = phi_half != 0.0
    out[nz] = num[nz] / denom[nz]
    # phi -> 0 limit: denominator ~ -phi*(dx + 2 eps), current -> 2(f+_{j-1} - f-_j)/(dx + 2 eps)
    out[~nz] = 2.0 * (np.roll(f_plus, 1)[~nz] - f_minus[~nz]) / (dx + 2.0 * epsilon)
    return out


def ts_step(state: TwoStreamState, phi_response: Callable = phi_tanh) -> TwoStreamState:
    """One IMEX step of the two-stream scheme.

    S is refreshed from rho^n through the elliptic solve, the interface
    currents are evaluated explicitly with the exact eps-dependent
    denominator (so stationary profiles are preserved at finite eps), and
    the stiff relaxation is solved cell-locally:

        (1+a) f+ - a f- = f+^n + (dt/dx) Jbar_{j-1/2}
        -a f+ + (1+a) f- = f-^n - (dt/dx) Jbar_{j+1/2},   a = dt/(eps dx).
    """
    S = chemoattractant_update(state.rho, state.dx)
    phi_half = np.asarray(phi_response((S - np.roll(S, 1)) / state.dx), dtype=float)
    J = _currents(state.f_plus, state.f_minus, phi_half, state.epsilon, state.dx)
    a = state.dt / (state.epsilon * state.dx)
    rp = state.f_plus + state.dt / state.dx * J
    rm = state.f_minus - state.dt / state.dx * np.roll(J, -1)
    det = 1.0 + 2.0 * a
    f_plus = ((1.0 + a) * rp + a * rm) / det
    f_minus = (a * rp + (1.0 + a) * rm) / det
    return TwoStreamState(
        Nx=state.Nx, dx=state.dx, dt=state.dt, epsilon=state.epsilon,
        f_plus=f_plus, f_minus=f_minus, S=S,
    )


def ts_mass(state: TwoStreamState) -> float:
    return float(np.sum(state.rho) * state.dx)


def state_to_csv(state: TwoStreamState, path) -> None:
    """Columns j, x, f+, f-, rho, S; 17 significant digits."""
    x = state.cell_centers()
    with open(path, "w") as fh:
        fh.write("j,x,f_plus,f_minus,rho,S\n")
        for j in range(state.Nx):
            fh.write(
                f"{j},{x[j]:.17g},{state.f_plus[j]:.17g},{state.f_minus[j]:.17g},"
                f"{state.rho[j]:.17g},{state.S[j]:.17g}\n"
            )
