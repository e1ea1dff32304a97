"""Interface scattering matrices S^eps and their decomposition S^0 + eps*B^eps.

For each model the stationary two-point problem on (0, dx) is solved in a
truncated eigenmode basis: incoming traces (f_{j-1}(+V), f_j(-V)) map to
outgoing traces (fbar(dx, +V), fbar(0, -V)) through S^eps = Ntilde N^{-1},
where the columns of N (Ntilde) evaluate each mode at the incoming
(outgoing) trace points.  Damped modes are anchored at their own interface
so every exponential factor lies in [0, 1]; underflow of exp(-lambda dx/eps)
to exact zero is the correct limit and is kept.

The leading decomposition term is the anti-diagonal block I - zeta*gamma.
Above the switch threshold eps >= 1e-8*dx the correction is computed as
B^eps = (S^eps - S^0)/eps; below it the analytic limit B^0 is substituted
to avoid catastrophic cancellation.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IllConditioned, NonPositiveRate
from .spectral import (
    DispersionSpectrum,
    _all_roots_multi,
    dispersion_roots,
    vfp_mu,
    vfp_psi,
    vfp_psi0,
)

EPS_SWITCH_FACTOR = 1e-8
_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class ClosureCoefficients:
    """The matrices inverting the limit eigenbasis at the positive nodes.

    gamma recovers the K-1 damped-mode coefficients of a sampled kinetic
    density, beta its Maxwellian coefficient, and zeta converts damped-mode
    coefficients back to an odd-in-v density.  They satisfy
    gamma @ basis = I, gamma @ maxwellian = 0, beta @ basis = 0,
    beta @ maxwellian = 1.
    """

    zeta: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    model_tag: str


@dataclass(frozen=True, eq=False)
class ScatteringDecomposition:
    epsilon: float
    S_full: np.ndarray
    S0_block: np.ndarray
    B_blocks: tuple
    B0_blocks: tuple
    interface_params: dict

    @property
    def K(self) -> int:
        return self.S0_block.shape[0]

    def S0_full(self) -> np.ndarray:
        K = self.K
        Z = np.zeros((K, K))
        return np.block([[Z, self.S0_block], [self.S0_block, Z]])


def _solve_right(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """B @ A^{-1} with a condition estimate guard."""
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditioned(f"mode matrix condition estimate {cond:.3e} exceeds 1e12")
    return np.linalg.solve(A.T, B.T).T


def _blocks(M: np.ndarray, K: int) -> tuple:
    return (M[:K, :K], M[:K, K:], M[K:, :K], M[K:, K:])


def _expm1_over(u: np.ndarray) -> np.ndarray:
    """expm1(u)/u, stable through u = 0."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    big = np.abs(u) > 1e-8
    out[big] = np.expm1(u[big]) / u[big]
    out[~big] = 1.0 + 0.5 * u[~big]
    return out


def matrix_to_csv(M: np.ndarray, path) -> None:
    """Row-major CSV dump with 17 significant digits (fixture format)."""
    with open(path, "w") as fh:
        for row in np.atleast_2d(M):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


# ---------------------------------------------------------------------------
# radiative transfer
# ---------------------------------------------------------------------------


def rte_closure(q, spectrum: DispersionSpectrum) -> ClosureCoefficients:
    """gamma, beta from inverting [1/(1 - V (x) lambda) | 1]; zeta = odd part."""
    lam = spectrum.lambdas
    v = q.nodes
    K = q.K
    Fm = 1.0 / (1.0 - np.outer(v, lam))
    Fp = 1.0 / (1.0 + np.outer(v, lam))
    M01 = np.column_stack([Fm, np.ones(K)])
    cond = np.linalg.cond(M01)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditioned(f"eigenbasis condition estimate {cond:.3e} exceeds 1e12")
    X = np.linalg.inv(M01)
    return ClosureCoefficients(
        zeta=Fm - Fp, gamma=X[:-1, :], beta=X[-1, :], model_tag=spectrum.model_tag
    )


def _rte_B0(dx, v, closure) -> tuple:
    # (2I - zeta gamma) V beta^T / dx in the +,-,-,+ block pattern
    K = len(v)
    W = 2.0 * np.eye(K) - closure.zeta @ closure.gamma
    B1 = np.outer(W @ v, closure.beta) / dx
    return (B1, -B1, -B1, B1)


def _rte_matrices(epsilon, dx, v, lam):
    K = len(v)
    E = np.exp(-lam * dx / epsilon)
    Fm = 1.0 / (1.0 - np.outer(v, lam))
    Fp = 1.0 / (1.0 + np.outer(v, lam))
    one = np.ones((K, 1))
    Mtil = np.block(
        [
            [Fm * E, one, Fp, (dx - epsilon * v)[:, None]],
            [Fp, one, Fm * E, (epsilon * v)[:, None]],
        ]
    )
    M = np.block(
        [
            [Fm, one, Fp * E, (-epsilon * v)[:, None]],
            [Fp * E, one, Fm, (dx + epsilon * v)[:, None]],
        ]
    )
    return M, Mtil


def rte_smatrix(
    epsilon: float, dx: float, q, spectrum: DispersionSpectrum, closure: ClosureCoefficients
) -> ScatteringDecomposition:
    """Radiative-transfer scattering matrix and its eps-decomposition.

    The mode basis is the K-1 damped pairs, the constant, and the secular
    mode x - eps*v.  S^eps is interface-independent for this model.
    """
    if epsilon <= 0.0 or dx <= 0.0:
        raise ValueError("epsilon and dx must be positive")
    K = q.K
    M, Mtil = _rte_matrices(epsilon, dx, q.nodes, spectrum.lambdas)
    S = _solve_right(M, Mtil)
    S0b = np.eye(K) - closure.zeta @ closure.gamma
    B0 = _rte_B0(dx, q.nodes, closure)
    if epsilon >= EPS_SWITCH_FACTOR * dx:
        Z = np.zeros((K, K))
        B = _blocks((S - np.block([[Z, S0b], [S0b, Z]])) / epsilon, K)
    else:
        B = B0
    return ScatteringDecomposition(
        epsilon=epsilon,
        S_full=S,
        S0_block=S0b,
        B_blocks=B,
        B0_blocks=B0,
        interface_params={"model": "rte", "dx": dx},
    )


# ---------------------------------------------------------------------------
# chemotaxis (Othmer-Alt with rate 1 + eps*phi(v dS/dx))
# ---------------------------------------------------------------------------


def _chemo_matrices(epsilon, dx, v, phip, roots):
    """Finite-eps mode matrices; the middle-root column is scaled by
    1/lambda0 so the gradS -> 0 limit stays nondegenerate."""
    K = len(v)
    Tp, Tn = 1.0 + epsilon * phip, 1.0 - epsilon * phip
    lam_m = roots[: K - 1][::-1]  # entry l pairs with -lam_p[l]
    lam0 = roots[K - 1]
    lam_p = roots[K:]
    Elp = np.exp(-lam_p * dx / epsilon)
    Elm = np.exp(lam_m * dx / epsilon)
    Pp = 1.0 / (Tp[:, None] - np.outer(v, lam_p))
    PpN = 1.0 / (Tn[:, None] + np.outer(v, lam_p))
    Pm = 1.0 / (Tp[:, None] - np.outer(v, lam_m))
    PmN = 1.0 / (Tn[:, None] + np.outer(v, lam_m))

    def zero_col(x, vv, T):
        # (1/lam0)[exp(-lam0 x/eps)/(T - lam0 vv) - 1/T], stable at lam0 -> 0
        return (vv - T * (x / epsilon) * _expm1_over(-lam0 * x / epsilon)) / (
            T * (T - lam0 * vv)
        )

    N = np.block(
        [
            [Pp, (1.0 / Tp)[:, None], Pm * Elm, zero_col(0.0, v, Tp)[:, None]],
            [PpN * Elp, (1.0 / Tn)[:, None], PmN, zero_col(dx, -v, Tn)[:, None]],
        ]
    )
    Nt = np.block(
        [
            [Pp * Elp, (1.0 / Tp)[:, None], Pm, zero_col(dx, v, Tp)[:, None]],
            [PpN, (1.0 / Tn)[:, None], PmN * Elm, zero_col(0.0, -v, Tn)[:, None]],
        ]
    )
    return N, Nt, lam0


def _chemo_B0(dx, v, phip, lam0, lam1, lam01, closure) -> tuple:
    """Analytic limit of (S^eps - S^0)/eps via term-by-term differentiation.

    B^0 = A'(0) X - A^0 X N'(0) X with X the block inverse of the limit
    mode matrix; stiff entries differentiate to zero, and the second-order
    middle-eigenvalue coefficient drops because gamma annihilates constants.
    """
    K = len(v)
    zeta0, gamma, beta = closure.zeta, closure.gamma, closure.beta
    q0 = np.exp(-lam01 * dx)
    d = q0 - 1.0
    if abs(d) < 1e-12:
        return _rte_B0(dx, v, closure)
    Fm2 = 1.0 / (1.0 - np.outer(v, lam0)) ** 2
    Fp2 = 1.0 / (1.0 + np.outer(v, lam0)) ** 2
    DP = phip[:, None] - np.outer(v, lam1)
    zcol = np.zeros((K, K - 1))
    Np_top = np.hstack([-DP * Fm2, (-phip)[:, None], zcol, (lam01 * v)[:, None]])
    Np_bot = np.hstack(
        [zcol, phip[:, None], DP * Fm2, (q0 * (phip - lam01 * v) - phip)[:, None]]
    )
    Ntp_top = np.hstack(
        [zcol, (-phip)[:, None], -DP * Fp2, (q0 * (lam01 * v - phip) + phip)[:, None]]
    )
    Ntp_bot = np.hstack([DP * Fp2, phip[:, None], zcol, (-lam01 * v)[:, None]])
    Ap = np.vstack([Ntp_top - Np_bot, Ntp_bot - Np_top])
    NpF = np.vstack([Np_top, Np_bot])
    A0 = np.zeros((2 * K, 2 * K))
    A0[K:, : K - 1] = -zeta0
    A0[:K, K : 2 * K - 1] = -zeta0
    X = np.zeros((2 * K, 2 * K))
    X[: K - 1, :K] = gamma
    X[K - 1, :K] = beta
    X[K : 2 * K - 1, K:] = gamma
    X[2 * K - 1, :K] = -beta / d
    X[2 * K - 1, K:] = beta / d
    B0 = Ap @ X - A0 @ X @ NpF @ X
    return _blocks(B0, K)


def chemo_interfaces(
    epsilon: float,
    dx: float,
    q,
    grads,
    phi_response: Callable,
    base: DispersionSpectrum | None = None,
    closure: ClosureCoefficients | None = None,
) -> list[ScatteringDecomposition]:
    """Chemotaxis scattering decompositions for a batch of interface slopes.

    The finite-eps dispersion roots of every interface are bisected in one
    vectorized sweep; the limit closure (gradS-independent) is shared.  The
    leading block I - zeta0*gamma coincides with the radiative-transfer
    one, so interfaces with gradS = 0 reduce to it exactly.
    """
    if epsilon <= 0.0 or dx <= 0.0:
        raise ValueError("epsilon and dx must be positive")
    v, w = q.nodes, q.weights
    K = q.K
    grads = np.atleast_1d(np.asarray(grads, dtype=float))
    phip = np.array([np.asarray(phi_response(v * g), dtype=float) for g in grads])
    if np.any(1.0 - epsilon * np.abs(phip) <= 0.0):
        raise NonPositiveRate(
            f"1 + eps*phi(v*gradS) must be positive; min margin "
            f"{np.min(1.0 - epsilon*np.abs(phip)):.3e}"
        )
    if base is None:
        base = dispersion_roots(q, np.ones(2 * K))
    if closure is None:
        closure = rte_closure(q, base)
    lam0 = base.lambdas
    # first-order eigenvalue shifts, vectorized over interfaces
    lam01 = 3.0 * (phip @ (w * v))
    Sv = np.array(
        [np.sum(w * v / (1 - l * v) ** 2) - np.sum(w * v / (1 + l * v) ** 2) for l in lam0]
    )
    Mphi = (w * v) * (1.0 / (1 - np.outer(lam0, v)) ** 2 + 1.0 / (1 + np.outer(lam0, v)) ** 2)
    lam1 = lam0 * (phip @ Mphi.T) / Sv
    roots = _all_roots_multi(v, w, 1.0 + epsilon * phip, 1.0 - epsilon * phip)
    S0b = np.eye(K) - closure.zeta @ closure.gamma
    S0f = np.block([[np.zeros((K, K)), S0b], [S0b, np.zeros((K, K))]])
    out = []
    for i, g in enumerate(grads):
        N, Nt, _ = _chemo_matrices(epsilon, dx, v, phip[i], roots[i])
        S = _solve_right(N, Nt)
        B0 = _chemo_B0(dx, v, phip[i], lam0, lam1[i], lam01[i], closure)
        if epsilon >= EPS_SWITCH_FACTOR * dx:
            B = _blocks((S - S0f) / epsilon, K)
        else:
            B = B0
        out.append(
            ScatteringDecomposition(
                epsilon=epsilon,
                S_full=S,
                S0_block=S0b,
                B_blocks=B,
                B0_blocks=B0,
                interface_params={"model": "chemo", "dx": dx, "gradS": float(g)},
            )
        )
    return out


def chemo_smatrix(
    epsilon: float,
    dx: float,
    q,
    gradS: float,
    phi_response: Callable,
    expansion: DispersionSpectrum | None = None,
    closure: ClosureCoefficients | None = None,
) -> ScatteringDecomposition:
    """Chemotaxis scattering matrix at one interface with slope gradS.

    The rate T_eps(v) = 1 + eps*phi(v*gradS) must stay positive.  A
    precomputed limit spectrum/closure may be passed; the interface-batch
    path is :func:`chemo_interfaces`.
    """
    base = None
    if expansion is not None:
        base = DispersionSpectrum(lambdas=expansion.lambdas, model_tag="chemo")
    return chemo_interfaces(
        epsilon, dx, q, [gradS], phi_response, base=base, closure=closure
    )[0]


# ---------------------------------------------------------------------------
# Vlasov-Fokker-Planck
# ---------------------------------------------------------------------------


def vfp_closure(q, modes=None) -> ClosureCoefficients:
    """Closure from the eps = 0 Hermite modes (E-independent).

    gamma rows satisfy gamma_l @ psi0_k(V) = delta_kl and annihilate the
    Maxwellian; beta detects the Maxwellian coefficient.  For K = 1 the
    damped families are empty and beta = exp(v_1^2/2kappa).
    """
    del modes  # the eps = 0 mode values are recomputed from (nodes, kappa)
    v = q.nodes
    K = q.K
    kappa = q.kappa
    m = np.exp(-(v**2) / (2.0 * kappa))
    basis = np.column_stack([vfp_psi0(l, v, kappa) for l in range(1, K)] + [m])
    cond = np.linalg.cond(basis)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditioned(f"mode basis condition estimate {cond:.3e} exceeds 1e12")
    X = np.linalg.inv(basis)
    zeta = np.empty((K, K - 1))
    for l in range(1, K):
        zeta[:, l - 1] = vfp_psi0(l, v, kappa) - vfp_psi0(l, -v, kappa)
    return ClosureCoefficients(
        zeta=zeta, gamma=X[:-1, :], beta=X[-1, :], model_tag="vfp"
    )


def _vfp_zero_columns(x, v, epsilon, E, kappa):
    """The two zero-eigenvalue modes in a basis uniform in sign(E).

    psi_H is the space-homogeneous shifted Maxwellian; psi_D is the
    regularized drift combination (kappa/E)(psi_H - c*Psi_G) which tends to
    the secular mode (eps*v - x)*exp(-v^2/2kappa) as E -> 0.
    """
    m = np.exp(-(v**2) / (2.0 * kappa))
    psi_H = np.exp(-((v - epsilon * E) ** 2) / (2.0 * kappa))
    z = epsilon * v - x
    psi_D = (
        m
        * np.exp((2.0 * x - epsilon**2 * E) * E / (2.0 * kappa))
        * z
        * _expm1_over(z * E / kappa)
    )
    return psi_H, psi_D


def _vfp_matrices(epsilon, dx, v, E, kappa):
    """Mode matrices with column groups [psi_+, psi_H, psi_-, psi_D]."""
    K = len(v)
    N = np.empty((2 * K, 2 * K))
    Nt = np.empty((2 * K, 2 * K))
    for l in range(1, K):
        mu = vfp_mu(l, epsilon, E, kappa, +1)
        cp = vfp_psi(l, +1, v, epsilon, E, kappa)
        cn = vfp_psi(l, +1, -v, epsilon, E, kappa)
        e = np.exp(-mu * dx / epsilon)
        N[:, l - 1] = np.concatenate([cp, cn * e])
        Nt[:, l - 1] = np.concatenate([cp * e, cn])
        mu = vfp_mu(l, epsilon, E, kappa, -1)
        cp = vfp_psi(l, -1, v, epsilon, E, kappa)
        cn = vfp_psi(l, -1, -v, epsilon, E, kappa)
        e = np.exp(mu * dx / epsilon)
        N[:, K + l - 1] = np.concatenate([cp * e, cn])
        Nt[:, K + l - 1] = np.concatenate([cp, cn * e])
    hp, dp = _vfp_zero_columns(0.0, v, epsilon, E, kappa)
    hn, dn = _vfp_zero_columns(dx, -v, epsilon, E, kappa)
    N[:, K - 1] = np.concatenate([hp, hn])
    N[:, 2 * K - 1] = np.concatenate([dp, dn])
    hp, dp = _vfp_zero_columns(dx, v, epsilon, E, kappa)
    hn, dn = _vfp_zero_columns(0.0, -v, epsilon, E, kappa)
    Nt[:, K - 1] = np.concatenate([hp, hn])
    Nt[:, 2 * K - 1] = np.concatenate([dp, dn])
    return N, Nt


def _bernoulli_scalar(x: float) -> float:
    if abs(x) < 1e-4:
        return 1.0 - x / 2.0 + x * x / 12.0 - x**4 / 720.0
    return x / np.expm1(x)


def _vfp_B0(dx, v, E, kappa, closure) -> tuple:
    """Closed-form limit blocks with Bernoulli-type prefactors.

    The drift factors E/(kappa(1 - exp(-E dx/kappa))) are evaluated through
    the Bernoulli function, so the formula is uniformly valid through E = 0.
    """
    K = len(v)
    zeta, gamma, beta = closure.zeta, closure.gamma, closure.beta
    m = np.exp(-(v**2) / (2.0 * kappa))
    P = np.eye(K) - zeta @ gamma
    W = 2.0 * np.eye(K) - zeta @ gamma
    u = E * dx / kappa
    b_plus = _bernoulli_scalar(-u) / dx
    b_minus = _bernoulli_scalar(u) / dx
    core = np.outer(W @ (v * m), beta)
    Y = np.zeros((K, K))
    for l in range(1, K):
        col = v * vfp_psi0(l, -v, kappa) + P @ (v * vfp_psi0(l, v, kappa))
        Y += np.outer(col, gamma[l - 1])
    G = E / (2.0 * kappa)
    return (
        b_plus * core,
        G * Y - b_minus * core,
        -G * Y - b_plus * core,
        b_minus * core,
    )


def vfp_smatrix(
    epsilon: float,
    dx: float,
    q,
    E: float,
    kappa: float,
    closure: ClosureCoefficients | None = None,
) -> ScatteringDecomposition:
    """Fokker-Planck scattering matrix at one interface with field E.

    The zero-mode pair is assembled in the regularized basis of
    :func:`_vfp_zero_columns`, which handles both signs of E and the
    degenerate E = 0 case in one formula; the leading block I - zeta*gamma
    is independent of E.
    """
    if epsilon <= 0.0 or dx <= 0.0:
        raise ValueError("epsilon and dx must be positive")
    if kappa != q.kappa:
        raise ValueError("kappa must match the quadrature construction")
    if closure is None:
        closure = vfp_closure(q)
    K = q.K
    N, Nt = _vfp_matrices(epsilon, dx, q.nodes, E, kappa)
    S = _solve_right(N, Nt)
    S0b = np.eye(K) - closure.zeta @ closure.gamma
    B0 = _vfp_B0(dx, q.nodes, E, kappa, closure)
    if epsilon >= EPS_SWITCH_FACTOR * dx:
        Z = np.zeros((K, K))
        B = _blocks((S - np.block([[Z, S0b], [S0b, Z]])) / epsilon, K)
    else:
        B = B0
    return ScatteringDecomposition(
        epsilon=epsilon,
        S_full=S,
        S0_block=S0b,
        B_blocks=B,
        B0_blocks=B0,
        interface_params={"model": "vfp", "dx": dx, "E": E, "kappa": kappa},
    )
