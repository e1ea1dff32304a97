"""Case eigenvalues/eigenfunctions and Fokker-Planck Hermite eigenmodes.

The integral-collision models (radiative transfer, chemotaxis) have discrete
eigenvalues given by the poles-and-roots structure of

    g(lambda) = sum_{k=-K..K} w_k / (T(v_k)/v_k - lambda) = 0,

with one root strictly between consecutive poles T(v_k)/v_k.  The
Fokker-Planck model instead uses Hermite-type modes

    psi_{+-l}(v) = exp(-mu v) H_l(vt) exp(-vt^2),
    mu_{+-l} = (-eps*E +- sqrt((eps*E)^2 + 4*kappa*l)) / (2*kappa),
    vt = (v - 2*mu*kappa - eps*E) / sqrt(2*kappa).

Everything here is a pure function of its inputs.
"""

from dataclasses import dataclass
from typing import Callable, TYPE_CHECKING

import numpy as np

from .errors import BracketFailure, PoleHit

if TYPE_CHECKING:  # pragma: no cover
    from .quadrature import VelocityQuadrature

_MAX_HERMITE = 64
_BISECT_RTOL = 1e-14
_BISECT_MAXIT = 200


@dataclass(frozen=True, eq=False)
class DispersionSpectrum:
    """Positive eigenvalues of a discrete dispersion relation.

    ``lambdas`` holds the K-1 positive roots in ascending order.  For an
    uneven rate T the simple root in the middle pole interval is kept in
    ``lambda0`` (it collapses onto 0 when T is even and is then omitted).
    ``lambda_first_order``/``lambda0_first_order`` carry the O(eps)
    expansion coefficients when produced by :func:`chemo_eigen_expansion`.
    """

    lambdas: np.ndarray
    model_tag: str
    lambda0: float | None = None
    lambda0_first_order: float | None = None
    lambda_first_order: np.ndarray | None = None

    def to_json(self) -> dict:
        return {
            "model": self.model_tag,
            "lambdas": [float(x) for x in self.lambdas],
            "lambda0": self.lambda0,
            "lambda0_first_order": self.lambda0_first_order,
            "lambda_first_order": None
            if self.lambda_first_order is None
            else [float(x) for x in self.lambda_first_order],
        }

    @classmethod
    def from_json(cls, record: dict) -> "DispersionSpectrum":
        lam1 = record.get("lambda_first_order")
        return cls(
            lambdas=np.asarray(record["lambdas"], dtype=float),
            model_tag=record["model"],
            lambda0=record.get("lambda0"),
            lambda0_first_order=record.get("lambda0_first_order"),
            lambda_first_order=None if lam1 is None else np.asarray(lam1, dtype=float),
        )


def hermite_poly(ell: int, x):
    """Physicists' Hermite polynomial H_ell via H_{l+1} = 2x H_l - 2l H_{l-1}."""
    if ell < 0 or ell > _MAX_HERMITE:
        raise ValueError(f"ell must be in [0, {_MAX_HERMITE}], got {ell}")
    x = np.asarray(x, dtype=float)
    h = np.ones_like(x)
    if ell == 0:
        return h if h.ndim else float(h)
    hm, h = h, 2.0 * x
    for n in range(1, ell):
        hm, h = h, 2.0 * x * h - 2.0 * n * hm
    return h if h.ndim else float(h)


def case_phi(lam: float, v: float, T_of_v: float) -> float:
    """Case eigenfunction value 1/(T(v) - lambda*v)."""
    denom = T_of_v - lam * v
    if abs(denom) < 1e-300:
        raise PoleHit(f"T(v) - lambda*v = {denom} at v={v}, lambda={lam}")
    return 1.0 / denom


def _all_roots_multi(nodes, weights, T_pos, T_neg):
    """All 2K-1 dispersion roots, one per open pole interval, for a batch
    of rate samples.  T_pos, T_neg have shape (M, K); result (M, 2K-1).

    g is strictly increasing between consecutive poles, so every interval
    brackets exactly one root; all brackets are bisected in lockstep.
    """
    T_pos = np.atleast_2d(np.asarray(T_pos, dtype=float))
    T_neg = np.atleast_2d(np.asarray(T_neg, dtype=float))
    poles = np.sort(np.concatenate([-T_neg / nodes, T_pos / nodes], axis=1), axis=1)

    def g(lam):  # lam shape (M, 2K-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            right = weights / (T_pos[:, None, :] / nodes - lam[..., None])
            left = weights / (-T_neg[:, None, :] / nodes - lam[..., None])
        return right.sum(axis=2) + left.sum(axis=2)

    width = np.diff(poles, axis=1)
    lo = poles[:, :-1] + 1e-13 * width
    hi = poles[:, 1:] - 1e-13 * width
    glo, ghi = g(lo), g(hi)
    if not (np.all(glo < 0.0) and np.all(ghi > 0.0)):
        raise BracketFailure("no sign change in some pole interval; check T values")
    for _ in range(_BISECT_MAXIT):
        mid = 0.5 * (lo + hi)
        low = g(mid) < 0.0
        lo = np.where(low, mid, lo)
        hi = np.where(low, hi, mid)
        if np.all(hi - lo <= _BISECT_RTOL * (1.0 + np.abs(mid))):
            break
    return 0.5 * (lo + hi)


def _all_roots(nodes, weights, T_pos, T_neg):
    return _all_roots_multi(nodes, weights, T_pos, T_neg)[0]


def dispersion_roots(q: "VelocityQuadrature", T_values) -> DispersionSpectrum:
    """Positive eigenvalues of the dispersion relation for rate T at +-nodes.

    Parameters
    ----------
    q : VelocityQuadrature
        Unit-interval quadrature carrying (nodes, weights).
    T_values : array, length 2K
        Rate samples ordered (T(v_1..v_K), T(-v_1..-v_K)); all positive.

    Returns
    -------
    DispersionSpectrum
        The K-1 roots bracketed by consecutive positive poles, each located
        by bisection to relative tolerance 1e-14.  For uneven T the middle
        root is reported in ``lambda0``; for even T it is identically zero
        and omitted.
    """
    T_values = np.asarray(T_values, dtype=float)
    K = q.K
    if T_values.shape != (2 * K,):
        raise ValueError(f"T_values must have length {2*K}")
    if np.any(T_values <= 0.0):
        raise ValueError("T_values must be positive")
    T_pos, T_neg = T_values[:K], T_values[K:]
    roots = _all_roots(q.nodes, q.weights, T_pos, T_neg)
    even = np.allclose(T_pos, T_neg, rtol=0.0, atol=1e-15)
    lam0 = None if even else float(roots[K - 1])
    return DispersionSpectrum(
        lambdas=roots[K:], model_tag="rte" if even else "chemo", lambda0=lam0
    )


def chemo_eigen_expansion(
    q: "VelocityQuadrature",
    gradS: float,
    phi_response: Callable[[np.ndarray], np.ndarray],
    base: DispersionSpectrum | None = None,
) -> DispersionSpectrum:
    """Leading and first-order eigenvalue expansion for the tumbling rate
    T_eps = 1 + eps*phi(v*gradS).

    The zeroth-order roots solve the even (T=1) dispersion relation.  The
    double zero eigenvalue splits at first order with

        lambda0^1 = 3 * sum_{k>0} w_k v_k phi(v_k gradS),

    and the nonzero branches shift by the quotient

        lambda_l^1 = lambda_l^0 * S_phi(l) / S_v(l),

    with S_v, S_phi the +-K sums of w v/(1 -+ lambda^0 v)^2 against 1 and
    phi respectively.
    """
    v, w = q.nodes, q.weights
    if base is None:
        base = dispersion_roots(q, np.ones(2 * q.K))
    lam0 = base.lambdas
    phip = np.asarray(phi_response(v * gradS), dtype=float)
    lam01 = 3.0 * float(np.sum(w * v * phip))
    # full +-K sums; the k -> -k half folds with phi odd
    Sv = np.array(
        [np.sum(w * v / (1 - l * v) ** 2) - np.sum(w * v / (1 + l * v) ** 2) for l in lam0]
    )
    Sph = np.array(
        [
            np.sum(w * v * phip / (1 - l * v) ** 2)
            + np.sum(w * v * phip / (1 + l * v) ** 2)
            for l in lam0
        ]
    )
    lam1 = lam0 * Sph / Sv
    return DispersionSpectrum(
        lambdas=lam0,
        model_tag="chemo",
        lambda0_first_order=lam01,
        lambda_first_order=lam1,
    )


# ---------------------------------------------------------------------------
# Vlasov-Fokker-Planck Hermite modes
# ---------------------------------------------------------------------------


def vfp_mu(ell: int, epsilon: float, E: float, kappa: float, sign: int) -> float:
    """Spatial decay rate mu_{+-ell} of the ell-th Fokker-Planck mode."""
    return (-epsilon * E + sign * np.sqrt((epsilon * E) ** 2 + 4.0 * kappa * ell)) / (
        2.0 * kappa
    )


def vfp_psi(ell: int, sign: int, v, epsilon: float, E: float, kappa: float):
    """Finite-eps mode psi_{+-ell}(v) for ell >= 1."""
    if ell < 1:
        raise ValueError("vfp_psi handles ell >= 1; zero modes are E-branch specific")
    v = np.asarray(v, dtype=float)
    mu = vfp_mu(ell, epsilon, E, kappa, sign)
    vt = (v - 2.0 * mu * kappa - epsilon * E) / np.sqrt(2.0 * kappa)
    return np.exp(-mu * v) * hermite_poly(ell, vt) * np.exp(-(vt**2))


def vfp_psi0(ell: int, v, kappa: float):
    """eps -> 0 limit of the ell-th mode; independent of the field E.

    For ell = 0 this is the Maxwellian exp(-v^2/2kappa); the ell >= 1 limits
    obey psi0_{-ell}(-v) = (-1)^ell psi0_ell(v).
    """
    v = np.asarray(v, dtype=float)
    if ell == 0:
        return np.exp(-(v**2) / (2.0 * kappa))
    root = np.sqrt(ell / kappa)
    return hermite_poly(ell, (v - 2.0 * np.sqrt(ell * kappa)) / np.sqrt(2.0 * kappa)) * np.exp(
        -(v**2) / (2.0 * kappa) + v * root - 2.0 * ell
    )


@dataclass(frozen=True, eq=False)
class VfpModeTable:
    """Tabulated mu_{+-ell} and psi_{+-ell}(+-nodes) for ell = 0..K-1.

    ``psi_plus``/``psi_minus`` are (2K, K) matrices whose column ell stacks
    the mode values at (+nodes, -nodes); column 0 holds the two
    zero-eigenvalue diffusion modes with the E-sign branch:
    for E >= 0 the +0 mode is the shifted Maxwellian exp(-(v-eps E)^2/2kappa)
    and the -0 mode is the pure Maxwellian, and conversely for E < 0.
    """

    max_ell: int
    epsilon: float
    E: float
    kappa: float
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray


def vfp_modes(epsilon: float, E: float, kappa: float, q: "VelocityQuadrature") -> VfpModeTable:
    """Tabulate the 2K truncated Fokker-Planck modes on the quadrature nodes."""
    if q.domain_tag != "real_line":
        raise ValueError("vfp_modes requires a real_line quadrature")
    v = q.nodes
    K = q.K
    pm = np.concatenate([v, -v])
    if E >= 0.0:
        mu0, mum0 = 0.0, -epsilon * E / kappa
        psi0 = np.exp(-((pm - epsilon * E) ** 2) / (2.0 * kappa))
        psim0 = np.exp(-(pm**2) / (2.0 * kappa))
    else:
        mu0, mum0 = -epsilon * E / kappa, 0.0
        psi0 = np.exp(-(pm**2) / (2.0 * kappa))
        psim0 = np.exp(-((pm - epsilon * E) ** 2) / (2.0 * kappa))
    mu_plus = np.array([mu0] + [vfp_mu(l, epsilon, E, kappa, +1) for l in range(1, K)])
    mu_minus = np.array([mum0] + [vfp_mu(l, epsilon, E, kappa, -1) for l in range(1, K)])
    psi_plus = np.column_stack(
        [psi0] + [vfp_psi(l, +1, pm, epsilon, E, kappa) for l in range(1, K)]
    )
    psi_minus = np.column_stack(
        [psim0] + [vfp_psi(l, -1, pm, epsilon, E, kappa) for l in range(1, K)]
    )
    return VfpModeTable(
        max_ell=K - 1,
        epsilon=epsilon,
        E=E,
        kappa=kappa,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        psi_plus=psi_plus,
        psi_minus=psi_minus,
    )
