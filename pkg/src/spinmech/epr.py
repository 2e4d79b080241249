"""EPR-variable construction, variance minimisation and the Duan witness.

The joint variables use a spin-basis rotation by beta followed by a
relative weight a (rotate-then-weight convention):

    X_epr = (X_M - a X_S') / sqrt(1 + a^2),
    P_epr = (P_M + a P_S') / sqrt(1 + a^2),

with X_S' = X_S cos(beta) + P_S sin(beta) and
P_S' = P_S cos(beta) - X_S sin(beta).  For these normalised weights the
separability threshold of the summed variance is exactly 1 (two
oscillator ground states of 1/2 each); any value below witnesses
entanglement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import DUAN_THRESHOLD, rotation_matrix
from .errors import ConfigError


@dataclass(frozen=True)
class EprWeights:
    """Relative spin weight a > 0 and spin rotation angle beta (rad)."""

    a: float
    beta: float

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError("EPR weight a must be positive")

    @property
    def u_x(self) -> np.ndarray:
        norm = np.sqrt(1.0 + self.a**2)
        return np.array([1.0, 0.0, -self.a * np.cos(self.beta),
                         -self.a * np.sin(self.beta)]) / norm

    @property
    def u_p(self) -> np.ndarray:
        norm = np.sqrt(1.0 + self.a**2)
        return np.array([0.0, 1.0, -self.a * np.sin(self.beta),
                         self.a * np.cos(self.beta)]) / norm

    @property
    def u_x_conj(self) -> np.ndarray:
        """Canonically conjugate partner of u_x (the '+a' combination)."""
        norm = np.sqrt(1.0 + self.a**2)
        return np.array([1.0, 0.0, self.a * np.cos(self.beta),
                         self.a * np.sin(self.beta)]) / norm

    @property
    def u_p_conj(self) -> np.ndarray:
        norm = np.sqrt(1.0 + self.a**2)
        return np.array([0.0, 1.0, self.a * np.sin(self.beta),
                         -self.a * np.cos(self.beta)]) / norm


def epr_variance(v: np.ndarray, w: EprWeights) -> float:
    """Summed variance ``u_x^T V u_x + u_p^T V u_p``."""
    v = np.asarray(v, dtype=float)
    return float(w.u_x @ v @ w.u_x + w.u_p @ v @ w.u_p)


def _variance_grid(v: np.ndarray, a: np.ndarray, beta: np.ndarray):
    """Vectorised V_{a,beta} on an (len(a), len(beta)) grid."""
    aa = a[:, None]
    cb, sb = np.cos(beta)[None, :], np.sin(beta)[None, :]
    norm2 = 1.0 + aa**2
    ux = np.stack(np.broadcast_arrays(
        np.ones_like(aa * cb), np.zeros_like(aa * cb),
        -aa * cb, -aa * sb), axis=-1) / np.sqrt(norm2)[..., None]
    up = np.stack(np.broadcast_arrays(
        np.zeros_like(aa * cb), np.ones_like(aa * cb),
        -aa * sb, aa * cb), axis=-1) / np.sqrt(norm2)[..., None]
    return (np.einsum("abi,ij,abj->ab", ux, v, ux)
            + np.einsum("abi,ij,abj->ab", up, v, up))


def minimize_epr(v: np.ndarray, a_max: float = 10.0,
                 n_a: int = 200, n_beta: int = 180):
    """Global minimum of the EPR variance over (a, beta).

    Coarse grid search followed by local refinement; ties on the grid
    break toward smaller a, then smaller |beta|.  Returns
    (a_star, beta_star, v_star).
    """
    v = np.asarray(v, dtype=float)
    a_grid = np.linspace(a_max / n_a, a_max, n_a)
    beta_grid = np.linspace(-np.pi, np.pi, n_beta, endpoint=False)
    vals = _variance_grid(v, a_grid, beta_grid)
    vmin = vals.min()
    ia, ib = np.where(vals <= vmin * (1.0 + 1e-12))
    order = np.lexsort((np.abs(beta_grid[ib]), a_grid[ia]))
    ia, ib = ia[order[0]], ib[order[0]]

    def objective(x):
        return epr_variance(v, EprWeights(a=max(x[0], 1e-9), beta=x[1]))

    res = minimize(objective, x0=[a_grid[ia], beta_grid[ib]],
                   method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    a_star = float(np.clip(res.x[0], 1e-9, a_max))
    beta_star = float((res.x[1] + np.pi) % (2.0 * np.pi) - np.pi)
    v_star = epr_variance(v, EprWeights(a=a_star, beta=beta_star))
    return a_star, beta_star, v_star


def null_antidiagonal_rotation(v: np.ndarray) -> float:
    """Spin rotation angle nulling the cross-quadrature covariances.

    Finds beta such that Cov(X_M, P_S') and Cov(P_M, X_S') vanish (in
    the least-squares sense when exact nulling is impossible): the
    minimiser of a quadratic form on the unit circle, i.e. the smallest
    eigenvector of a 2x2 Gram matrix.
    """
    v = np.asarray(v, dtype=float)
    m1 = np.array([v[0, 3], -v[0, 2]])   # Cov(X_M, P_S') = c*V03 - s*V02
    m2 = np.array([v[1, 2], v[1, 3]])    # Cov(P_M, X_S') = c*V12 + s*V13
    gram = np.outer(m1, m1) + np.outer(m2, m2)
    eigval, eigvec = np.linalg.eigh(gram)
    c, s = eigvec[:, 0]
    beta = float(np.arctan2(s, c))
    if beta <= -np.pi / 2:
        beta += np.pi
    elif beta > np.pi / 2:
        beta -= np.pi
    return beta


def rotate_spin_basis(v: np.ndarray, beta: float) -> np.ndarray:
    """Covariance in the basis (X_M, P_M, X_S', P_S')."""
    t = np.eye(4)
    t[2:, 2:] = rotation_matrix(beta).T  # X' = c X + s P, P' = -s X + c P
    return t @ np.asarray(v, dtype=float) @ t.T


def epr_basis_covariance(v: np.ndarray, w: EprWeights) -> np.ndarray:
    """Covariance in the basis (X_epr, P_epr, X_epr', P_epr')."""
    t = np.vstack([w.u_x, w.u_p, w.u_x_conj, w.u_p_conj])
    return t @ np.asarray(v, dtype=float) @ t.T


def demodulate_trajectory(xy: np.ndarray, omega: float, t: np.ndarray):
    """Co-rotating-frame view of a two-component trajectory.

    Applies the rotation O(omega t) sample by sample; with omega chosen
    near the joint resonance the result is the slowly varying
    phase-space trajectory.
    """
    xy = np.asarray(xy, dtype=float)
    if xy.shape[0] != 2:
        raise ConfigError("expected a (2, n) trajectory")
    wt = omega * np.asarray(t, dtype=float)
    c, s = np.cos(wt), np.sin(wt)
    return np.vstack([c * xy[0] - s * xy[1], s * xy[0] + c * xy[1]])


def duan_threshold() -> float:
    return DUAN_THRESHOLD
