"""Conditional estimation by causal Wiener filtering of the homodyne record.

The discretised finite-time Wiener-Hopf system

    sum_k  w_k  C_ii((j - k) dt) = C_Qi(j dt),   j = 0 .. N-1,

is scalar-Toeplitz with four right-hand sides (one per tracked
quadrature) because the meter is a single photocurrent.  The white part
of the measured spectrum contributes its delta mass ``floor/dt`` to the
zero lag analytically; the coloured remainder comes from the numerical
Wiener-Khinchin transform of the model spectra.  Solutions for every
conditioning time up to ``N dt`` fall out of one Levinson-Durbin sweep,
since the recursion visits all leading principal subsystems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import inverse_transform
from .errors import AliasingError, IllConditioned, LengthMismatch, NotPSD, RegimeViolation


@dataclass(frozen=True)
class CorrelationSet:
    """Sampled correlation functions entering the Wiener-Hopf system.

    c_ii[m] is the discrete autocovariance of the sampled record at lag
    m dt (white floor mass included at m = 0); c_qi[q, m] is the
    covariance between quadrature q now and the record m dt ago.
    """

    dt: float
    c_ii: np.ndarray    # (N,)
    c_qi: np.ndarray    # (4, N)
    floor: float        # white PSD removed before transforming

    @property
    def n_taps(self) -> int:
        return self.c_ii.size


@dataclass(frozen=True)
class WienerKernel:
    """Finite-input-response filter for one conditioning time.

    k[q, m] approximates K_q(-m dt, t); the discrete estimate is
    ``Q_q^c = sum_m k[q, m] i(t - m dt) dt``.
    """

    dt: float
    k: np.ndarray       # (4, N_t)

    @property
    def n_taps(self) -> int:
        return self.k.shape[1]

    @property
    def duration(self) -> float:
        return self.n_taps * self.dt

    @property
    def weights(self) -> np.ndarray:
        """Dimensionless tap weights ``k dt`` applied to record samples."""
        return self.k * self.dt


def default_dt(p) -> float:
    """Sampling step resolving the fastest oscillation: period / 8."""
    w_max = max(abs(p.spin.omega_s), p.mech.omega_m0)
    return (2.0 * np.pi / w_max) / 8.0


def check_nyquist(dt: float, p) -> None:
    w_max = max(abs(p.spin.omega_s), p.mech.omega_m0)
    if np.pi / dt < 3.0 * w_max:
        raise AliasingError(
            f"pi/dt = {np.pi / dt:.3e} rad/s below 3*max resonance "
            f"{3 * w_max:.3e}; decrease dt")


def correlations_from_psd(omega: np.ndarray, s_ii: np.ndarray,
                          s_qi: np.ndarray, floor: float, dt: float,
                          n_taps: int, omega_max: float | None = None
                          ) -> CorrelationSet:
    """Sampled correlations from one-sided spectra.

    `omega` is the positive-half grid; `s_ii` the real measured PSD,
    `s_qi` the (n, 4) cross spectra, `floor` the analytic white level of
    `s_ii`.  Grid must resolve 1/(N dt): the lowest nonzero grid
    frequency has to lie below ``2 pi / (N dt)``.
    """
    if omega_max is not None and np.pi / dt < omega_max:
        raise AliasingError("sampling violates the Nyquist condition")
    taus = dt * np.arange(n_taps)
    c_col = inverse_transform(omega, s_ii - floor, taus)
    c_ii = c_col.copy()
    c_ii[0] += floor / dt
    c_qi = inverse_transform(omega, s_qi, taus).T
    return CorrelationSet(dt=dt, c_ii=c_ii, c_qi=np.ascontiguousarray(c_qi),
                          floor=floor)


def levinson_solve(first_col: np.ndarray, rhs: np.ndarray,
                   checkpoints=None):
    """Solve ``toeplitz(first_col) X = rhs`` by Levinson-Durbin recursion.

    `rhs` has shape (N,) or (N, k).  With `checkpoints` (sorted iterable
    of system sizes) the intermediate solutions of the leading principal
    subsystems are returned as ``{size: X_size}`` alongside the full
    solution - the recursion produces them for free.

    Raises IllConditioned when a reflection coefficient reaches unit
    magnitude (Toeplitz matrix numerically singular).
    """
    c = np.asarray(first_col, dtype=float)
    b = np.atleast_2d(np.asarray(rhs, dtype=float).T).T  # (N, k)
    n = c.size
    if b.shape[0] != n:
        raise LengthMismatch("rhs length does not match Toeplitz order")
    if c[0] <= 0:
        raise IllConditioned("Toeplitz diagonal must be positive")
    r = c[1:] / c[0]
    bb = b / c[0]
    x = np.zeros_like(bb)
    y = np.zeros(n - 1) if n > 1 else np.zeros(0)
    collected = {}
    want = sorted(set(checkpoints)) if checkpoints else []
    x[0] = bb[0]
    if 1 in want:
        collected[1] = x[:1].copy()
    if n > 1:
        y[0] = -r[0]
        alpha = -r[0]
        beta = 1.0
        for k in range(1, n):
            if abs(alpha) >= 1.0 - 1e-10:
                raise IllConditioned(
                    f"reflection coefficient at unity (step {k})")
            beta *= (1.0 - alpha * alpha)
            mu = (bb[k] - r[:k][::-1] @ x[:k]) / beta
            x[:k] += mu[None, :] * y[k - 1::-1, None]
            x[k] = mu
            if (k + 1) in want:
                collected[k + 1] = x[:k + 1].copy()
            if k < n - 1:
                alpha = -(r[k] + r[:k][::-1] @ y[:k]) / beta
                y[:k] += alpha * y[k - 1::-1]
                y[k] = alpha
    sol = x if rhs.ndim > 1 else x[:, 0]
    if checkpoints is None:
        return sol
    return sol, collected


def solve_wiener(corr: CorrelationSet, n_taps: int | None = None,
                 checkpoints=None):
    """Solve the discretised Wiener-Hopf system.

    Returns the kernel for the full window, or ``(kernel, {size: kernel})``
    when intermediate conditioning times are requested.
    """
    n = n_taps or corr.n_taps
    rhs = corr.c_qi[:, :n].T                     # (N, 4)
    if checkpoints is None:
        w = levinson_solve(corr.c_ii[:n], rhs)
        return WienerKernel(dt=corr.dt, k=w.T / corr.dt)
    w, inter = levinson_solve(corr.c_ii[:n], rhs, checkpoints=checkpoints)
    kernels = {size: WienerKernel(dt=corr.dt, k=arr.T / corr.dt)
               for size, arr in inter.items()}
    return WienerKernel(dt=corr.dt, k=w.T / corr.dt), kernels


def conditional_covariance(v_u: np.ndarray, kernel: WienerKernel,
                           corr: CorrelationSet):
    """(V_be, V_c) for the conditioning time of `kernel`.

    ``V_be[p, q] = sum_m w_q[m] C_{Q_p i}(m dt)`` (symmetrised), and
    ``V_c = V_u - V_be``.
    """
    n = kernel.n_taps
    if n > corr.n_taps:
        raise LengthMismatch("kernel longer than available correlations")
    w = kernel.weights                            # (4, n)
    v_be = corr.c_qi[:, :n] @ w.T                 # rows p, cols q
    v_be = 0.5 * (v_be + v_be.T)
    v_c = v_u - v_be
    tr = np.trace(v_c)
    min_eig = np.linalg.eigvalsh(v_c).min()
    if min_eig < -1e-6 * tr:
        raise NotPSD(f"conditional covariance has eigenvalue {min_eig:.3e} "
                     f"(trace {tr:.3e}): inconsistent inputs")
    return v_be, v_c


def conditional_ladder(v_u: np.ndarray, corr: CorrelationSet,
                       sizes) -> tuple[list, np.ndarray]:
    """Kernels and V_c(t) on a ladder of conditioning times.

    `sizes` are tap counts (t = size * dt); one Levinson sweep serves
    all of them.  Returns (kernels, v_c_stack) ordered by size.
    """
    sizes = sorted(set(int(s) for s in sizes))
    _, kernels = solve_wiener(corr, n_taps=max(sizes), checkpoints=sizes)
    v_cs = []
    out = []
    for s in sizes:
        k = kernels[s]
        _, v_c = conditional_covariance(v_u, k, corr)
        out.append(k)
        v_cs.append(v_c)
    return out, np.array(v_cs)


def conditional_trajectory(record: np.ndarray, kernel: WienerKernel,
                           dt: float | None = None) -> np.ndarray:
    """Apply the filter to a sampled record.

    Returns (4, M) with entry [:, m] the estimate at sample m using the
    previous ``n_taps`` samples; the first ``n_taps - 1`` outputs, where
    the window is not yet filled, are NaN.
    """
    i = np.asarray(record, dtype=float)
    if i.ndim != 1:
        raise LengthMismatch("record must be one-dimensional")
    if dt is not None and not np.isclose(dt, kernel.dt, rtol=1e-9):
        raise LengthMismatch("record and kernel sampling rates differ")
    n = kernel.n_taps
    if i.size < n:
        raise LengthMismatch("record shorter than the filter window")
    out = np.full((4, i.size), np.nan)
    w = kernel.weights
    for q in range(4):
        out[q, n - 1:] = np.convolve(i, w[q], mode="valid")
    return out


def predicted_mse(v_u_diag: np.ndarray, kernel: WienerKernel,
                  corr: CorrelationSet) -> np.ndarray:
    """Model mean-square estimation error for an arbitrary kernel.

    ``mse_q = V_u[q,q] - 2 w_q . c_qi + w_q^T T w_q`` with T the
    Toeplitz matrix of the record autocovariance; minimised exactly by
    the Wiener solution.
    """
    from scipy.linalg import toeplitz

    n = kernel.n_taps
    t = toeplitz(corr.c_ii[:n])
    w = kernel.weights
    quad = np.einsum("qm,mn,qn->q", w, t, w)
    lin = 2.0 * np.einsum("qm,qm->q", w, corr.c_qi[:, :n])
    return np.asarray(v_u_diag) - lin + quad


def filter_frequency_response(kernel: WienerKernel, n_freq: int = 4096):
    """Peak-normalised discrete-time frequency response of the filter.

    ``K_q(W) = dt sum_m k[q, m] exp(-i W m dt)`` evaluated on a uniform
    grid up to Nyquist; returns (omega, response) with response shaped
    (4, n_freq), scaled so the largest magnitude row peak is one.
    """
    n_pad = max(n_freq * 2, kernel.n_taps * 2)
    resp = np.fft.rfft(kernel.weights, n=n_pad, axis=1)
    omega = 2.0 * np.pi * np.fft.rfftfreq(n_pad, kernel.dt)
    peak = np.abs(resp).max()
    return omega, resp / (peak if peak > 0 else 1.0)


def closed_form_limits(eta: float, c_q: float, Gamma: float, gamma: float,
                       n: float, mode: str) -> float:
    """Idealised steady-state conditional variances (QND, RWA).

    mode='single': ``sqrt(1/(2 eta)) sqrt(1 + (gamma/Gamma) V_u1)`` with
    ``V_u1 = (1 + 2n)(1 + C_q)``; the Heisenberg floor keeps this >= 1
    at eta = 1.  mode='epr': ``sqrt((gamma/Gamma) V_u / (2 eta))`` with
    ``V_u = 1 + 2n``; ideal backaction cancellation removes the floor.

    Validity requires fast readout; raises RegimeViolation when
    ``sqrt(8 eta V_u Gamma / gamma) <= 3``.
    """
    if mode not in ("single", "epr"):
        raise ValueError("mode must be 'single' or 'epr'")
    if not np.isclose(c_q, Gamma / (gamma * (2.0 * n + 1.0)), rtol=1e-6):
        raise ValueError("inconsistent (c_q, Gamma, gamma, n)")
    if mode == "single":
        v_u = (1.0 + 2.0 * n) * (1.0 + c_q)
    else:
        v_u = 1.0 + 2.0 * n
    if np.sqrt(8.0 * eta * v_u * Gamma / gamma) <= 3.0:
        raise RegimeViolation("fast-readout condition violated: "
                              "sqrt(8 eta V_u Gamma/gamma) <= 3")
    if mode == "single":
        return float(np.sqrt(0.5 / eta) * np.sqrt(1.0 + (gamma / Gamma) * v_u))
    return float(np.sqrt(0.5 / eta) * np.sqrt(gamma * v_u / Gamma))
