"""Shared conventions: units, vacuum normalisations, rotations, channel bases.

Conventions used throughout the package
---------------------------------------
* Fourier transform ``f(W) = int f(t) exp(+i W t) dt``, so ``d/dt -> -iW``.
* Internal angular frequencies in rad/s; configuration files quote Hz.
* Travelling light quadratures have vacuum PSD 1/4 per quadrature
  (two-sided, symmetrised).
* Oscillator quadratures obey ``[X, P] = i``; ground-state variance is
  1/2 per quadrature, so the two-mode separability threshold is 1.
* The negative-mass character of the spin oscillator enters solely
  through the sign of its resonance frequency.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * np.pi

#: Two-sided symmetrised PSD of a vacuum light quadrature.
VACUUM_LIGHT_PSD = 0.25

#: Ground-state variance of an oscillator quadrature.
OSCILLATOR_VACUUM_VAR = 0.5

#: Sum of two oscillator ground-state variances: the separability threshold.
DUAN_THRESHOLD = 1.0

#: Noise inputs driving the cascaded chain, in the order used by the
#: rectangular transfer matrix.  Order is part of the file format and
#: must never change.
INPUT_CHANNELS = (
    "F_S_X", "F_S_P",        # spin thermal force quadratures
    "F_M",                   # mechanical thermal force
    "X_LS_in", "P_LS_in",    # light entering the spin system
    "X_Lnu", "P_Lnu",        # intersystem-loss vacuum port
    "X_Lex", "P_Lex",        # cavity loss/back-mirror vacuum port
    "X_Leta", "P_Leta",      # detection-loss vacuum port
)

#: Tracked outputs: oscillator quadratures plus the homodyne record.
OUTPUT_CHANNELS = ("X_M", "P_M", "X_S", "P_S", "P_L_meas")

I2 = np.eye(2)


def hz_to_rad(f):
    """Convert an ordinary frequency in Hz to rad/s."""
    return TWO_PI * np.asarray(f, dtype=float)


def rad_to_hz(w):
    """Convert rad/s to Hz."""
    return np.asarray(w, dtype=float) / TWO_PI


def rotation_matrix(alpha: float) -> np.ndarray:
    """Counter-clockwise quadrature rotation ``[[c, -s], [s, c]]``."""
    if not np.isfinite(alpha):
        raise ValueError("rotation angle must be finite")
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s], [s, c]])


def mix_loss(signal, vacuum, transmission: float):
    """Beam-splitter loss: ``sqrt(nu) * signal + sqrt(1 - nu) * vacuum``.

    Any quadrature rotation accompanying the link is applied separately
    by the caller.
    """
    nu = float(transmission)
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {nu}")
    return np.sqrt(nu) * np.asarray(signal) + np.sqrt(1.0 - nu) * np.asarray(vacuum)


def mat2_inv(m: np.ndarray) -> np.ndarray:
    """Closed-form inverse of a (stack of) 2x2 matrices."""
    a = m[..., 0, 0]
    b = m[..., 0, 1]
    c = m[..., 1, 0]
    d = m[..., 1, 1]
    det = a * d - b * c
    out = np.empty_like(m)
    out[..., 0, 0] = d
    out[..., 0, 1] = -b
    out[..., 1, 0] = -c
    out[..., 1, 1] = a
    return out / det[..., None, None]


class FrequencyGrid:
    """Positive-frequency half of a symmetric angular-frequency grid.

    Quantities on the negative half follow from ``S(-W) = conj(S(W))``
    for spectra of real processes, so only ``W >= 0`` is stored.
    `metadata` records the refinement regions (centers and widths) the
    grid was built from.
    """

    def __init__(self, omega: np.ndarray, metadata: dict | None = None):
        omega = np.asarray(omega, dtype=float)
        if omega.ndim != 1 or omega.size < 2:
            raise ConfigError("frequency grid needs at least two points")
        if np.any(np.diff(omega) <= 0):
            raise ConfigError("frequency grid must be strictly increasing")
        if omega[0] < 0:
            raise ConfigError("grid stores the non-negative half only")
        self.omega = omega
        self.metadata = metadata or {}

    def __len__(self):
        return self.omega.size

    @classmethod
    def from_regions(cls, regions, outer: float, *,
                     pts_per_width: int = 24, span_widths: float = 50.0,
                     tail_points: int = 300, refine: int = 1):
        """Build a grid dense around each resonance plus log-spaced tails.

        Parameters
        ----------
        regions : sequence of (center, width)
            Resonance positions (rad/s, absolute value is used) and the
            linewidths setting the local resolution.
        outer : float
            Outermost frequency to cover.
        refine : int
            Multiplies both the local density and the tail point count;
            used for convergence (Richardson-style) checks.
        """
        segments = []
        for center, width in sorted((abs(c), w) for c, w in regions):
            width = max(width, center * 1e-9)
            lo = max(0.0, center - span_widths * width)
            hi = center + span_widths * width
            n_inner = int(2 * span_widths * pts_per_width * refine) + 1
            if segments and lo <= segments[-1][1]:
                prev_lo, prev_hi, prev_n = segments[-1]
                segments[-1] = (prev_lo, max(prev_hi, hi), prev_n + n_inner)
            else:
                segments.append((lo, hi, n_inner))
        pieces = []
        n_bridge = 80 * refine
        # fill below the first dense region, then bridge every gap;
        # power-law tails between resonances need log-spaced nodes
        first_lo = segments[0][0]
        if first_lo > 0:
            anchor = max(first_lo * 1e-3, segments[0][1] * 1e-6)
            pieces.append(np.concatenate(
                [[0.0], np.geomspace(anchor, first_lo, n_bridge)]))
        prev_hi = None
        for lo, hi, n_inner in segments:
            if prev_hi is not None and lo > prev_hi:
                pieces.append(np.geomspace(prev_hi, lo, n_bridge))
            pieces.append(np.linspace(lo, hi, n_inner))
            prev_hi = hi
        if outer > prev_hi:
            pieces.append(np.geomspace(prev_hi, outer, tail_points * refine))
        omega = np.unique(np.concatenate(pieces))
        meta = {"regions": [(float(c), float(w)) for c, w in regions],
                "outer": float(outer), "refine": int(refine)}
        return cls(omega, meta)

    def trapz(self, values: np.ndarray) -> np.ndarray:
        """Trapezoidal integral over the stored positive half, axis 0."""
        return np.trapezoid(values, self.omega, axis=0)

    def full_integral(self, values: np.ndarray) -> np.ndarray:
        """Integral of a Hermitian-symmetric spectrum over the whole axis.

        ``int_-inf^inf S dW`` with ``S(-W) = conj(S(W))`` equals
        ``2 Re int_0^inf S dW``; the tiny imaginary residue is returned
        for consistency checks.
        """
        half = self.trapz(np.asarray(values))
        return half + np.conj(half)


def _filon_weights(theta: np.ndarray):
    """Endpoint weights of ``int_0^1 (1-u) e^(i theta u) du`` and the
    mirrored ``int_0^1 u e^(i theta u) du``, stable for small theta."""
    th = np.asarray(theta)
    small = np.abs(th) < 1e-4
    ths = np.where(small, 1.0, th)  # avoid 0-division in the closed form
    i_th = 1j * ths
    e = np.exp(1j * ths)
    phi1 = e / i_th - (e - 1.0) / i_th**2
    phi0 = (e - 1.0) / i_th - phi1
    # series to O(theta^4)
    t1 = 1j * th
    phi0_s = 0.5 + t1 / 6.0 + t1**2 / 24.0 + t1**3 / 120.0 + t1**4 / 720.0
    phi1_s = 0.5 + t1 / 3.0 + t1**2 / 8.0 + t1**3 / 30.0 + t1**4 / 144.0
    return np.where(small, phi0_s, phi0), np.where(small, phi1_s, phi1)


def inverse_transform(omega: np.ndarray, spectrum: np.ndarray,
                      taus: np.ndarray, chunk: int | None = None) -> np.ndarray:
    """Correlation function from a one-sided sampled spectrum.

    Computes ``C(tau) = (1/pi) Re int_0^inf S(W) exp(i W tau) dW``, the
    Wiener-Khinchin inverse for spectra with ``S(-W) = conj(S(W))``.
    The spectrum is taken piecewise linear between grid nodes and the
    oscillatory factor is integrated exactly per interval (Filon-type),
    so coarse grid regions cost accuracy only through the curvature of
    S, never through the oscillation of ``exp(i W tau)``.

    `spectrum` may be 1-D or (n_omega, k); returns (n_tau,) or (n_tau, k).
    """
    omega = np.asarray(omega, dtype=float)
    s = np.asarray(spectrum)
    squeeze = s.ndim == 1
    if squeeze:
        s = s[:, None]
    taus = np.asarray(taus, dtype=float)
    h = np.diff(omega)
    if chunk is None:
        chunk = max(16, int(4e6 / max(omega.size, 1)))
    out = np.empty((len(taus), s.shape[1]))
    s_lo = np.ascontiguousarray(s[:-1])
    s_hi = np.ascontiguousarray(s[1:])
    for i0 in range(0, len(taus), chunk):
        t = taus[i0:i0 + chunk]
        theta = np.outer(t, h)
        phi0, phi1 = _filon_weights(theta)
        base = np.exp(1j * np.outer(t, omega[:-1])) * h
        out[i0:i0 + len(t)] = ((base * phi0) @ s_lo
                               + (base * phi1) @ s_hi).real / np.pi
    return out[:, 0] if squeeze else out
