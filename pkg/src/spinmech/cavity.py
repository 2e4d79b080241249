"""Exact linearised cavity-optomechanics in the frequency domain.

The driven cavity plus a single mechanical mode solve the 3x3 system

    [[k/2 - iW,  Delta,     2g sin(psi_in)],
     [-Delta,    k/2 - iW, -2g cos(psi_in)],
     [-4g cos(psi_in), -4g sin(psi_in), 1/chi_m00]]
        (X_cav, P_cav, X_M) = (drive terms),

which is condensed into the 2x2 blocks

    A = [[k/2 - iW, Delta], [-Delta, k/2 - iW]],  B = (0, -2g)^T,
    C = (-4g, 0),  Y = A - B chi_m00 C,
    chi_m = (1/chi_m00 - C A^-1 B)^-1.

No optical spring or damping is inserted by hand; both emerge from the
exact blocks.  The simplified readout rate / sideband asymmetry path
exists for cross-checks and closed-form limits only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import I2, mat2_inv, rotation_matrix
from .errors import ConfigError
from .params import OptoMechParams


@dataclass(frozen=True)
class CavityBlocks:
    """Frequency-dependent response blocks; arrays broadcast over W."""

    A: np.ndarray        # (..., 2, 2)
    B: np.ndarray        # (2, 1)
    C: np.ndarray        # (1, 2)
    chi_m00: np.ndarray  # intrinsic mechanical susceptibility
    chi_m: np.ndarray    # including dynamical backaction
    Y: np.ndarray        # effective cavity response (..., 2, 2)


def cavity_blocks(omega, p: OptoMechParams) -> CavityBlocks:
    if p.kappa <= 0:
        raise ConfigError("kappa must be positive")
    om = np.asarray(omega, dtype=float)
    d = p.kappa / 2.0 - 1j * om
    A = np.zeros(om.shape + (2, 2), dtype=complex)
    A[..., 0, 0] = d
    A[..., 0, 1] = p.Delta
    A[..., 1, 0] = -p.Delta
    A[..., 1, 1] = d
    B = np.array([[0.0], [-2.0 * p.g]])
    C = np.array([[-4.0 * p.g, 0.0]])
    chi_m00 = p.omega_m0 / (p.omega_m0**2 - om**2 - 1j * om * p.gamma_m0)
    # C A^-1 B only needs the (1, 0) entry of A^-1
    det = d * d + p.Delta**2
    ca_inv_b = 8.0 * p.g**2 * (-p.Delta) / det
    chi_m = 1.0 / (1.0 / chi_m00 - ca_inv_b)
    Y = A - chi_m00[..., None, None] * (B @ C)
    return CavityBlocks(A=A, B=B, C=C, chi_m00=chi_m00, chi_m=chi_m, Y=Y)


def lorentzian(omega, p: OptoMechParams):
    """Complex Lorentzian sideband amplitude and its phase.

    ``L(W) = (k/2) / (k/2 - i (W + Delta))``; returns (L, arg L).
    """
    om = np.asarray(omega, dtype=float)
    val = (p.kappa / 2.0) / (p.kappa / 2.0 - 1j * (om + p.Delta))
    return val, np.angle(val)


def shifted_resonance(p: OptoMechParams) -> float:
    """Mechanical resonance shifted by the optical spring.

    Located as the peak of |chi_m| near omega_m0; the shift is small in
    all regimes of interest, so a bracketed golden search suffices.
    """
    from scipy.optimize import minimize_scalar

    def neg_mag(w):
        return -abs(cavity_blocks(np.atleast_1d(w), p).chi_m[0])

    half = 0.2 * p.omega_m0
    res = minimize_scalar(neg_mag, bounds=(p.omega_m0 - half, p.omega_m0 + half),
                          method="bounded", options={"xatol": p.omega_m0 * 1e-12})
    return float(res.x)


def readout_and_asymmetry(p: OptoMechParams, use_shifted: bool = True):
    """Reduced-model readout rate and sideband asymmetry.

    Gamma_m = (4 g^2 / k) (|L(w_m)| + |L(-w_m)|)^2,
    zeta_m  = (|L(w_m)| - |L(-w_m)|) / (|L(w_m)| + |L(-w_m)|),

    evaluated at the optical-spring-shifted resonance (the stated
    narrowband approximation point) unless `use_shifted` is false.
    """
    w = shifted_resonance(p) if use_shifted and p.g > 0 else p.omega_m0
    lp, _ = lorentzian(w, p)
    lm, _ = lorentzian(-w, p)
    ssum = abs(lp) + abs(lm)
    Gamma_m = 4.0 * p.g**2 / p.kappa * ssum**2
    zeta_m = (abs(lp) - abs(lm)) / ssum
    return Gamma_m, zeta_m


def gamma_broadened(p: OptoMechParams) -> float:
    """Total mechanical linewidth including dynamical backaction."""
    Gamma_m, zeta_m = readout_and_asymmetry(p)
    return p.gamma_m0 + 2.0 * zeta_m * Gamma_m


def coupling_for_readout(p: OptoMechParams, Gamma_target: float) -> float:
    """Coupling g that realises a wanted readout rate for this cavity."""
    g = np.sqrt(Gamma_target * p.kappa) / 4.0
    for _ in range(4):
        trial = OptoMechParams(omega_m0=p.omega_m0, gamma_m0=p.gamma_m0,
                               kappa=p.kappa, kappa_in=p.kappa_in,
                               Delta=p.Delta, g=g, n_m0=p.n_m0)
        Gamma_now, _ = readout_and_asymmetry(trial)
        g *= np.sqrt(Gamma_target / Gamma_now)
    return float(g)


def _input_transfer(blocks: CavityBlocks, p: OptoMechParams):
    """Row mapping the rotated cavity drive onto X_M: -chi_m00 C Y^-1 O_in^T."""
    y_inv = mat2_inv(blocks.Y)
    o_in = rotation_matrix(p.psi_in)
    return -blocks.chi_m00[..., None, None] * (blocks.C @ y_inv @ o_in.T)


def mech_response(omega, p: OptoMechParams, x_in, x_ex, f_m):
    """Mechanical amplitude X_M driven through both ports and the bath.

    Returns (X_M, P_M) with ``P_M = -iW X_M / w_m0``.
    """
    om = np.asarray(omega, dtype=float)
    blocks = cavity_blocks(om, p)
    row = _input_transfer(blocks, p)
    drive = (np.sqrt(p.kappa_in) * np.asarray(x_in, dtype=complex)
             + np.sqrt(p.kappa_ex) * np.asarray(x_ex, dtype=complex))
    x_m = (row @ drive[..., None])[..., 0, 0] + blocks.chi_m * np.asarray(f_m)
    return x_m, -1j * om * x_m / p.omega_m0


def cavity_io(omega, p: OptoMechParams, x_in, x_ex, f_m):
    """Reflected field off the coupler port, all rotations included."""
    om = np.asarray(omega, dtype=float)
    blocks = cavity_blocks(om, p)
    r_in, r_ex, r_f = reflection_blocks(blocks, p)
    out = (r_in @ np.asarray(x_in, dtype=complex)[..., None]
           + r_ex @ np.asarray(x_ex, dtype=complex)[..., None]
           + r_f * np.asarray(f_m)[..., None, None])
    return out[..., 0]


def reflection_blocks(blocks: CavityBlocks, p: OptoMechParams):
    """2x2 (and 2x1) blocks of the reflection input-output relation.

    out = r_in X_in + r_ex X_ex + r_f F_M with
    r_in = O_out^T (k_in Y^-1 - 1) O_in^T,
    r_ex = sqrt(k_in k_ex) O_out^T Y^-1 O_in^T,
    r_f  = -sqrt(k_in) O_out^T Y^-1 B chi_m00.
    """
    y_inv = mat2_inv(blocks.Y)
    o_in = rotation_matrix(p.psi_in)
    o_out = rotation_matrix(p.psi_out)
    r_in = o_out.T @ (p.kappa_in * y_inv - I2) @ o_in.T
    r_ex = np.sqrt(p.kappa_in * p.kappa_ex) * (o_out.T @ y_inv @ o_in.T)
    r_f = -np.sqrt(p.kappa_in) * (o_out.T @ y_inv @ blocks.B) \
        * blocks.chi_m00[..., None, None]
    return r_in, r_ex, r_f


def squeezing_spectrum(omega, p: OptoMechParams, homodyne_angle: float = 0.0):
    """Symmetrised PSD of a reflected quadrature, in shot-noise units.

    Vacuum enters both ports; the mechanical bath drives F_M with PSD
    ``2 gamma_m0 (n_m0 + 1/2)``.  `homodyne_angle` = 0 selects the
    amplitude quadrature (the ponderomotive-squeezing observable used to
    calibrate g and the bath temperature).
    """
    om = np.asarray(omega, dtype=float)
    blocks = cavity_blocks(om, p)
    r_in, r_ex, r_f = reflection_blocks(blocks, p)
    o_h = rotation_matrix(homodyne_angle)
    row_in = (o_h @ r_in)[..., 0, :]
    row_ex = (o_h @ r_ex)[..., 0, :]
    row_f = (o_h @ r_f)[..., 0, 0]
    s_f = 2.0 * p.gamma_m0 * (p.n_m0 + 0.5)
    psd = 0.25 * (np.abs(row_in)**2).sum(-1) \
        + 0.25 * (np.abs(row_ex)**2).sum(-1) \
        + s_f * np.abs(row_f)**2
    return psd / 0.25


def output_spectral_matrix(omega, p: OptoMechParams):
    """Full 2x2 symmetrised spectral matrix of the reflected field."""
    om = np.asarray(omega, dtype=float)
    blocks = cavity_blocks(om, p)
    r_in, r_ex, r_f = reflection_blocks(blocks, p)
    s_f = 2.0 * p.gamma_m0 * (p.n_m0 + 0.5)
    s = 0.25 * (np.conj(r_in) @ np.swapaxes(r_in, -1, -2)) \
        + 0.25 * (np.conj(r_ex) @ np.swapaxes(r_ex, -1, -2)) \
        + s_f * (np.conj(r_f) @ np.swapaxes(r_f, -1, -2))
    return s
