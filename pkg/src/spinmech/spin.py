"""Frequency-domain response of the collective spin oscillator.

The linearised light-spin interaction is close to QND; the tensor part
(zeta_s) admixes the other light quadrature, dynamically broadening the
oscillator by ``2 zeta_s Gamma_s``.  All responses are built from two
2x2 blocks

    Z = [[0, -zeta_s], [1, 0]],
    L = inverse of [[gamma_s0/2 + zeta_s Gamma_s - iW, -omega_s],
                    [omega_s, gamma_s0/2 + zeta_s Gamma_s - iW]],

so that the state and input-output relations read

    X_S      = 2 sqrt(Gamma_s) L Z X_in + L F,
    X_out    = (1 + 2 Gamma_s Z L Z) X_in + sqrt(Gamma_s) Z L F.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import I2, mat2_inv
from .errors import ConfigError
from .params import SpinParams


@dataclass(frozen=True)
class SpinBlocks:
    """Response blocks at one or many frequencies.

    L has shape (..., 2, 2) and is complex; Z is the real constant
    coupling structure.
    """

    L: np.ndarray
    Z: np.ndarray


def spin_blocks(omega, p: SpinParams) -> SpinBlocks:
    """Evaluate L and Z; `omega` may be scalar or an array (rad/s)."""
    if p.gamma_s0 <= 0:
        raise ConfigError("gamma_s0 must be positive")
    om = np.asarray(omega, dtype=float)
    d = p.gamma_s0 / 2.0 + p.zeta_s * p.Gamma_s - 1j * om
    m = np.zeros(om.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = d
    m[..., 0, 1] = -p.omega_s
    m[..., 1, 0] = p.omega_s
    m[..., 1, 1] = d
    Z = np.array([[0.0, -p.zeta_s], [1.0, 0.0]])
    return SpinBlocks(L=mat2_inv(m), Z=Z)


def io_blocks(omega, p: SpinParams):
    """Transfer blocks of the spin stage.

    Returns (state_in, state_force, out_in, out_force): the 2x2 maps
    from light input / thermal force onto the oscillator state and onto
    the outgoing light.
    """
    b = spin_blocks(omega, p)
    LZ = b.L @ b.Z
    state_in = 2.0 * np.sqrt(p.Gamma_s) * LZ
    state_force = b.L
    out_in = I2 + 2.0 * p.Gamma_s * (b.Z @ LZ)
    out_force = np.sqrt(p.Gamma_s) * (b.Z @ b.L)
    return state_in, state_force, out_in, out_force


def spin_state_response(omega, p: SpinParams, x_in, force):
    """Oscillator quadratures (X_S, P_S) for given light and force inputs."""
    state_in, state_force, _, _ = io_blocks(omega, p)
    x_in = np.asarray(x_in, dtype=complex)
    force = np.asarray(force, dtype=complex)
    return (state_in @ x_in[..., None] + state_force @ force[..., None])[..., 0]


def spin_io(omega, p: SpinParams, x_in, force):
    """Outgoing light quadratures after the spin stage."""
    _, _, out_in, out_force = io_blocks(omega, p)
    x_in = np.asarray(x_in, dtype=complex)
    force = np.asarray(force, dtype=complex)
    return (out_in @ x_in[..., None] + out_force @ force[..., None])[..., 0]


def chi_s(omega, p: SpinParams, include_broadening: bool = True):
    """Scalar susceptibility ``w_s0 / (w_s^2 - W^2 - i W gamma)``.

    With `include_broadening` the damping is the dynamically broadened
    linewidth, otherwise the intrinsic one.
    """
    om = np.asarray(omega, dtype=float)
    gamma = p.gamma_s if include_broadening else p.gamma_s0
    return p.omega_s / (p.omega_s**2 - om**2 - 1j * om * gamma)


def cifar_response(omega_rf, theta_in: float, p: SpinParams,
                   drive_sign: float = 1.0):
    """Detected phase-quadrature response to a coherent polarisation drive.

    The drive populates the input quadratures as
    ``(cos(theta_in), sin(theta_in))`` (unit amplitude; the source sign
    convention of the drive angle is exposed via `drive_sign`).  The
    narrowband spin mode and the broadband mode respond coherently;
    incoherent thermal noise plays no role for a strong drive.  Returns
    the complex detected amplitude; magnitude squared and phase are what
    a demodulated measurement records.
    """
    om = np.asarray(omega_rf, dtype=float)
    _, _, out_in, _ = io_blocks(om, p)
    if p.Gamma_bb > 0:
        bb = SpinParams(omega_s=p.omega_s, gamma_s0=p.gamma_bb,
                        Gamma_s=p.Gamma_bb, zeta_s=p.zeta_s)
        _, _, out_bb, _ = io_blocks(om, bb)
        out_in = out_in + (out_bb - I2)
    th = drive_sign * theta_in
    drive = np.array([np.cos(th), np.sin(th)], dtype=complex)
    response = out_in @ drive
    return response[..., 1]
