"""Cascaded spin -> cavity -> homodyne chain.

Builds the rectangular transfer matrix U(W) mapping the eleven noise
inputs

    (F_S^X, F_S^P, F_M, X_LS_in, P_LS_in, X_Lnu, P_Lnu,
     X_Lex, P_Lex, X_Leta, P_Leta)

onto the five tracked outputs (X_M, P_M, X_S, P_S, P_L_meas).  The
intersystem link applies a quadrature rotation by phi and beam-splitter
transmission nu; detection applies the homodyne rotation by vartheta
and efficiency eta, and the measured row is the phase component.

Output spectra follow from the diagonal input spectral matrix as

    S_out(W) = conj(U) S_in U^T,

entrywise ``S_out[j,k] = sum_m conj(U[j,m]) S_in[m] U[k,m]``, which is
Hermitian and positive semidefinite by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import cavity as cav
from . import spin as spn
from .core import (DUAN_THRESHOLD, INPUT_CHANNELS, OUTPUT_CHANNELS,
                   VACUUM_LIGHT_PSD, FrequencyGrid, rotation_matrix)
from .errors import BroadbandInjectionSingular, IntegrationNotConverged
from .params import SystemParams

N_IN = len(INPUT_CHANNELS)
N_OUT = len(OUTPUT_CHANNELS)

# column indices into INPUT_CHANNELS
_F_S = slice(0, 2)
_F_M = 2
_LS = slice(3, 5)
_LNU = slice(5, 7)
_LEX = slice(7, 9)
_LETA = slice(9, 11)


def input_psd_diag(p: SystemParams) -> np.ndarray:
    """Diagonal of the 11x11 input spectral matrix (all inputs white).

    Spin force quadratures carry ``gamma_s0 (n_s + 1/2)`` each, the
    mechanical force ``2 gamma_m0 (n_m0 + 1/2)``, light vacua 1/4.  Flat
    broadband spin noise rides the P quadrature of the intersystem loss
    port scaled by ``nu/(1-nu)``, so that it reaches the detector with
    the same losses and rotations as the narrowband spin signal.
    """
    s, m, c = p.spin, p.mech, p.chain
    diag = np.full(N_IN, VACUUM_LIGHT_PSD)
    diag[0] = diag[1] = s.gamma_s0 * (s.n_s + 0.5)
    diag[_F_M] = 2.0 * m.gamma_m0 * (m.n_m0 + 0.5)
    if s.s_bb > 0:
        if c.nu > 1.0 - 1e-6:
            raise BroadbandInjectionSingular(
                "broadband spin noise with nu ~ 1: the nu/(1-nu) injection "
                "through the loss port diverges")
        diag[6] += c.nu / (1.0 - c.nu) * (s.s_bb * VACUUM_LIGHT_PSD)
    return diag


def transfer_matrix(omega, p: SystemParams) -> np.ndarray:
    """U(W) with shape (n, 5, 11) for an array of frequencies (rad/s)."""
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    s, m, c = p.spin, p.mech, p.chain
    n = om.shape[0]
    u = np.zeros((n, N_OUT, N_IN), dtype=complex)

    state_in, state_force, out_in, out_force = spn.io_blocks(om, s)
    u[:, 2:4, _F_S] = state_force
    u[:, 2:4, _LS] = state_in

    blocks = cav.cavity_blocks(om, m)
    o_phi = rotation_matrix(c.phi)
    mech_row = cav._input_transfer(blocks, m)          # (n, 1, 2)
    pre = np.sqrt(m.kappa_in) * (mech_row @ o_phi)
    u[:, 0, _LS] = np.sqrt(c.nu) * (pre @ out_in)[:, 0, :]
    u[:, 0, _F_S] = np.sqrt(c.nu) * (pre @ out_force)[:, 0, :]
    u[:, 0, _LNU] = np.sqrt(1.0 - c.nu) * pre[:, 0, :]
    u[:, 0, _LEX] = np.sqrt(m.kappa_ex) * mech_row[:, 0, :]
    u[:, 0, _F_M] = blocks.chi_m
    u[:, 1, :] = (-1j * om / m.omega_m0)[:, None] * u[:, 0, :]

    r_in, r_ex, r_f = cav.reflection_blocks(blocks, m)
    o_th = rotation_matrix(c.vartheta)
    meas = np.sqrt(c.eta) * (o_th @ r_in @ o_phi)      # (n, 2, 2)
    u[:, 4, _LS] = np.sqrt(c.nu) * (meas @ out_in)[:, 1, :]
    u[:, 4, _F_S] = np.sqrt(c.nu) * (meas @ out_force)[:, 1, :]
    u[:, 4, _LNU] = np.sqrt(1.0 - c.nu) * meas[:, 1, :]
    u[:, 4, _LEX] = np.sqrt(c.eta) * (o_th @ r_ex)[:, 1, :]
    u[:, 4, _F_M] = np.sqrt(c.eta) * (o_th @ r_f)[:, 1, 0]
    u[:, 4, 10] = np.sqrt(1.0 - c.eta)
    return u


def transfer_matrix_floor(p: SystemParams) -> np.ndarray:
    """High-frequency limit of U: pure imprecision feedthrough.

    All oscillator responses vanish and the cavity acts as a perfect
    mirror, leaving only the rotated, attenuated vacuum paths into the
    measured row.  Used for the exact white part of the measured PSD.
    """
    s, m, c = p.spin, p.mech, p.chain
    u = np.zeros((N_OUT, N_IN), dtype=complex)
    o_refl = -(rotation_matrix(m.psi_out).T @ rotation_matrix(m.psi_in).T)
    meas = np.sqrt(c.eta) * (rotation_matrix(c.vartheta) @ o_refl
                             @ rotation_matrix(c.phi))
    u[4, _LS] = np.sqrt(c.nu) * meas[1, :]
    u[4, _LNU] = np.sqrt(1.0 - c.nu) * meas[1, :]
    u[4, 10] = np.sqrt(1.0 - c.eta)
    return u


def measurement_floor(p: SystemParams) -> float:
    """White (frequency-independent) part of the measured PSD."""
    row = transfer_matrix_floor(p)[4]
    return float(np.abs(row)**2 @ input_psd_diag(p))


def output_cross_spectrum(omega, p: SystemParams, u: np.ndarray | None = None):
    """5x5 Hermitian cross-spectral matrix at each frequency."""
    if u is None:
        u = transfer_matrix(omega, p)
    diag = input_psd_diag(p)
    return np.einsum("...jm,m,...km->...jk", np.conj(u), diag, u)


def measured_psd(omega, p: SystemParams, u: np.ndarray | None = None):
    """Real scalar PSD of the homodyne record."""
    if u is None:
        u = transfer_matrix(omega, p)
    diag = input_psd_diag(p)
    return np.einsum("...m,m,...m->...", np.conj(u[..., 4, :]), diag,
                     u[..., 4, :]).real


def signal_meter_cross(omega, p: SystemParams, u: np.ndarray | None = None):
    """Cross spectra between the four oscillator rows and the record.

    Entry q is ``S_{Q_q i}(W) = sum_m conj(U[q,m]) S_m U[i,m]``, the
    spectrum whose inverse transform gives ``<Q(t + tau) i(t)>``.
    """
    if u is None:
        u = transfer_matrix(omega, p)
    diag = input_psd_diag(p)
    return np.einsum("...qm,m,...m->...q", np.conj(u[..., :4, :]), diag,
                     u[..., 4, :])


@dataclass(frozen=True)
class OutputSpectra:
    """Spectra of the chain on a frequency grid (positive half)."""

    grid: FrequencyGrid
    s_out: np.ndarray   # (n, 5, 5) complex Hermitian
    s_ii: np.ndarray    # (n,) real
    s_qi: np.ndarray    # (n, 4) complex

    @classmethod
    def compute(cls, grid: FrequencyGrid, p: SystemParams):
        s_out = output_cross_spectrum(grid.omega, p)
        return cls(grid=grid, s_out=s_out,
                   s_ii=s_out[:, 4, 4].real, s_qi=s_out[:, :4, 4])


def default_grid(p: SystemParams, refine: int = 1, span_widths: float = 50.0,
                 pts_per_width: int = 24, tail_points: int = 300) -> FrequencyGrid:
    """Grid resolving both resonances plus a tail covering the cavity."""
    s, m = p.spin, p.mech
    gamma_m = cav.gamma_broadened(m)
    w_m = cav.shifted_resonance(m) if m.g > 0 else m.omega_m0
    regions = [(abs(s.omega_s), max(s.gamma_s, abs(s.omega_s) * 1e-8)),
               (w_m, max(gamma_m, w_m * 1e-8))]
    outer = max(10.0 * max(abs(s.omega_s), m.omega_m0),
                1.5 * (abs(m.Delta) + m.kappa))
    return FrequencyGrid.from_regions(regions, outer, refine=refine,
                                      span_widths=span_widths,
                                      pts_per_width=pts_per_width,
                                      tail_points=tail_points)


def unconditional_covariance(p: SystemParams, grid: FrequencyGrid | None = None,
                             rtol: float = 1e-3, max_refine: int = 4):
    """Steady-state 4x4 covariance of (X_M, P_M, X_S, P_S).

    ``V_u = int dW/2pi S_MS(W)`` over the oscillator block, refined until
    successive grid densities agree to `rtol` on the diagonal.  The
    explicit mirror sum keeps the imaginary residue at rounding level;
    it is checked and discarded.
    """
    prev = None
    refine = grid.metadata.get("refine", 1) if grid is not None else 1
    for _ in range(max_refine):
        g = grid if grid is not None else default_grid(p, refine=refine)
        s_ms = output_cross_spectrum(g.omega, p)[:, :4, :4]
        v_complex = g.full_integral(s_ms) / (2.0 * np.pi)
        imag = np.abs(v_complex.imag).max()
        scale = np.abs(v_complex.real).max()
        if imag > 1e-6 * scale:
            raise IntegrationNotConverged(
                f"imaginary residue {imag:.2e} exceeds 1e-6 of scale {scale:.2e}")
        v = v_complex.real
        v = 0.5 * (v + v.T)
        if grid is not None:
            return v
        if prev is not None:
            diff = np.abs(np.diag(v) - np.diag(prev)).max()
            if diff <= rtol * np.abs(np.diag(v)).max():
                return v
        prev = v
        refine *= 2
    raise IntegrationNotConverged(
        f"V_u did not stabilise to {rtol:.1e} after {max_refine} refinements")


def noise_budget(omega, p: SystemParams) -> dict[str, np.ndarray]:
    """Additive decomposition of the measured PSD by noise origin.

    Groups: 'shot' (vacuum paths with the oscillators decoupled),
    'qba' (change of the light-vacuum contribution due to the coupled
    oscillators, including interference terms), 'broadband' (flat spin
    noise), 'thermal_m' and 'thermal_s'.  Columns sum to the total
    measured PSD exactly, channel by channel.
    """
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    diag = input_psd_diag(p)
    row = transfer_matrix(om, p)[:, 4, :]
    decoupled = replace(
        p, spin=replace(p.spin, Gamma_s=0.0),
        mech=replace(p.mech, g=0.0))
    row0 = transfer_matrix(om, decoupled)[:, 4, :]
    power = np.abs(row)**2 * diag
    power0 = np.abs(row0)**2 * diag
    light = np.zeros(N_IN, dtype=bool)
    light[3:] = True
    bb_extra = diag[6] - VACUUM_LIGHT_PSD
    shot = power0[:, light].sum(-1)
    qba = (power[:, light] - power0[:, light]).sum(-1)
    if bb_extra > 0:
        frac = bb_extra / diag[6]
        shot -= power0[:, 6] * frac
        qba -= (power[:, 6] - power0[:, 6]) * frac
        broadband = power[:, 6] * frac
    else:
        broadband = np.zeros_like(shot)
    return {
        "total": power.sum(-1),
        "shot": shot,
        "qba": qba,
        "broadband": broadband,
        "thermal_m": power[:, _F_M],
        "thermal_s": power[:, _F_S].sum(-1),
    }


# --- simplified cross-check model ---------------------------------------

@dataclass(frozen=True)
class SimpleEprParams:
    """QND-style reduced parameters for the simplified readout model."""

    omega_m: float
    omega_s: float
    gamma_m0: float
    gamma_s0: float
    Gamma_m: float
    Gamma_s: float
    zeta_m: float = 0.0
    zeta_s: float = 0.0
    nu: float = 1.0
    eta: float = 1.0
    n_m: float = 0.0
    n_s: float = 0.0

    def chi(self, omega, which: str, broadened: bool = True):
        w0 = self.omega_m if which == "m" else self.omega_s
        gamma0 = self.gamma_m0 if which == "m" else self.gamma_s0
        dyn = 2.0 * (self.zeta_m * self.Gamma_m if which == "m"
                     else self.zeta_s * self.Gamma_s)
        gamma = gamma0 + dyn if broadened else gamma0
        om = np.asarray(omega, dtype=float)
        return w0 / (w0**2 - om**2 - 1j * om * gamma)


def simplified_epr_readout(omega, sp: SimpleEprParams):
    """Phase-quadrature readout of the simplified cascaded model.

    Returns a dict with the measured PSD ('psd'), the joint-QBA
    coefficient multiplying the common amplitude noise ('qba_coeff'),
    the cross-susceptibility ('chi_ms') and the individual noise terms.
    The QBA coefficient is

        (chi_s/chi_s0) Gamma_m chi_m + (chi_m/chi_m0) Gamma_s chi_s,

    which vanishes identically when ``Gamma_m chi_m0 + Gamma_s chi_s0 = 0``.
    """
    om = np.asarray(omega, dtype=float)
    chi_m = sp.chi(om, "m")
    chi_m0 = sp.chi(om, "m", broadened=False)
    chi_s = sp.chi(om, "s")
    chi_s0 = sp.chi(om, "s", broadened=False)
    chi_ms = 1.0 / (1.0 / chi_m0 - 2j * sp.zeta_s * sp.Gamma_m)

    qba_coeff = (chi_s / chi_s0) * sp.Gamma_m * chi_m \
        + (chi_m / chi_m0) * sp.Gamma_s * chi_s
    qba = 4.0 * sp.eta * sp.nu * np.abs(qba_coeff)**2 * VACUUM_LIGHT_PSD
    th_m = sp.eta * sp.Gamma_m * np.abs(chi_m)**2 \
        * 2.0 * sp.gamma_m0 * (sp.n_m + 0.5)
    qba_nu = 4.0 * sp.eta * (1.0 - sp.nu) * sp.Gamma_m**2 \
        * np.abs(chi_m)**2 * VACUUM_LIGHT_PSD
    th_s = sp.eta * sp.nu * sp.Gamma_s * np.abs(chi_m / chi_ms)**2 \
        * np.abs(chi_s)**2 * 2.0 * sp.gamma_s0 * (sp.n_s + 0.5)
    imprecision = VACUUM_LIGHT_PSD
    return {
        "psd": imprecision + qba + th_m + qba_nu + th_s,
        "qba_coeff": qba_coeff,
        "chi_ms": chi_ms,
        "imprecision": np.full_like(om, imprecision),
        "qba": qba,
        "thermal_m": th_m,
        "qba_nu": qba_nu,
        "thermal_s": th_s,
    }


def duan_threshold() -> float:
    return DUAN_THRESHOLD
