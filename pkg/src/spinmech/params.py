"""System parameter records and JSON configuration handling.

All internal rates and frequencies are angular (rad/s).  Configuration
files quote ordinary frequencies in Hz and angles in degrees; the sign
of the spin frequency is explicit there (negative for the energetically
inverted, negative-mass preparation).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.constants as const

from .core import TWO_PI, hz_to_rad
from .errors import ConfigError


@dataclass(frozen=True)
class SpinParams:
    """Collective spin oscillator parameters.

    omega_s : signed resonance (Larmor) frequency, rad/s; negative for
        the negative-mass preparation.
    gamma_s0 : intrinsic FWHM linewidth, rad/s (> 0).
    Gamma_s : coherent readout rate, rad/s (>= 0).
    zeta_s : dimensionless tensor-coupling parameter, |zeta_s| < 1.
    n_s : effective thermal occupancy of the spin bath.
    gamma_bb, Gamma_bb : linewidth and readout rate of the broadband
        (motional-averaging) response; used only by the coherent-drive
        calibration model.
    s_bb : flat extra measurement noise at the source, in shot-noise
        units (detected level scales with the chain losses).
    """

    omega_s: float
    gamma_s0: float
    Gamma_s: float
    zeta_s: float = 0.0
    n_s: float = 0.0
    gamma_bb: float = 0.0
    Gamma_bb: float = 0.0
    s_bb: float = 0.0

    def __post_init__(self):
        if self.gamma_s0 <= 0:
            raise ConfigError("gamma_s0 must be positive")
        if self.Gamma_s < 0 or self.Gamma_bb < 0:
            raise ConfigError("readout rates must be non-negative")
        if abs(self.zeta_s) >= 1:
            raise ConfigError("|zeta_s| must be below 1")
        if self.n_s < 0:
            raise ConfigError("n_s must be non-negative")
        if self.s_bb < 0:
            raise ConfigError("s_bb must be non-negative")

    @property
    def dynamical_broadening(self) -> float:
        """Extra damping from the non-QND part of the coupling."""
        return 2.0 * self.zeta_s * self.Gamma_s

    @property
    def gamma_s(self) -> float:
        """Total linewidth including dynamical broadening."""
        return self.gamma_s0 + self.dynamical_broadening


@dataclass(frozen=True)
class OptoMechParams:
    """Membrane-in-the-middle optomechanical parameters.

    omega_m0 : intrinsic mechanical frequency, rad/s (> 0).
    gamma_m0 : intrinsic mechanical linewidth, rad/s (> 0).
    kappa : total cavity linewidth, rad/s; kappa_in is the in/out
        coupler share, the remainder lumps the back mirror and
        intracavity losses into a single extra port.
    Delta : signed laser-cavity detuning, rad/s.
    g : light-enhanced optomechanical coupling, rad/s.
    n_m0 : occupancy of the mechanical thermal bath.
    """

    omega_m0: float
    gamma_m0: float
    kappa: float
    kappa_in: float
    Delta: float
    g: float
    n_m0: float = 0.0

    def __post_init__(self):
        if self.omega_m0 <= 0:
            raise ConfigError("omega_m0 must be positive")
        if self.gamma_m0 <= 0:
            raise ConfigError("gamma_m0 must be positive")
        if self.kappa <= 0:
            raise ConfigError("kappa must be positive")
        if not 0.0 < self.kappa_in <= self.kappa:
            raise ConfigError("kappa_in must lie in (0, kappa]")
        if self.n_m0 < 0:
            raise ConfigError("n_m0 must be non-negative")

    @property
    def kappa_ex(self) -> float:
        return self.kappa - self.kappa_in

    @property
    def psi_in(self) -> float:
        """Phase of the intracavity field relative to the input."""
        return np.arctan(2.0 * self.Delta / self.kappa)

    @property
    def psi_out(self) -> float:
        """Phase of the outgoing carrier relative to the cavity field."""
        return np.arctan(2.0 * self.Delta / (self.kappa_in - self.kappa_ex))

    @property
    def quality_factor(self) -> float:
        return self.omega_m0 / self.gamma_m0


@dataclass(frozen=True)
class ChainParams:
    """Cascade link and detection parameters."""

    nu: float = 1.0        # intersystem power transmission
    eta: float = 1.0       # overall detection efficiency
    phi: float = np.pi     # LO1-LO2 phase applied on the intersystem field
    vartheta: float = 0.0  # homodyne phase, applied after all cavity rotations

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0:
            raise ConfigError("nu must lie in [0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError("eta must lie in [0, 1]")
        if not (np.isfinite(self.phi) and np.isfinite(self.vartheta)):
            raise ConfigError("phases must be finite")


@dataclass(frozen=True)
class SystemParams:
    """Complete parameter record for the spin -> cavity -> homodyne chain."""

    spin: SpinParams
    mech: OptoMechParams
    chain: ChainParams = field(default_factory=ChainParams)

    def rescaled(self, s: float) -> "SystemParams":
        """Multiply every rate/frequency by ``s`` (dimensionless knobs fixed).

        Together with ``W -> s W`` this leaves every shot-noise-unit
        spectrum and covariance invariant.
        """
        sp, me, ch = self.spin, self.mech, self.chain
        return SystemParams(
            spin=SpinParams(omega_s=s * sp.omega_s, gamma_s0=s * sp.gamma_s0,
                            Gamma_s=s * sp.Gamma_s, zeta_s=sp.zeta_s,
                            n_s=sp.n_s, gamma_bb=s * sp.gamma_bb,
                            Gamma_bb=s * sp.Gamma_bb, s_bb=sp.s_bb),
            mech=OptoMechParams(omega_m0=s * me.omega_m0, gamma_m0=s * me.gamma_m0,
                                kappa=s * me.kappa, kappa_in=s * me.kappa_in,
                                Delta=s * me.Delta, g=s * me.g, n_m0=me.n_m0),
            chain=ch,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Short stable hash identifying this parameter set."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def bath_occupancy(temperature: float, omega: float) -> float:
    """Thermal occupancy ``kB T / (hbar w)`` in the high-temperature limit."""
    return const.k * temperature / (const.hbar * abs(omega))


def gamma_from_quality(omega_m0: float, q: float) -> float:
    """Natural linewidth from resonance frequency and quality factor."""
    return omega_m0 / q


# --- JSON configuration -------------------------------------------------

_SPIN_KEYS = {"omega_Hz", "gamma_0_Hz", "Gamma_Hz", "zeta", "n",
              "broadband_gamma_Hz", "broadband_Gamma_Hz", "broadband_noise_SN"}
_MECH_KEYS = {"omega_0_Hz", "gamma_0_Hz", "kappa_Hz", "overcoupling",
              "Delta_Hz", "g_Hz", "n_bath", "bath_temperature_K"}
_CHAIN_KEYS = {"nu", "eta", "phi_deg", "vartheta_deg"}
_TOP_KEYS = {"spin", "mech", "chain", "grid", "wiener", "mcmc"}


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{where}': {sorted(unknown)}")


def params_from_dict(cfg: dict) -> SystemParams:
    """Build SystemParams from a parsed configuration dictionary.

    Frequencies are in Hz, angles in degrees; unknown keys are rejected
    and every parameter invariant is re-checked by the dataclasses.
    """
    _check_keys(cfg, _TOP_KEYS, "config")
    for sec in ("spin", "mech"):
        if sec not in cfg:
            raise ConfigError(f"missing required section '{sec}'")
    s, m = cfg["spin"], cfg["mech"]
    c = cfg.get("chain", {})
    _check_keys(s, _SPIN_KEYS, "spin")
    _check_keys(m, _MECH_KEYS, "mech")
    _check_keys(c, _CHAIN_KEYS, "chain")
    try:
        spin = SpinParams(
            omega_s=hz_to_rad(s["omega_Hz"]),
            gamma_s0=hz_to_rad(s["gamma_0_Hz"]),
            Gamma_s=hz_to_rad(s["Gamma_Hz"]),
            zeta_s=float(s.get("zeta", 0.0)),
            n_s=float(s.get("n", 0.0)),
            gamma_bb=hz_to_rad(s.get("broadband_gamma_Hz", 0.0)),
            Gamma_bb=hz_to_rad(s.get("broadband_Gamma_Hz", 0.0)),
            s_bb=float(s.get("broadband_noise_SN", 0.0)),
        )
        kappa = hz_to_rad(m["kappa_Hz"])
        n_bath = m.get("n_bath")
        if n_bath is None and "bath_temperature_K" in m:
            n_bath = bath_occupancy(float(m["bath_temperature_K"]),
                                    hz_to_rad(m["omega_0_Hz"]))
        mech = OptoMechParams(
            omega_m0=hz_to_rad(m["omega_0_Hz"]),
            gamma_m0=hz_to_rad(m["gamma_0_Hz"]),
            kappa=kappa,
            kappa_in=float(m.get("overcoupling", 1.0)) * kappa,
            Delta=hz_to_rad(m.get("Delta_Hz", 0.0)),
            g=hz_to_rad(m["g_Hz"]),
            n_m0=float(n_bath if n_bath is not None else 0.0),
        )
        chain = ChainParams(
            nu=float(c.get("nu", 1.0)),
            eta=float(c.get("eta", 1.0)),
            phi=np.deg2rad(float(c.get("phi_deg", 180.0))),
            vartheta=np.deg2rad(float(c.get("vartheta_deg", 0.0))),
        )
    except KeyError as exc:
        raise ConfigError(f"missing configuration key: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration value: {exc}") from exc
    return SystemParams(spin=spin, mech=mech, chain=chain)


def load_config(path) -> tuple[SystemParams, dict]:
    """Load a JSON config file; returns (params, full config dict)."""
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return params_from_dict(cfg), cfg
