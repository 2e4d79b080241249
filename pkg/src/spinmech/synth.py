"""Statistically exact synthesis of joint stationary Gaussian records.

All eleven model inputs are white, so a record of the five tracked
outputs is generated by drawing independent complex Gaussian
coefficients per frequency bin, applying the chain transfer matrix bin
by bin (conjugated, to match the ``exp(-iWt)`` inverse-transform
convention of the model spectra), enforcing Hermitian symmetry through
the real inverse FFT, and discarding the second half of a
double-length record to suppress periodic-embedding correlations.  No
stochastic differential equation is ever discretised, so the sample
statistics converge to the model spectra without integrator bias.

Seeds feed a counter-based (Philox) generator; realisation seeds are
derived as ``seed0 + index``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import chain as chn
from .errors import AliasingError, LengthMismatch
from .params import SystemParams
from .wiener import WienerKernel, check_nyquist

_SEED_REGISTRY: dict[tuple, float] = {}


class SeedReuse(UserWarning):
    """Same (params, seed) requested with a different sampling step."""


@dataclass(frozen=True)
class TimeRecord:
    """Sampled multichannel record of the chain outputs."""

    dt: float
    channels: np.ndarray          # (5, n) rows ordered as OUTPUT_CHANNELS
    seed: int
    params_digest: str = ""
    labels: tuple = field(default=("X_M", "P_M", "X_S", "P_S", "i"))

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def photocurrent(self) -> np.ndarray:
        return self.channels[4]

    @property
    def oscillators(self) -> np.ndarray:
        return self.channels[:4]

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.n_samples)


def _next_pow2(n: int) -> int:
    return 1 << int(np.ceil(np.log2(max(n, 2))))


def synthesize_joint(p: SystemParams, duration: float, dt: float,
                     seed: int, oversample: float = 2.0) -> TimeRecord:
    """Draw one joint record of (X_M, P_M, X_S, P_S, i).

    The output length is the requested duration rounded up to a power
    of two; synthesis happens on an `oversample`-times longer lattice.
    """
    check_nyquist(dt, p)
    n_out = _next_pow2(int(round(duration / dt)))
    n_syn = _next_pow2(int(round(n_out * oversample)))
    key = (p.digest(), int(seed))
    if key in _SEED_REGISTRY and not np.isclose(_SEED_REGISTRY[key], dt):
        warnings.warn("same (params, seed) previously synthesised with a "
                      "different dt; records will not be comparable",
                      SeedReuse)
    _SEED_REGISTRY[key] = dt

    omega = 2.0 * np.pi * np.fft.rfftfreq(n_syn, dt)
    u = np.conj(chn.transfer_matrix(omega, p))       # (nb, 5, 11)
    diag = chn.input_psd_diag(p)
    nb = omega.size

    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    scale = np.sqrt(n_syn * diag / dt)               # per-bin std, full complex
    draws = (rng.standard_normal((11, nb)) +
             1j * rng.standard_normal((11, nb))) / np.sqrt(2.0)
    draws *= scale[:, None]
    # DC and Nyquist bins of a real record are real
    draws[:, 0] = draws[:, 0].real * np.sqrt(2.0)
    draws[:, -1] = draws[:, -1].real * np.sqrt(2.0)

    coeff = np.einsum("fij,jf->if", u, draws)
    x = np.fft.irfft(coeff, n=n_syn, axis=1)[:, :n_out]
    return TimeRecord(dt=dt, channels=np.ascontiguousarray(x),
                      seed=int(seed), params_digest=p.digest())


def ensemble_conditional_oracle(p: SystemParams, kernel: WienerKernel,
                                n_real: int, seed0: int,
                                duration: float | None = None,
                                times_per_record: int = 8):
    """Empirical conditional covariance over an ensemble of records.

    For each realisation the filter estimate is evaluated at
    `times_per_record` well-separated sample times past the filter
    window, and the covariance of the residual ``Q - Q^c`` is pooled
    over realisations and times.  Returns (v_c_empirical, n_samples).
    """
    n = kernel.n_taps
    if duration is None:
        duration = kernel.dt * n * 3.0
    residuals = []
    w = kernel.weights
    for j in range(n_real):
        rec = synthesize_joint(p, duration, kernel.dt, seed=seed0 + j)
        m = rec.n_samples
        if m < n + times_per_record:
            raise LengthMismatch("record too short for the filter window")
        idx = np.linspace(n - 1, m - 1, times_per_record).astype(int)
        i_rec = rec.photocurrent
        windows = np.stack([i_rec[k - n + 1:k + 1][::-1] for k in idx])
        qc = windows @ w.T                      # (times, 4)
        q_true = rec.oscillators[:, idx].T
        residuals.append(q_true - qc)
    res = np.concatenate(residuals, axis=0)
    v_emp = np.cov(res.T, bias=False)
    return v_emp, res.shape[0]


def empirical_cross_correlation(p: SystemParams, dt: float, duration: float,
                                n_real: int, seed0: int, max_lag: int):
    """Ensemble estimate of <Q(t + m dt) i(t)> for m = 0 .. max_lag-1.

    Direct oracle for the orientation and scale of the model cross
    spectra; averages the lagged products over time and realisations.
    """
    acc = np.zeros((4, max_lag))
    count = 0
    for j in range(n_real):
        rec = synthesize_joint(p, duration, dt, seed=seed0 + j)
        i_rec = rec.photocurrent
        q = rec.oscillators
        m = rec.n_samples
        for lag in range(max_lag):
            acc[:, lag] += q[:, lag:m] @ i_rec[:m - lag] / (m - lag)
        count += 1
    return acc / count
