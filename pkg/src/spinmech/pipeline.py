"""End-to-end conditional-variance pipeline.

Chains the spectral model, the Wiener solver and the EPR analysis into
one call, which is what the command-line tools, the acceptance checks
and the posterior propagation all consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import chain as chn
from . import epr as epr_mod
from . import wiener as wnr
from .core import FrequencyGrid
from .params import SystemParams


@dataclass(frozen=True)
class PipelineSettings:
    """Discretisation knobs for the conditional pipeline.

    dt defaults to an eighth of the fastest oscillation period; n_taps
    is capped at 8192.  `extra_noise` is an optional (omega, psd) pair
    of measured additive noise added to the record PSD only (it carries
    no oscillator information, so the cross spectra are untouched).
    """

    dt: float | None = None
    n_taps: int = 2048
    n_ladder: int = 10
    grid_refine: int = 1
    span_widths: float = 50.0
    pts_per_width: int = 24
    tail_points: int = 300
    extra_noise: tuple | None = None
    vu_rtol: float = 1e-3

    def __post_init__(self):
        if self.n_taps > 8192:
            raise ValueError("n_taps capped at 8192")


@dataclass(frozen=True)
class ConditionalResult:
    """Everything the conditional pipeline produces."""

    params: SystemParams
    grid: FrequencyGrid
    dt: float
    s_ii: np.ndarray
    s_qi: np.ndarray
    floor: float
    v_u: np.ndarray
    kernel: wnr.WienerKernel
    v_be: np.ndarray
    v_c: np.ndarray
    ladder_taps: np.ndarray = field(default=None)
    ladder_v_c: np.ndarray = field(default=None)
    correlations: wnr.CorrelationSet = field(default=None, repr=False)

    @property
    def t_ladder(self) -> np.ndarray:
        return self.ladder_taps * self.dt

    def epr_minimum(self, v: np.ndarray | None = None):
        """(a*, beta*, V*) for the conditional (or given) covariance."""
        return epr_mod.minimize_epr(self.v_c if v is None else v)


def ladder_sizes(n_taps: int, n_ladder: int) -> np.ndarray:
    """Log-spaced tap counts from a handful of taps up to the window."""
    lo = max(2, n_taps // 256)
    sizes = np.unique(np.geomspace(lo, n_taps, n_ladder).astype(int))
    sizes[-1] = n_taps
    return sizes


def run_conditional(p: SystemParams,
                    settings: PipelineSettings = PipelineSettings(),
                    want_ladder: bool = True) -> ConditionalResult:
    """Model spectra -> Wiener kernel(s) -> conditional covariance."""
    dt = settings.dt if settings.dt is not None else wnr.default_dt(p)
    wnr.check_nyquist(dt, p)
    grid = chn.default_grid(p, refine=settings.grid_refine,
                            span_widths=settings.span_widths,
                            pts_per_width=settings.pts_per_width,
                            tail_points=settings.tail_points)
    spectra = chn.OutputSpectra.compute(grid, p)
    v_u = chn.unconditional_covariance(p, grid=grid)
    floor = chn.measurement_floor(p)
    s_ii = spectra.s_ii.copy()
    if settings.extra_noise is not None:
        w_extra, psd_extra = settings.extra_noise
        s_ii = s_ii + np.interp(grid.omega, np.asarray(w_extra),
                                np.asarray(psd_extra), left=0.0, right=0.0)
    corr = wnr.correlations_from_psd(grid.omega, s_ii, spectra.s_qi,
                                     floor, dt, settings.n_taps)
    if want_ladder:
        sizes = ladder_sizes(settings.n_taps, settings.n_ladder)
        kernels, v_cs = wnr.conditional_ladder(v_u, corr, sizes)
        kernel = kernels[-1]
        v_be, v_c = wnr.conditional_covariance(v_u, kernel, corr)
        return ConditionalResult(params=p, grid=grid, dt=dt, s_ii=s_ii,
                                 s_qi=spectra.s_qi, floor=floor, v_u=v_u,
                                 kernel=kernel, v_be=v_be, v_c=v_c,
                                 ladder_taps=np.array(sizes),
                                 ladder_v_c=v_cs, correlations=corr)
    kernel = wnr.solve_wiener(corr)
    v_be, v_c = wnr.conditional_covariance(v_u, kernel, corr)
    return ConditionalResult(params=p, grid=grid, dt=dt, s_ii=s_ii,
                             s_qi=spectra.s_qi, floor=floor, v_u=v_u,
                             kernel=kernel, v_be=v_be, v_c=v_c,
                             correlations=corr)
