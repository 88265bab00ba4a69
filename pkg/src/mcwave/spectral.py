"""Closed-form OFDM PSDs and periodogram estimates of oversampled frames."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import upfirdn

from .dsp import ComplexSignal, db
from .pulses import raised_cosine

OVERSAMPLING = 6
INTERP_SPAN = 81
INTERP_ROLLOFF = 0.1


@dataclass(frozen=True)
class PsdEstimate:
    freqs: np.ndarray  # in units of F_s
    values_db: np.ndarray
    peak_normalized: bool = True

    def at(self, f0: float, halfwidth: float = 0.05, both_sides: bool = True) -> float:
        """Mean power (dB) over ``|f - f0| <= halfwidth``, also mirrored to -f0."""
        f = self.freqs
        sel = np.abs(f - f0) <= halfwidth + 1e-12
        if both_sides:
            sel |= np.abs(f + f0) <= halfwidth + 1e-12
        if not np.any(sel):
            raise ValueError(f"no frequency bins near {f0}")
        return float(db(np.mean(10 ** (self.values_db[sel] / 10))))

    def band(self, f_lo: float, f_hi: float) -> tuple[np.ndarray, np.ndarray]:
        sel = (np.abs(self.freqs) >= f_lo) & (np.abs(self.freqs) <= f_hi)
        return self.freqs[sel], self.values_db[sel]


def peak_normalize(psd: PsdEstimate) -> PsdEstimate:
    return PsdEstimate(psd.freqs, psd.values_db - np.max(psd.values_db), True)


# ----------------------------------------------------------------------------
# Closed form
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticPsdConfig:
    """Parameters of the rectangular-pulse OFDM PSD.

    ``L`` counts all samples of one symbol including the ``n_guard`` CP
    samples; for the equal-efficiency case ``L' = M (L - n_guard) + n_guard``.
    ``n_occupied`` restricts the sum to a block of carriers centred on DC.
    """

    K: int = 128
    L: int = 160
    n_guard: int = 32
    M: int = 9
    variance: float = 1.0
    n_occupied: int | None = None

    def __post_init__(self):
        if not self.L > self.n_guard >= 0:
            raise ValueError("need L > n_guard >= 0")
        if self.K < 1 or self.M < 1:
            raise ValueError("K and M must be positive")

    @property
    def L_equal(self) -> int:
        return self.M * (self.L - self.n_guard) + self.n_guard

    @property
    def subcarrier_spacing(self) -> float:
        """Delta_f = 1 / (K T_s), in units of F_s."""
        return 1.0 / self.K


def aliased_sinc(x, L: int):
    """sin(pi L x) / (L sin(pi x)); equals (-1)^(x (L-1)) at integer x."""
    x = np.asarray(x, dtype=float)
    if L < 1:
        raise ValueError("L must be at least 1")
    xi = np.round(x)
    integer = np.abs(x - xi) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sin(np.pi * L * x) / (L * np.sin(np.pi * x))
    sign = np.where((xi * (L - 1)) % 2 == 0, 1.0, -1.0)
    out = np.where(integer, sign, val)
    return float(out) if out.ndim == 0 else out


def analytic_psd_linear(cfg: AnalyticPsdConfig, freqs, equal_se: bool = False,
                        oversample: int = OVERSAMPLING) -> np.ndarray:
    """Sum of squared aliased sincs, without the sigma^2 / (L T_s) factor.

    Each carrier contributes the spectrum of an L-sample rectangle.  It is
    evaluated at ``oversample`` times the nominal rate (Dirichlet kernel of
    order ``oversample * L``), so the spectrum repeats every ``oversample * F_s``
    like the interpolated frames it models.
    """
    f = np.asarray(freqs, dtype=float)
    if f.size == 0:
        raise ValueError("empty frequency grid")
    if not np.all(np.isfinite(f)):
        raise ValueError("frequencies must be finite")
    if equal_se:
        n_carriers, spacing, L = cfg.M * cfg.K, cfg.subcarrier_spacing / cfg.M, cfg.L_equal
    else:
        n_carriers, spacing, L = cfg.K, cfg.subcarrier_spacing, cfg.L
    n_occ = n_carriers if cfg.n_occupied is None else cfg.n_occupied
    if equal_se and cfg.n_occupied is not None:
        n_occ = round(cfg.n_occupied * cfg.M)
    # symmetric about DC so the closed form is exactly even in f
    carriers = (np.arange(n_occ) - (n_occ - 1) / 2) * spacing
    out = np.zeros(f.shape)
    for fc in carriers:  # keeps memory flat for long grids
        out += aliased_sinc((f - fc) / oversample, oversample * L) ** 2
    return cfg.variance * out


def analytic_psd(cfg: AnalyticPsdConfig, freqs, equal_se: bool = False,
                 oversample: int = OVERSAMPLING, reference: float | None = None) -> PsdEstimate:
    """Closed-form PSD in dB.

    By default the curve is normalized to its own 0 dB peak.  Passing a
    linear ``reference`` instead divides by that common value, which is how
    two curves with equal leading multipliers are compared.
    """
    f = np.asarray(freqs, dtype=float)
    lin = analytic_psd_linear(cfg, f, equal_se, oversample)
    if reference is None:
        return PsdEstimate(f, db(lin / np.max(lin)), True)
    return PsdEstimate(f, db(lin / reference), False)


def analytic_gap_db(cfg: AnalyticPsdConfig, f0: float, oversample: int = OVERSAMPLING) -> float:
    """PSD drop (dB) at ``f0`` when OFDM goes from K to MK carriers, equal multipliers."""
    p3 = analytic_psd_linear(cfg, [f0], False, oversample)[0]
    p5 = analytic_psd_linear(cfg, [f0], True, oversample)[0]
    return float(db(p3) - db(p5))


# ----------------------------------------------------------------------------
# Simulation path
# ----------------------------------------------------------------------------


def interpolation_filter(factor: int, span: int = INTERP_SPAN, rolloff: float = INTERP_ROLLOFF) -> np.ndarray:
    """RC interpolator of ``span`` symbols, ``span*factor + 1`` taps, DC gain ``factor``."""
    n = np.arange(span * factor + 1)
    h = raised_cosine((n - span * factor / 2) / factor, rolloff)
    return h * factor / np.sum(h)


def oversample_truncate(signal: ComplexSignal | np.ndarray, factor: int = OVERSAMPLING,
                        filt_symbol_span: int = INTERP_SPAN, rolloff: float = INTERP_ROLLOFF):
    """Zero-stuff, RC-interpolate and cut the filter transients symmetrically.

    The result has exactly ``factor`` times the input length.  Arrays are
    processed along the last axis; a ComplexSignal comes back as one.
    """
    if factor < 1:
        raise ValueError("factor must be at least 1")
    if filt_symbol_span % 2 == 0:
        raise ValueError("interpolation filter span must be odd")
    wrap = isinstance(signal, ComplexSignal)
    x = signal.samples if wrap else np.asarray(signal, dtype=np.complex128)
    rate = signal.sample_rate if wrap else 1.0
    if factor == 1:
        return ComplexSignal(x.copy(), rate) if wrap else x.copy()
    h = interpolation_filter(factor, filt_symbol_span, rolloff)
    n_out = factor * x.shape[-1]
    if n_out < h.size:
        raise ValueError(f"signal of {x.shape[-1]} samples is shorter than the interpolation filter")
    delay = (h.size - 1) // 2
    y = upfirdn(h, x, up=factor, axis=-1)[..., delay:delay + n_out]
    return ComplexSignal(y, rate * factor) if wrap else y


def averaged_periodogram(frames) -> np.ndarray:
    """Mean of ``|DFT|^2 / N_f`` over frames, natural (unshifted) bin order."""
    if isinstance(frames, ComplexSignal):
        frames = [frames]
    if isinstance(frames, np.ndarray):
        X = np.atleast_2d(frames)
    else:
        lengths = {len(fr) for fr in frames}
        if not lengths:
            raise ValueError("need at least one frame")
        if len(lengths) > 1:
            raise ValueError(f"frames have different lengths: {sorted(lengths)}")
        X = np.stack([fr.samples for fr in frames])
    n = X.shape[-1]
    acc = np.zeros(n)
    for row in X:  # fixed summation order keeps results reproducible
        acc += np.abs(np.fft.fft(row)) ** 2
    return acc / (n * X.shape[0])


def periodogram_psd(frames, sample_rate: float | None = None) -> PsdEstimate:
    """Averaged periodogram on a symmetric grid in units of F_s, 0 dB peak.

    For even frame lengths the Nyquist bin is reported at both ends of the
    grid so that it runs from ``-rate/2`` to ``+rate/2``.
    """
    if sample_rate is None:
        if isinstance(frames, ComplexSignal):
            sample_rate = frames.sample_rate
        elif not isinstance(frames, np.ndarray) and len(frames):
            sample_rate = frames[0].sample_rate
        else:
            sample_rate = 1.0
    p = averaged_periodogram(frames)
    n = p.size
    f = np.fft.fftshift(np.fft.fftfreq(n, d=1.0 / sample_rate))
    p = np.fft.fftshift(p)
    if n % 2 == 0:
        f = np.append(f, -f[0])
        p = np.append(p, p[0])
    return peak_normalize(PsdEstimate(f, db(p), False))


def max_pairwise_gap(psds: Sequence[PsdEstimate], f_lo: float, f_hi: float,
                     resolution: float = 0.05) -> float:
    """Largest spread (dB) between curves over ``f_lo <= |f| <= f_hi``.

    Curves are compared on a common grid of ``resolution``-wide bands
    (linear mean inside each band), so differing frame lengths line up.
    """
    centers = np.arange(f_lo, f_hi + 1e-9, resolution)
    levels = np.array([[psd.at(c, resolution / 2) for c in centers] for psd in psds])
    return float(np.max(levels.max(axis=0) - levels.min(axis=0)))
