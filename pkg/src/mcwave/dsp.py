"""Shared numerical primitives: unitary DFT, circular shifts, Gaussian tail."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr


@dataclass(frozen=True)
class ComplexSignal:
    """Complex baseband samples tagged with their sample rate.

    ``sample_rate`` is expressed in multiples of the nominal rate F_s, so a
    sixfold oversampled signal carries ``sample_rate=6``.
    """

    samples: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.complex128).reshape(-1)
        if x.size == 0:
            raise ValueError("signal must contain at least one sample")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal samples must be finite")
        object.__setattr__(self, "samples", x)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))


def dft(signal: ComplexSignal | np.ndarray, inverse: bool = False) -> ComplexSignal:
    """Unitary DFT (1/sqrt(N) in both directions). Any length is supported."""
    if isinstance(signal, ComplexSignal):
        x, rate = signal.samples, signal.sample_rate
    else:
        x, rate = np.asarray(signal, dtype=np.complex128).reshape(-1), 1.0
    if x.size == 0:
        raise ValueError("dft of an empty sequence")
    y = np.fft.ifft(x, norm="ortho") if inverse else np.fft.fft(x, norm="ortho")
    return ComplexSignal(y, rate)


def circular_shift(seq, shift: int) -> np.ndarray:
    """Return ``out`` with ``out[i] = seq[(i - shift) mod N]``."""
    return np.roll(np.asarray(seq), int(shift))


def qfunc(x):
    """Gaussian tail probability Q(x) = P(Z > x)."""
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError("qfunc is undefined for NaN")
    q = ndtr(-x)
    return float(q) if q.ndim == 0 else q


def db(x, floor: float = 1e-300):
    """Power ratio to decibels, clipped away from log(0)."""
    return 10.0 * np.log10(np.maximum(np.asarray(x, dtype=float), floor))


def undb(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)

