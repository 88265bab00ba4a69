"""Prototype pulses, Zak-domain OQAM orthogonalization and edge windows."""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

GAUSSIAN_BT = 0.3
# Relative tolerance used to recognise the symmetry centre of a pulse.
_SYMMETRY_TOL = 1e-9


class PulseKind(str, Enum):
    RC = "rc"
    RRC = "rrc"
    DIRICHLET = "dirichlet"
    GAUSSIAN = "gaussian"
    RECTANGULAR = "rect"


class DegeneratePulseError(ValueError):
    """Raised when the Zak-domain normalization would divide by zero."""


@dataclass(frozen=True)
class PulsePrototype:
    taps: np.ndarray
    kind: PulseKind
    K: int
    M: int
    rolloff: float = 0.0
    orthogonalized: bool = False

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float).reshape(-1)
        if taps.size != self.K * self.M:
            raise ValueError(f"pulse needs {self.K * self.M} taps, got {taps.size}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "kind", PulseKind(self.kind))

    @property
    def N(self) -> int:
        return self.K * self.M


@dataclass(frozen=True)
class WindowTaps:
    taps: np.ndarray
    ramp_len: int


def raised_cosine(t, rolloff: float) -> np.ndarray:
    """Raised-cosine impulse response, ``t`` in symbol periods, peak 1 at t=0."""
    t = np.asarray(t, dtype=float)
    h = np.sinc(t)
    if rolloff == 0:
        return h
    den = 1.0 - (2.0 * rolloff * t) ** 2
    singular = np.abs(den) < 1e-10
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(singular, np.pi / 4 * np.sinc(1 / (2 * rolloff)), h * np.cos(np.pi * rolloff * t) / den)
    return h


def root_raised_cosine(t, rolloff: float) -> np.ndarray:
    """Root-raised-cosine impulse response, ``t`` in symbol periods."""
    t = np.asarray(t, dtype=float)
    a = rolloff
    if a == 0:
        return np.sinc(t)
    zero = np.abs(t) < 1e-12
    special = np.abs(np.abs(t) - 1 / (4 * a)) < 1e-10
    num = np.sin(np.pi * t * (1 - a)) + 4 * a * t * np.cos(np.pi * t * (1 + a))
    den = np.pi * t * (1 - (4 * a * t) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = num / den
    special_val = a / np.sqrt(2) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * a)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * a))
    )
    h = np.where(special, special_val, h)
    return np.where(zero, 1 + a * (4 / np.pi - 1), h)


def _dirichlet(K: int, M: int) -> np.ndarray:
    # ideal rectangular spectrum one subcarrier wide (M bins of the MK-point grid)
    N = K * M
    f = np.fft.fftfreq(N, d=1.0 / N)
    spec = (np.abs(f) < M / 2).astype(float)
    spec[np.isclose(np.abs(f), M / 2)] = 0.5
    g = np.real(np.fft.ifft(spec))
    return np.roll(g, N // 2)


def build_prototype(kind: PulseKind | str, K: int, M: int, rolloff: float = 0.1,
                    bt: float = GAUSSIAN_BT) -> PulsePrototype:
    """Unit-energy length-MK prototype centred (circularly) on sample MK/2.

    RC and RRC are sampled at ``t = (n - MK/2)/K`` symbol periods.  The
    rectangular pulse is flat over the first K samples only (the OFDM case).
    """
    kind = PulseKind(kind)
    if K < 1 or M < 1 or K * M == 0:
        raise ValueError(f"K and M must be positive, got K={K}, M={M}")
    if kind in (PulseKind.RC, PulseKind.RRC) and not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff must lie in [0, 1], got {rolloff}")
    N = K * M
    t = (np.arange(N) - N / 2) / K
    if kind is PulseKind.RC:
        g = raised_cosine(t, rolloff)
    elif kind is PulseKind.RRC:
        g = root_raised_cosine(t, rolloff)
    elif kind is PulseKind.GAUSSIAN:
        g = np.exp(-2 * np.pi**2 * bt**2 * t**2 / np.log(2))
    elif kind is PulseKind.DIRICHLET:
        g = _dirichlet(K, M)
    else:
        g = np.zeros(N)
        g[:K] = 1.0
    g = g / np.sqrt(np.sum(g**2))
    if kind not in (PulseKind.RC, PulseKind.RRC):
        rolloff = 0.0
    return PulsePrototype(g, kind, K, M, rolloff, False)


def _symmetric(g: np.ndarray, mirror: np.ndarray) -> bool:
    return np.max(np.abs(g - mirror)) <= _SYMMETRY_TOL * np.max(np.abs(g))


def _half_sample_advance(g: np.ndarray) -> np.ndarray:
    """Band-limited circular shift ``g[n + 1/2]``; the Nyquist bin is dropped."""
    N = g.size
    f = np.fft.fftfreq(N, d=1.0 / N)
    return np.real(np.fft.ifft(np.fft.fft(g) * np.exp(1j * np.pi * f / N)))


def zak(g: np.ndarray, K: int) -> np.ndarray:
    """Discrete Zak transform with time period K: ``Z[r, n] = sum_l g[n + lK] e^{-j2pi rl/M}``."""
    M = g.size // K
    return np.fft.fft(g.reshape(M, K), axis=0)


def izak(Z: np.ndarray) -> np.ndarray:
    return np.fft.ifft(Z, axis=0).reshape(-1)


def dzt_orthogonalize(p: PulsePrototype) -> PulsePrototype:
    """Orthogonalize a prototype for the circular OQAM system.

    The OQAM basis modulates around ``D/2 = (MK-1)/2``, so real-field
    orthogonality needs a pulse symmetric about that half-sample point.
    Pulses centred on MK/2 are first advanced by half a sample.  Each Zak
    coefficient is then divided by the root of its energy summed with the
    partner K/2 samples away, which makes both the Gabor subsystem on the
    (K, 2/K) lattice orthonormal and every pulse energy one.
    """
    K, M, N = p.K, p.M, p.N
    if K % 2:
        raise ValueError(f"OQAM orthogonalization needs even K, got {K}")
    g = np.asarray(p.taps, dtype=float)
    n = np.arange(N)
    if not _symmetric(g, g[N - 1 - n]) and _symmetric(g, g[(N - n) % N]):
        g = _half_sample_advance(g)

    Z = zak(g, K)
    power = np.abs(Z) ** 2
    pair = power + np.roll(power, -K // 2, axis=1)
    if np.min(pair) <= 1e-14 * np.max(pair):
        raise DegeneratePulseError("pulse has a vanishing Zak-domain coefficient pair")
    q = np.real(izak(Z / np.sqrt(pair * K / 2)))
    q = q / np.sqrt(np.sum(q**2))
    return replace(p, taps=q, orthogonalized=True)


def edge_window(total_len: int, ramp_len: int, zero_ends: bool = False) -> WindowTaps:
    """Flat-top window with Hann ramps of ``ramp_len`` samples on both edges.

    By default the ramp omits the zero endpoints,
    ``0.5(1 - cos(pi (i+1)/(ramp_len+1)))``.  With ``zero_ends`` it starts at
    exactly zero instead, ``0.5(1 - cos(pi i/ramp_len))``, so a windowed
    frame has no residual step at its edges.
    """
    if ramp_len < 0 or 2 * ramp_len > total_len:
        raise ValueError(f"ramp of {ramp_len} samples does not fit {total_len}")
    w = np.ones(total_len)
    if ramp_len:
        if zero_ends:
            ramp = 0.5 * (1 - np.cos(np.pi * np.arange(ramp_len) / ramp_len))
        else:
            ramp = 0.5 * (1 - np.cos(np.pi * np.arange(1, ramp_len + 1) / (ramp_len + 1)))
        w[:ramp_len] = ramp
        w[total_len - ramp_len:] = ramp[::-1]
    return WindowTaps(w, ramp_len)
