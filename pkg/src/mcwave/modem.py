"""Bit mapping, symbol grids and OFDM / GFDM / WCP-COQAM frame synthesis."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .dsp import ComplexSignal
from .pulses import PulseKind, PulsePrototype, WindowTaps, build_prototype, dzt_orthogonalize, edge_window

# Sign of the subcarrier exponent in the GFDM/OFDM synthesis sum.  -1 keeps
# e^{-j2pi kn/K}; +1 gives the more common convention (a subcarrier index
# reversal, invisible in PSD and SER results).
GFDM_EXPONENT_SIGN = -1

QAM4_SCALE = 1 / np.sqrt(2)


class Scheme(str, Enum):
    OFDM = "ofdm"
    GFDM = "gfdm"
    WCP_COQAM = "wcp-coqam"


def centered_occupied(K: int, n_occupied: int) -> tuple[int, ...]:
    """Contiguous block of subcarriers centred on DC, guards split over both edges.

    Indices are natural (0..K-1); the block is ``-n/2 .. n/2 - 1`` in the
    FFT-shifted view and always contains the DC carrier.
    """
    if not 0 <= n_occupied <= K:
        raise ValueError(f"cannot occupy {n_occupied} of {K} subcarriers")
    if n_occupied == 0:
        return ()
    shifted = np.arange(n_occupied) - n_occupied // 2
    return tuple(sorted(int(s) % K for s in shifted))


@dataclass(frozen=True)
class ModemConfig:
    scheme: Scheme
    K: int
    M: int
    cp_len: int
    occupied: tuple[int, ...]
    window_ramp: int
    pulse: PulsePrototype = field(repr=False)
    window_zero_ends: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        occ = tuple(sorted(set(int(k) for k in self.occupied)))
        if any(k < 0 or k >= self.K for k in occ):
            raise ValueError("occupied subcarrier index out of range")
        object.__setattr__(self, "occupied", occ)
        if self.pulse.K != self.K or self.pulse.M != self.M:
            raise ValueError("pulse dimensions do not match the configuration")
        if self.scheme is Scheme.OFDM and self.M != 1:
            raise ValueError("OFDM uses a single time slot per symbol")
        if self.scheme is Scheme.WCP_COQAM:
            if self.K % 2:
                raise ValueError("WCP-COQAM needs an even number of subcarriers")
            if not self.pulse.orthogonalized:
                raise ValueError("WCP-COQAM needs an orthogonalized pulse")
        if self.cp_len < 0 or self.window_ramp < 0:
            raise ValueError("cp_len and window_ramp must be non-negative")
        if 2 * self.window_ramp > self.N + self.cp_len:
            raise ValueError("window ramps longer than the frame")

    @property
    def N(self) -> int:
        return self.K * self.M

    @property
    def frame_len(self) -> int:
        return self.N + self.cp_len

    @property
    def n_data(self) -> int:
        """Complex data symbols carried by one frame."""
        return len(self.occupied) * self.M

    @property
    def guard_mask(self) -> np.ndarray:
        mask = np.ones(self.K, dtype=bool)
        mask[list(self.occupied)] = False
        return mask


def make_config(scheme: Scheme | str, K: int = 128, M: int = 9, cp_len: int = 32,
                n_occupied: int | None = None, window_ramp: int = 0,
                pulse_kind: PulseKind | str = PulseKind.RC, rolloff: float = 0.1,
                window_zero_ends: bool = False) -> ModemConfig:
    """Build a configuration; OFDM gets a rectangular single-slot pulse."""
    scheme = Scheme(scheme)
    if scheme is Scheme.OFDM:
        pulse = build_prototype(PulseKind.RECTANGULAR, K, 1)
        M = 1
    else:
        pulse = build_prototype(pulse_kind, K, M, rolloff)
        if scheme is Scheme.WCP_COQAM:
            pulse = dzt_orthogonalize(pulse)
    occ = centered_occupied(K, K if n_occupied is None else n_occupied)
    return ModemConfig(scheme, K, M, cp_len, occ, window_ramp, pulse, window_zero_ends)


@dataclass(frozen=True)
class SymbolGrid:
    """K x M complex symbols, or K x 2M real symbols for WCP-COQAM."""

    values: np.ndarray
    variance: float = 1.0

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)


# ----------------------------------------------------------------------------
# 4-QAM
# ----------------------------------------------------------------------------


def map_qam4(bits) -> np.ndarray:
    """Gray 4-QAM: (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)."""
    b = np.asarray(bits, dtype=np.int64).reshape(-1)
    if b.size % 2:
        raise ValueError("4-QAM mapping needs an even number of bits")
    if np.any((b != 0) & (b != 1)):
        raise ValueError("bits must be 0 or 1")
    b = b.reshape(-1, 2)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) * QAM4_SCALE


def demap_qam4(symbols) -> np.ndarray:
    """Minimum-distance 4-QAM decision; points on a boundary go to bit 0."""
    s = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    bits = np.empty((s.size, 2), dtype=np.int64)
    bits[:, 0] = s.real < 0
    bits[:, 1] = s.imag < 0
    return bits.reshape(-1)


def qam4_decide(symbols) -> np.ndarray:
    """Hard 4-QAM decision returning constellation points (same shape)."""
    s = np.asarray(symbols)
    return (np.where(s.real < 0, -1.0, 1.0) + 1j * np.where(s.imag < 0, -1.0, 1.0)) * QAM4_SCALE


def random_qam4(rng: np.random.Generator, shape) -> np.ndarray:
    bits = rng.integers(0, 2, size=(int(np.prod(shape)) * 2,))
    return map_qam4(bits).reshape(shape)


# ----------------------------------------------------------------------------
# Grids
# ----------------------------------------------------------------------------


def build_symbol_grid(symbols, cfg: ModemConfig) -> SymbolGrid:
    """Place complex data symbols row-major on the occupied subcarriers.

    For WCP-COQAM each complex symbol at slot m becomes the real pair
    (Re, Im) at offset slots 2m and 2m + 1.
    """
    s = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    occ = list(cfg.occupied)
    if s.size != len(occ) * cfg.M:
        raise ValueError(f"expected {len(occ) * cfg.M} symbols, got {s.size}")
    if cfg.scheme is Scheme.WCP_COQAM:
        values = np.zeros((cfg.K, 2 * cfg.M))
        if occ:
            block = s.reshape(len(occ), cfg.M)
            values[occ, 0::2] = block.real
            values[occ, 1::2] = block.imag
    else:
        values = np.zeros((cfg.K, cfg.M), dtype=np.complex128)
        if occ:
            values[occ, :] = s.reshape(len(occ), cfg.M)
    return SymbolGrid(values, 1.0)


def grid_symbols(grid: SymbolGrid, cfg: ModemConfig) -> np.ndarray:
    """Inverse of :func:`build_symbol_grid`: complex symbols on occupied carriers."""
    v = np.asarray(grid.values)
    occ = list(cfg.occupied)
    if cfg.scheme is Scheme.WCP_COQAM:
        v = v[..., occ, 0::2] + 1j * v[..., occ, 1::2]
    else:
        v = v[..., occ, :]
    return v.reshape(*v.shape[:-2], -1)


# ----------------------------------------------------------------------------
# Synthesis
# ----------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _shift_matrix(taps: bytes, N: int, step: int, count: int) -> np.ndarray:
    p = np.frombuffer(taps, dtype=float)
    return np.stack([np.roll(p, m * step) for m in range(count)], axis=1)


def pulse_shifts(pulse: PulsePrototype, step: int, count: int) -> np.ndarray:
    """Columns ``p[(n - m*step) mod N]`` for m = 0..count-1 (N x count)."""
    return _shift_matrix(pulse.taps.tobytes(), pulse.N, step, count)


def gfdm_tx(d: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Batched GFDM/OFDM synthesis, ``d`` of shape (..., K, M) -> (..., MK)."""
    K, M = cfg.K, cfg.M
    d = np.asarray(d, dtype=np.complex128)
    if d.shape[-2:] != (K, M):
        raise ValueError(f"grid shape {d.shape[-2:]} does not match ({K}, {M})")
    # sum_k d e^{-j2pi kn/K} is K-periodic in n
    if GFDM_EXPONENT_SIGN < 0:
        tones = np.fft.fft(d, axis=-2)
    else:
        tones = K * np.fft.ifft(d, axis=-2)
    tones = np.concatenate([tones] * M, axis=-2)
    P = pulse_shifts(cfg.pulse, K, M)
    return np.einsum("nm,...nm->...n", P, tones)


def gfdm_modulate(grid: SymbolGrid, cfg: ModemConfig) -> ComplexSignal:
    """x[n] = sum_k sum_m d[k,m] p[(n - mK) mod MK] exp(-j 2pi k n / K)."""
    if cfg.scheme not in (Scheme.GFDM, Scheme.OFDM):
        raise ValueError(f"gfdm_modulate cannot synthesize {cfg.scheme.value}")
    if cfg.pulse.N != cfg.N:
        raise ValueError("pulse length does not match MK")
    return ComplexSignal(gfdm_tx(grid.values, cfg))


def _coqam_phase(K: int, M: int) -> np.ndarray:
    # exp(j phi_{k,m}) exp(-j pi k D / K) with phi = pi/2 (k + m), D = MK - 1
    k = np.arange(K)[:, None]
    m = np.arange(2 * M)[None, :]
    D = K * M - 1
    return np.exp(1j * np.pi / 2 * (k + m)) * np.exp(-1j * np.pi * k * D / K)


def coqam_tx(d: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Batched WCP-COQAM synthesis, real ``d`` of shape (..., K, 2M) -> (..., MK)."""
    K, M = cfg.K, cfg.M
    d = np.asarray(d, dtype=float)
    if d.shape[-2:] != (K, 2 * M):
        raise ValueError(f"real grid shape {d.shape[-2:]} does not match ({K}, {2 * M})")
    c = d * _coqam_phase(K, M)
    tones = K * np.fft.ifft(c, axis=-2)
    tones = np.concatenate([tones] * M, axis=-2)
    Q = pulse_shifts(cfg.pulse, K // 2, 2 * M)
    return np.einsum("nm,...nm->...n", Q, tones)


def wcp_coqam_modulate(grid: SymbolGrid, cfg: ModemConfig) -> ComplexSignal:
    """Circular OQAM synthesis with offset K/2, phase pi/2 (k+m), centre D/2."""
    if cfg.scheme is not Scheme.WCP_COQAM or not cfg.pulse.orthogonalized:
        raise ValueError("wcp_coqam_modulate needs a WCP-COQAM config with an orthogonalized pulse")
    if not grid.is_real:
        raise ValueError("WCP-COQAM carries real symbols")
    return ComplexSignal(coqam_tx(grid.values, cfg))


def modulate(grid: SymbolGrid, cfg: ModemConfig) -> ComplexSignal:
    if cfg.scheme is Scheme.WCP_COQAM:
        return wcp_coqam_modulate(grid, cfg)
    return gfdm_modulate(grid, cfg)


def add_cp(signal: ComplexSignal, cp_len: int) -> ComplexSignal:
    x = signal.samples
    if not 0 <= cp_len < x.size:
        raise ValueError(f"cp_len {cp_len} must be below the signal length {x.size}")
    if cp_len == 0:
        return signal
    return ComplexSignal(np.concatenate([x[-cp_len:], x]), signal.sample_rate)


def apply_edge_window(signal: ComplexSignal, w: WindowTaps) -> ComplexSignal:
    if w.taps.size != len(signal):
        raise ValueError(f"window length {w.taps.size} != signal length {len(signal)}")
    return ComplexSignal(signal.samples * w.taps, signal.sample_rate)


def frame_window(cfg: ModemConfig) -> WindowTaps:
    return edge_window(cfg.frame_len, cfg.window_ramp, cfg.window_zero_ends)


def transmit_frame(grid: SymbolGrid, cfg: ModemConfig) -> ComplexSignal:
    """Modulate, prepend the CP and window the CP-extended frame."""
    x = add_cp(modulate(grid, cfg), cfg.cp_len)
    if cfg.window_ramp:
        x = apply_edge_window(x, frame_window(cfg))
    return x


def transmit_batch(grids: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Vectorized :func:`transmit_frame` over a leading batch axis."""
    x = coqam_tx(grids, cfg) if cfg.scheme is Scheme.WCP_COQAM else gfdm_tx(grids, cfg)
    if cfg.cp_len:
        x = np.concatenate([x[..., -cfg.cp_len:], x], axis=-1)
    if cfg.window_ramp:
        x = x * frame_window(cfg).taps
    return x


def random_grids(rng: np.random.Generator, cfg: ModemConfig, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` frames of 4-QAM data; returns (complex symbols, grids)."""
    occ = list(cfg.occupied)
    sym = random_qam4(rng, (count, len(occ), cfg.M))
    if cfg.scheme is Scheme.WCP_COQAM:
        grids = np.zeros((count, cfg.K, 2 * cfg.M))
        grids[:, occ, 0::2] = sym.real
        grids[:, occ, 1::2] = sym.imag
    else:
        grids = np.zeros((count, cfg.K, cfg.M), dtype=np.complex128)
        grids[:, occ, :] = sym
    return sym.reshape(count, -1), grids
