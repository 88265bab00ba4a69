"""Static multipath channel with CFO and AWGN, receiver bank and SER counting."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .dsp import ComplexSignal, qfunc
from .modem import (
    GFDM_EXPONENT_SIGN,
    ModemConfig,
    Scheme,
    SymbolGrid,
    _coqam_phase,
    grid_symbols,
    pulse_shifts,
    qam4_decide,
)

# Reduced COST-207 hilly-terrain profile: (delay in microseconds, power in dB)
COST207_HT = ((0.0, 0.0), (0.1, -1.5), (0.3, -4.5), (0.5, -7.5), (15.0, -8.0), (17.2, -17.7))
# 1.8 MHz keeps the 17.2 us excess delay at 31 samples, inside the 32-sample CP.
DEFAULT_SAMPLE_RATE_HZ = 1.8e6
DSIC_ITERATIONS = 3


class SingularChannelError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


class Receiver(str, Enum):
    OFDM = "ofdm"
    GFDM_ZF = "gfdm-zf"
    GFDM_MF = "gfdm-mf"
    GFDM_MF_DSIC = "gfdm-mf-dsic"
    WCP_COQAM = "wcp-coqam"
    OFDM_AWGN = "ofdm-awgn"


@dataclass(frozen=True)
class ChannelSpec:
    """Static tapped-delay-line channel plus CFO and AWGN.

    ``cfo_frac`` is relative to delta_f = F_s / cfo_ref_len, where
    ``cfo_ref_len`` is M*K samples.  ``noise_var`` is the complex noise
    variance per sample.
    """

    taps: tuple[tuple[int, complex], ...]
    cfo_frac: float = 0.0
    noise_var: float = 0.0
    seed: int = 0
    cfo_ref_len: int = 1152

    def __post_init__(self):
        if not self.taps:
            raise ValueError("channel needs at least one tap")
        if any(d < 0 for d, _ in self.taps):
            raise ValueError("tap delays must be non-negative")
        if self.noise_var < 0:
            raise ValueError("noise variance must be non-negative")
        merged: dict[int, complex] = {}
        for d, g in self.taps:  # paths landing on one sample add coherently
            merged[int(d)] = merged.get(int(d), 0j) + complex(g)
        power = sum(abs(g) ** 2 for g in merged.values())
        if power <= 0:
            raise ValueError("channel taps carry no power")
        taps = tuple((d, g / np.sqrt(power)) for d, g in sorted(merged.items()))
        object.__setattr__(self, "taps", taps)

    @property
    def memory(self) -> int:
        return max(d for d, _ in self.taps)

    @property
    def impulse_response(self) -> np.ndarray:
        h = np.zeros(self.memory + 1, dtype=np.complex128)
        for d, g in self.taps:
            h[d] += g
        return h


def identity_channel(**kw) -> ChannelSpec:
    return ChannelSpec(((0, 1.0),), **kw)


def cost207_hilly_terrain(seed: int, sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
                          **kw) -> ChannelSpec:
    """One static complex-Gaussian draw of the reduced hilly-terrain profile."""
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    taps = []
    for delay_us, power_db in COST207_HT:
        g = np.sqrt(10 ** (power_db / 10) / 2) * (rng.standard_normal() + 1j * rng.standard_normal())
        taps.append((int(round(delay_us * 1e-6 * sample_rate_hz)), g))
    return ChannelSpec(tuple(taps), seed=seed, **kw)


def channel_freq_response(ch: ChannelSpec | np.ndarray, n_fft: int) -> np.ndarray:
    h = ch.impulse_response if isinstance(ch, ChannelSpec) else np.asarray(ch)
    if h.size > n_fft:
        raise ValueError("channel longer than the DFT size")
    return np.fft.fft(h, n_fft)


def cfo_rotation(n_samples: int, cfo_frac: float, ref_len: int) -> np.ndarray:
    return np.exp(2j * np.pi * cfo_frac * np.arange(n_samples) / ref_len)


def complex_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def apply_channel(signal: ComplexSignal, ch: ChannelSpec, rng: np.random.Generator | None = None) -> ComplexSignal:
    """Linear convolution, CFO rotation, then AWGN.

    The output keeps the channel memory: ``len(signal) + memory`` samples.
    """
    x = signal.samples
    if x.size <= ch.memory:
        raise ValueError("signal must be longer than the channel memory")
    y = np.convolve(x, ch.impulse_response)
    if ch.cfo_frac:
        y = y * cfo_rotation(y.size, ch.cfo_frac, ch.cfo_ref_len)
    if ch.noise_var:
        if rng is None:
            rng = np.random.default_rng(ch.seed)
        y = y + np.sqrt(ch.noise_var) * complex_noise(rng, y.shape)
    return ComplexSignal(y, signal.sample_rate)


# ----------------------------------------------------------------------------
# Receivers (batched over a leading axis, frames already CP-stripped)
# ----------------------------------------------------------------------------


def _check_freq(ch_freq, n: int) -> np.ndarray:
    H = np.asarray(ch_freq, dtype=np.complex128).reshape(-1)
    if H.size != n:
        raise ValueError(f"channel response needs {n} bins, got {H.size}")
    if np.min(np.abs(H)) < 1e-12:
        raise SingularChannelError("channel response has a (near) zero bin")
    return H


def _strip(rx: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    rx = np.asarray(rx, dtype=np.complex128)
    if rx.shape[-1] < cfg.frame_len:
        raise ValueError(f"received frame shorter than {cfg.frame_len} samples")
    return rx[..., cfg.cp_len:cfg.cp_len + cfg.N]


def _equalize(y: np.ndarray, H: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.fft.fft(y, axis=-1) / H, axis=-1)


def _zero_guards(values: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    values[..., cfg.guard_mask, :] = 0
    return values


def ofdm_demod(rx: np.ndarray, cfg: ModemConfig, ch_freq) -> np.ndarray:
    y = _strip(rx, cfg)
    H = _check_freq(ch_freq, cfg.K)
    Z = np.fft.fft(y, axis=-1) / H
    if GFDM_EXPONENT_SIGN < 0:
        Z = np.roll(Z[..., ::-1], 1, axis=-1)  # bin (-k) mod K carries subcarrier k
    d = Z / (cfg.K * cfg.pulse.taps[0])
    return _zero_guards(d[..., :, None].copy(), cfg)


def ofdm_receive(rx: ComplexSignal, cfg: ModemConfig, ch_freq) -> SymbolGrid:
    """CP removal, K-point DFT and single-tap ZF with the true channel."""
    if cfg.scheme is not Scheme.OFDM:
        raise ValueError("ofdm_receive needs an OFDM configuration")
    return SymbolGrid(ofdm_demod(rx.samples, cfg, ch_freq))


@lru_cache(maxsize=8)
def _gfdm_matrices(taps: bytes, K: int, M: int) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    N = K * M
    p = np.frombuffer(taps, dtype=float)
    P = np.stack([np.roll(p, m * K) for m in range(M)], axis=1)
    E = np.exp(GFDM_EXPONENT_SIGN * 2j * np.pi * np.outer(np.arange(N), np.arange(K)) / K)
    A = (E[:, :, None] * P[:, None, :]).reshape(N, K * M)
    try:
        A_inv = np.linalg.inv(A)
        if np.linalg.cond(A) > 1e12:
            A_inv = None
    except np.linalg.LinAlgError:
        A_inv = None
    return A, A_inv, A.conj().T @ A


def modulation_matrix(cfg: ModemConfig) -> np.ndarray:
    """GFDM matrix with column ``k*M + m`` holding the (k, m) basis signal."""
    return _gfdm_matrices(cfg.pulse.taps.tobytes(), cfg.K, cfg.M)[0]


def _dsic(z: np.ndarray, G: np.ndarray, active: np.ndarray, iterations: int) -> np.ndarray:
    # z: (N, F) matched-filter outputs; serial cancellation in index order
    soft = z.copy()
    dec = np.zeros_like(z)
    dec[active] = qam4_decide(z[active])
    for _ in range(iterations):
        for i in active:
            r = z[i] - G[i] @ dec + G[i, i] * dec[i]
            soft[i] = r
            dec[i] = qam4_decide(r)
    return soft


def gfdm_demod(rx: np.ndarray, cfg: ModemConfig, ch_freq, mode: Receiver | str = Receiver.GFDM_ZF,
               dsic_iters: int = DSIC_ITERATIONS) -> np.ndarray:
    mode = Receiver(mode)
    y = _equalize(_strip(rx, cfg), _check_freq(ch_freq, cfg.N))
    A, A_inv, G = _gfdm_matrices(cfg.pulse.taps.tobytes(), cfg.K, cfg.M)
    Y = np.atleast_2d(y).T  # (N, F)
    if mode is Receiver.GFDM_ZF:
        if A_inv is None:
            raise SingularMatrixError("GFDM modulation matrix is singular")
        d = A_inv @ Y
    elif mode is Receiver.GFDM_MF:
        d = A.conj().T @ Y
    elif mode is Receiver.GFDM_MF_DSIC:
        d = A.conj().T @ Y
        if dsic_iters > 0:
            active = np.flatnonzero(~np.repeat(cfg.guard_mask, cfg.M))
            d = _dsic(d, G, active, dsic_iters)
    else:
        raise ValueError(f"{mode.value} is not a GFDM receiver")
    d = d.T.reshape(y.shape[:-1] + (cfg.K, cfg.M))
    return _zero_guards(d, cfg)


def gfdm_receive(rx: ComplexSignal, cfg: ModemConfig, ch_freq, mode: Receiver | str = Receiver.GFDM_ZF,
                 dsic_iters: int = DSIC_ITERATIONS) -> SymbolGrid:
    """CP removal, MK-point single-tap ZF, then ZF / MF / MF-DSIC detection."""
    if cfg.scheme not in (Scheme.GFDM, Scheme.OFDM):
        raise ValueError("gfdm_receive needs a GFDM (or OFDM) configuration")
    return SymbolGrid(gfdm_demod(rx.samples, cfg, ch_freq, mode, dsic_iters))


def coqam_demod(rx: np.ndarray, cfg: ModemConfig, ch_freq) -> np.ndarray:
    if not cfg.pulse.orthogonalized:
        raise ValueError("WCP-COQAM analysis needs an orthogonalized pulse")
    K, M, N = cfg.K, cfg.M, cfg.N
    y = _equalize(_strip(rx, cfg), _check_freq(ch_freq, N))
    Q = pulse_shifts(cfg.pulse, K // 2, 2 * M)  # (N, 2M)
    v = y[..., :, None] * Q
    folded = v.reshape(v.shape[:-2] + (M, K, 2 * M)).sum(axis=-3)
    proj = np.fft.fft(folded, axis=-2)  # sum_n r q e^{-j2pi kn/K}
    d = np.real(proj * np.conj(_coqam_phase(K, M)))
    return _zero_guards(d, cfg)


def coqam_receive(rx: ComplexSignal, cfg: ModemConfig, ch_freq) -> SymbolGrid:
    """CP removal, single-tap ZF, then the real-part OQAM analysis bank."""
    if cfg.scheme is not Scheme.WCP_COQAM:
        raise ValueError("coqam_receive needs a WCP-COQAM configuration")
    return SymbolGrid(coqam_demod(rx.samples, cfg, ch_freq))


def demodulate(rx: np.ndarray, cfg: ModemConfig, ch_freq, receiver: Receiver | str,
               dsic_iters: int = DSIC_ITERATIONS) -> np.ndarray:
    receiver = Receiver(receiver)
    if receiver is Receiver.OFDM:
        return ofdm_demod(rx, cfg, ch_freq)
    if receiver is Receiver.WCP_COQAM:
        return coqam_demod(rx, cfg, ch_freq)
    return gfdm_demod(rx, cfg, ch_freq, receiver, dsic_iters)


# ----------------------------------------------------------------------------
# Error counting
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SerPoint:
    snr_db: float
    cfo_frac: float
    receiver: Receiver
    errors: int
    trials: int
    symbols_per_trial: int
    analytic_ser: float | None = None

    @property
    def ser(self) -> float:
        if self.analytic_ser is not None:
            return self.analytic_ser
        return self.errors / (self.trials * self.symbols_per_trial)


@dataclass
class SerCurve:
    points: list[SerPoint] = field(default_factory=list)

    def select(self, receiver: Receiver | str, cfo_frac: float | None = None) -> list[SerPoint]:
        receiver = Receiver(receiver)
        return [p for p in self.points if p.receiver is receiver
                and (cfo_frac is None or np.isclose(p.cfo_frac, cfo_frac))]


def ser_4qam(snr_db):
    """Exact 4-QAM SER over AWGN: 2Q(sqrt(g)) - Q(sqrt(g))^2, g = Es/N0."""
    g = 10 ** (np.asarray(snr_db, dtype=float) / 10)
    q = qfunc(np.sqrt(g))
    return 2 * q - q**2


def awgn_ser_4qam_reference(snr_db_grid) -> SerCurve:
    grid = np.asarray(snr_db_grid, dtype=float).reshape(-1)
    return SerCurve([SerPoint(float(s), 0.0, Receiver.OFDM_AWGN, 0, 0, 0, float(ser_4qam(s)))
                     for s in grid])


def ser_count(tx: SymbolGrid | np.ndarray, rx: SymbolGrid | np.ndarray, cfg: ModemConfig) -> tuple[int, int]:
    """Hard-decision symbol errors over the occupied carriers."""
    t = tx.values if isinstance(tx, SymbolGrid) else np.asarray(tx)
    r = rx.values if isinstance(rx, SymbolGrid) else np.asarray(rx)
    if t.shape != r.shape:
        raise ValueError(f"grid shapes differ: {t.shape} vs {r.shape}")
    a = qam4_decide(grid_symbols(SymbolGrid(t), cfg))
    b = qam4_decide(grid_symbols(SymbolGrid(r), cfg))
    return int(np.count_nonzero(a != b)), int(a.size)
