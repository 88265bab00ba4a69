"""PSD and SER experiment drivers producing sorted result tables."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .link import (
    DSIC_ITERATIONS,
    ChannelSpec,
    Receiver,
    awgn_ser_4qam_reference,
    cfo_rotation,
    channel_freq_response,
    complex_noise,
    cost207_hilly_terrain,
    demodulate,
    identity_channel,
    ser_count,
)
from .modem import ModemConfig, Scheme, make_config, random_grids, transmit_batch
from .spectral import (
    OVERSAMPLING,
    AnalyticPsdConfig,
    PsdEstimate,
    analytic_psd,
    oversample_truncate,
    periodogram_psd,
)

TABLE1 = dict(K=128, M=9, cp_len=32, n_occupied=76, window_ramp=18, rolloff=0.1, mc_runs=300)
EQUAL_SE_K = 1152
EQUAL_SE_OCCUPIED = 684
VARIANTS = ("plain", "G", "W", "GW")
RECEIVERS = {
    Scheme.OFDM: (Receiver.OFDM,),
    Scheme.GFDM: (Receiver.GFDM_ZF, Receiver.GFDM_MF, Receiver.GFDM_MF_DSIC),
    Scheme.WCP_COQAM: (Receiver.WCP_COQAM,),
}

PSD_COLUMNS = ("scheme", "variant", "equal_se", "freq_over_fs", "psd_db")
SER_COLUMNS = ("scheme", "receiver", "cfo_frac", "snr_db", "errors", "trials", "ser")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class Experiment(str, Enum):
    PSD = "psd"
    SER = "ser"
    ANALYTIC_PSD = "analytic-psd"


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: Experiment
    schemes: tuple[Scheme, ...] = tuple(Scheme)
    variants: tuple[str, ...] = VARIANTS
    equal_se: bool = False
    mc_runs: int = TABLE1["mc_runs"]
    seed: int = 0
    cfo_sweep: tuple[float, ...] = (0.0, 0.05, 0.10, 0.15)
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    output_path: str = ""
    channel: str = "cost207"
    dsic_iters: int = DSIC_ITERATIONS
    window_ramp: int = TABLE1["window_ramp"]
    window_zero_ends: bool = True
    analytic_points: int = 6001

    def __post_init__(self):
        try:
            object.__setattr__(self, "experiment", Experiment(self.experiment))
            object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise ConfigError(f"unknown variant(s) {bad}; choose from {VARIANTS}")
        if self.mc_runs < 1:
            raise ConfigError("mc_runs must be at least 1")
        if self.channel not in ("cost207", "awgn"):
            raise ConfigError(f"unknown channel {self.channel!r}")
        if self.dsic_iters < 0 or self.window_ramp < 0:
            raise ConfigError("dsic_iters and window_ramp must be non-negative")


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    """Independent stream per (master seed, trial), whatever the schedule."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream, trial]))


# ----------------------------------------------------------------------------
# PSD
# ----------------------------------------------------------------------------


def psd_config(scheme: Scheme | str, variant: str, equal_se: bool, window_ramp: int = 18,
               window_zero_ends: bool = True) -> tuple[ModemConfig, int]:
    """Modem configuration for a PSD curve and the symbols per Monte-Carlo frame.

    Unequal efficiency sends M = 9 back-to-back K-carrier OFDM symbols per
    frame; equal efficiency gives OFDM MK carriers in one symbol.
    """
    scheme = Scheme(scheme)
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    guards = "G" in variant
    ramp = window_ramp if "W" in variant else 0
    K, M = TABLE1["K"], TABLE1["M"]
    n_occ = TABLE1["n_occupied"] if guards else None
    per_frame = 1
    if scheme is Scheme.OFDM:
        if equal_se:
            K, n_occ = EQUAL_SE_K, (EQUAL_SE_OCCUPIED if guards else None)
        else:
            per_frame = M
        M = 1
    cfg = make_config(scheme, K=K, M=M, cp_len=TABLE1["cp_len"], n_occupied=n_occ,
                      window_ramp=ramp, rolloff=TABLE1["rolloff"], window_zero_ends=window_zero_ends)
    return cfg, per_frame


def simulate_psd(scheme: Scheme | str, variant: str, equal_se: bool, mc_runs: int, seed: int,
                 window_ramp: int = 18, window_zero_ends: bool = True) -> PsdEstimate:
    """Averaged periodogram of sixfold-oversampled random frames."""
    cfg, per_frame = psd_config(scheme, variant, equal_se, window_ramp, window_zero_ends)
    frames = []
    for trial in range(mc_runs):
        _, grids = random_grids(trial_rng(seed, trial), cfg, per_frame)
        # each symbol is interpolated and truncated on its own
        y = oversample_truncate(transmit_batch(grids, cfg), OVERSAMPLING)
        frames.append(y.reshape(-1))
    return periodogram_psd(np.stack(frames), sample_rate=OVERSAMPLING)


def analytic_curve(variant: str, equal_se: bool, freqs) -> PsdEstimate:
    cfg = AnalyticPsdConfig(K=TABLE1["K"], L=TABLE1["K"] + TABLE1["cp_len"], n_guard=TABLE1["cp_len"],
                            M=TABLE1["M"], n_occupied=TABLE1["n_occupied"] if "G" in variant else None)
    return analytic_psd(cfg, freqs, equal_se)


def run_psd_experiment(spec: ExperimentSpec) -> list[tuple]:
    if spec.experiment not in (Experiment.PSD, Experiment.ANALYTIC_PSD):
        raise ConfigError("run_psd_experiment needs a psd or analytic-psd spec")
    rows = []
    if spec.experiment is Experiment.ANALYTIC_PSD:
        freqs = np.linspace(-OVERSAMPLING / 2, OVERSAMPLING / 2, spec.analytic_points)
        for variant in spec.variants:
            if "W" in variant:
                continue  # closed form covers rectangular pulses only
            psd = analytic_curve(variant, spec.equal_se, freqs)
            rows += _psd_rows(Scheme.OFDM, variant, spec.equal_se, psd)
    else:
        for scheme in spec.schemes:
            for variant in spec.variants:
                psd = simulate_psd(scheme, variant, spec.equal_se, spec.mc_runs, spec.seed,
                                   spec.window_ramp, spec.window_zero_ends)
                rows += _psd_rows(scheme, variant, spec.equal_se, psd)
    return sorted(rows)


def _psd_rows(scheme: Scheme, variant: str, equal_se: bool, psd: PsdEstimate) -> list[tuple]:
    return [(scheme.value, variant, int(equal_se), float(f), float(v))
            for f, v in zip(psd.freqs, psd.values_db)]


# ----------------------------------------------------------------------------
# SER
# ----------------------------------------------------------------------------


def ser_config(scheme: Scheme | str) -> ModemConfig:
    """Equal-efficiency link configuration: guards on, no transmit window."""
    scheme = Scheme(scheme)
    if scheme is Scheme.OFDM:
        return make_config(scheme, K=EQUAL_SE_K, M=1, cp_len=TABLE1["cp_len"], n_occupied=EQUAL_SE_OCCUPIED)
    return make_config(scheme, K=TABLE1["K"], M=TABLE1["M"], cp_len=TABLE1["cp_len"],
                       n_occupied=TABLE1["n_occupied"], rolloff=TABLE1["rolloff"])


def noise_var_for(snr_db: float) -> float:
    """N0 for unit-energy data symbols (Es/N0 = snr)."""
    return 0.0 if np.isinf(snr_db) and snr_db > 0 else float(10 ** (-snr_db / 10))


def simulate_ser(cfg: ModemConfig, receivers, channel: ChannelSpec, cfo_sweep, snr_grid_db,
                 mc_runs: int, seed: int, dsic_iters: int = DSIC_ITERATIONS,
                 chunk: int = 100) -> dict[tuple[Receiver, float, float], tuple[int, int]]:
    """Error counts keyed by (receiver, cfo, snr).

    Every trial reuses its data and unit-variance noise draw across the
    CFO and SNR sweep, so curves differ only through the swept parameter.
    """
    h = channel.impulse_response
    H = channel_freq_response(h, cfg.N if cfg.scheme is not Scheme.OFDM else cfg.K)
    counts: dict = {}
    for start in range(0, mc_runs, chunk):
        trials = range(start, min(start + chunk, mc_runs))
        grids, noise = [], []
        for t in trials:
            rng = trial_rng(seed, t, stream=1)
            grids.append(random_grids(rng, cfg, 1)[1][0])
            noise.append(complex_noise(rng, cfg.frame_len + h.size - 1))
        grids, noise = np.stack(grids), np.stack(noise)
        tx = transmit_batch(grids, cfg)
        faded = np.stack([np.convolve(x, h) for x in tx])
        for cfo in cfo_sweep:
            rotated = faded * cfo_rotation(faded.shape[-1], cfo, channel.cfo_ref_len) if cfo else faded
            for snr in snr_grid_db:
                rx = rotated + np.sqrt(noise_var_for(snr)) * noise
                for rcv in receivers:
                    est = demodulate(rx, cfg, H, rcv, dsic_iters)
                    e, n = ser_count(grids, est, cfg)
                    key = (Receiver(rcv), float(cfo), float(snr))
                    pe, pn = counts.get(key, (0, 0))
                    counts[key] = (pe + e, pn + n)
    return counts


def make_channel(kind: str, seed: int) -> ChannelSpec:
    ref = TABLE1["K"] * TABLE1["M"]
    if kind == "awgn":
        return identity_channel(cfo_ref_len=ref)
    return cost207_hilly_terrain(seed, cfo_ref_len=ref)


def run_ser_experiment(spec: ExperimentSpec) -> list[tuple]:
    if spec.experiment is not Experiment.SER:
        raise ConfigError("run_ser_experiment needs a ser spec")
    channel = make_channel(spec.channel, spec.seed)
    rows = []
    for scheme in spec.schemes:
        cfg = ser_config(scheme)
        counts = simulate_ser(cfg, RECEIVERS[scheme], channel, spec.cfo_sweep, spec.snr_grid_db,
                              spec.mc_runs, spec.seed, spec.dsic_iters)
        for (rcv, cfo, snr), (errors, total) in counts.items():
            rows.append((scheme.value, rcv.value, cfo, snr, errors, spec.mc_runs, errors / total))
    for p in awgn_ser_4qam_reference(spec.snr_grid_db).points:
        rows.append((Scheme.OFDM.value, p.receiver.value, 0.0, p.snr_db, 0, 0, p.ser))
    return sorted(rows)


# ----------------------------------------------------------------------------
# Output
# ----------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def run(spec: ExperimentSpec) -> str:
    """Run an experiment and return its CSV text."""
    if spec.experiment is Experiment.SER:
        return rows_to_csv(SER_COLUMNS, run_ser_experiment(spec))
    return rows_to_csv(PSD_COLUMNS, run_psd_experiment(spec))
