"""OFDM, GFDM and WCP-COQAM transceiver simulation for out-of-band emission
and CFO robustness comparisons."""

from .dsp import ComplexSignal, circular_shift, dft, qfunc
from .modem import ModemConfig, Scheme, SymbolGrid, make_config
from .pulses import PulseKind, PulsePrototype, build_prototype, dzt_orthogonalize, edge_window

__all__ = [
    "ComplexSignal",
    "ModemConfig",
    "PulseKind",
    "PulsePrototype",
    "Scheme",
    "SymbolGrid",
    "build_prototype",
    "circular_shift",
    "dft",
    "dzt_orthogonalize",
    "edge_window",
    "make_config",
    "qfunc",
]
