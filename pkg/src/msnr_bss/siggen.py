"""Bit streams and real-valued QPSK / OOK source waveforms.

Signals are plain ``numpy`` arrays of shape ``(n_channels, n_samples)``;
the modulators return a single channel, ``(1, n_samples)``.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np

# Bit streams from the optical wireless demo. BIT2 as printed has 19 bits;
# BIT2_PADDED appends a trailing 0 so OOK at 100 samples/bit gives N = 2000.
BIT1 = (0, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 1, 0, 1, 0, 0, 1)
BIT2 = (0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 0, 1, 0, 1)
BIT2_PADDED = BIT2 + (0,)

# Gray map for bit pairs -> carrier phase
QPSK_PHASES = {
    (0, 0): np.pi / 4,
    (0, 1): 3 * np.pi / 4,
    (1, 1): 5 * np.pi / 4,
    (1, 0): 7 * np.pi / 4,
}


@dataclass(frozen=True)
class ModulationSpec:
    """Rectangular-pulse modulation parameters.

    ``carrier_cycles_per_symbol`` is only used by QPSK and must be a
    positive integer there so every symbol spans whole carrier cycles.
    """

    scheme: Literal["qpsk", "ook"]
    samples_per_symbol: int
    carrier_cycles_per_symbol: int = 4
    amplitude: float = 1.0

    def __post_init__(self):
        scheme = str(self.scheme).lower()
        object.__setattr__(self, "scheme", scheme)
        if scheme not in ("qpsk", "ook"):
            raise ValueError(f"unknown modulation scheme {self.scheme!r}")
        if int(self.samples_per_symbol) != self.samples_per_symbol or self.samples_per_symbol < 1:
            raise ValueError("samples_per_symbol must be a positive integer")
        if self.carrier_cycles_per_symbol < 0 or int(self.carrier_cycles_per_symbol) != self.carrier_cycles_per_symbol:
            raise ValueError("carrier_cycles_per_symbol must be a non-negative integer")
        if scheme == "qpsk" and self.carrier_cycles_per_symbol < 1:
            raise ValueError("QPSK needs at least one carrier cycle per symbol")
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise ValueError("amplitude must be positive")


def as_bits(bits):
    """Validate and convert a bit sequence (or a '0101' string) to an int8 array."""
    if isinstance(bits, str):
        chars = [c for c in bits if not c.isspace() and c != ","]
        if any(c not in "01" for c in chars):
            raise ValueError(f"bit string may contain only 0 and 1: {bits!r}")
        bits = [int(c) for c in chars]
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("bit vector must be a non-empty 1-D sequence")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit vector entries must be 0 or 1")
    return arr.astype(np.int8)


def as_signal_matrix(x, name="signal"):
    """Return ``x`` as a finite float array of shape ``(n_channels, n_samples)``.

    A 1-D input is treated as a single channel.
    """
    x = np.array(x, dtype=float)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty (channels, samples) matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite samples")
    return x


def random_bits(count, seed):
    """``count`` uniform random bits from numpy's PCG64 generator seeded with ``seed``."""
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=int(count), dtype=np.int8)


def modulate_qpsk(bits, spec):
    """Real passband QPSK.

    Sample ``k`` of symbol ``m`` is
    ``amplitude * cos(2*pi*cycles*k/sps + phase_m)`` where ``phase_m`` is
    the Gray-mapped phase of the m-th bit pair.
    """
    bits = as_bits(bits)
    if spec.scheme != "qpsk":
        raise ValueError("modulate_qpsk needs a QPSK spec")
    if bits.size % 2:
        raise ValueError("QPSK requires even bit count")
    sps = spec.samples_per_symbol
    phases = np.array([QPSK_PHASES[(int(a), int(b))] for a, b in bits.reshape(-1, 2)])
    k = np.arange(sps)
    carrier = 2 * np.pi * spec.carrier_cycles_per_symbol * k / sps
    wave = spec.amplitude * np.cos(carrier[np.newaxis, :] + phases[:, np.newaxis])
    return wave.reshape(1, -1)


def modulate_ook(bits, spec):
    """Unipolar NRZ on-off keying: each bit held for ``samples_per_symbol`` samples."""
    bits = as_bits(bits)
    if spec.scheme != "ook":
        raise ValueError("modulate_ook needs an OOK spec")
    wave = spec.amplitude * np.repeat(bits.astype(float), spec.samples_per_symbol)
    return wave.reshape(1, -1)


def modulate(bits, spec):
    if spec.scheme == "qpsk":
        return modulate_qpsk(bits, spec)
    return modulate_ook(bits, spec)
