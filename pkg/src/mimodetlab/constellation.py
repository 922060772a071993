"""Square M-QAM and BPSK constellations with per-axis Gray coding.

Symbols live on the odd-integer grid: real/imag parts in
{-(sqrt(M)-1), ..., -1, +1, ..., +(sqrt(M)-1)} (BPSK: {-1, +1} real).
The average symbol energy is E_s = 2(M-1)/3 for M-QAM and 1 for BPSK.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

SUPPORTED_ORDERS = (2, 4, 16, 64, 256)


def _gray_encode(b: np.ndarray) -> np.ndarray:
    return b ^ (b >> 1)


@dataclass(frozen=True)
class Constellation:
    """Immutable M-QAM symbol set.

    points is ordered lexicographically by (real, imag); that order is the
    tie-break order used by the ML and sphere detectors. bit_patterns[i]
    is the integer whose bits (MSB first, real axis owning the high half)
    label points[i].
    """

    order: int
    bits_per_symbol: int
    points: np.ndarray
    bit_patterns: np.ndarray
    avg_energy: float
    _pattern_to_index: np.ndarray = field(repr=False)

    @property
    def levels(self) -> np.ndarray:
        """Per-axis amplitude levels, ascending."""
        side = int(round(np.sqrt(self.order)))
        if self.order == 2:
            return np.array([-1.0, 1.0])
        return 2.0 * np.arange(side) - (side - 1)


def build_constellation(M: int) -> Constellation:
    """Build the Gray-coded constellation of order M.

    M must be 2 (BPSK) or one of 4, 16, 64, 256.
    """
    if M not in SUPPORTED_ORDERS:
        raise ConfigurationError(f"unsupported modulation order {M}; "
                                 f"supported: {SUPPORTED_ORDERS}")
    m = int(round(np.log2(M)))
    if M == 2:
        # BPSK: bit 0 -> -1, bit 1 -> +1
        points = np.array([-1.0 + 0j, 1.0 + 0j])
        patterns = np.array([0, 1], dtype=np.int64)
    else:
        side = int(round(np.sqrt(M)))
        half = m // 2
        levels = 2.0 * np.arange(side) - (side - 1)
        # level index b carries Gray label gray_encode(b)
        axis_gray = _gray_encode(np.arange(side, dtype=np.int64))
        re_idx, im_idx = np.meshgrid(np.arange(side), np.arange(side),
                                     indexing="ij")
        re_idx = re_idx.ravel()
        im_idx = im_idx.ravel()
        points = levels[re_idx] + 1j * levels[im_idx]
        patterns = (axis_gray[re_idx] << half) | axis_gray[im_idx]
    # sum of squared integer coordinates stays exact; abs() would round
    # through the square root and land 1 ulp off the closed form
    energy = float(np.mean(points.real ** 2 + points.imag ** 2))
    inv = np.empty(M, dtype=np.int64)
    inv[patterns] = np.arange(M)
    return Constellation(order=M, bits_per_symbol=m, points=points,
                         bit_patterns=patterns, avg_energy=energy,
                         _pattern_to_index=inv)


def map_bits(c: Constellation, bits: np.ndarray) -> np.ndarray:
    """Map a bit sequence to symbols, bits_per_symbol at a time."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size % c.bits_per_symbol != 0:
        raise InputError(f"bit count {bits.size} not divisible by "
                         f"{c.bits_per_symbol}")
    groups = bits.reshape(-1, c.bits_per_symbol)
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1, dtype=np.int64)
    patterns = groups @ weights
    return c.points[c._pattern_to_index[patterns]]


def slice_symbols(c: Constellation, y: np.ndarray) -> np.ndarray:
    """Quantize each component to the nearest constellation point.

    Per-axis rounding to the nearest odd integer, then clamping to
    +-(sqrt(M)-1); equivalent to nearest-point search for square QAM.
    """
    y = np.asarray(y, dtype=np.complex128)
    if not np.all(np.isfinite(y.real)) or not np.all(np.isfinite(y.imag)):
        raise InputError("non-finite component in slicer input")
    if c.order == 2:
        re = np.where(y.real >= 0, 1.0, -1.0)
        return re.astype(np.complex128)
    side = int(round(np.sqrt(c.order)))
    top = side - 1
    re = 2.0 * np.floor(y.real / 2.0) + 1.0
    im = 2.0 * np.floor(y.imag / 2.0) + 1.0
    re = np.clip(re, -top, top)
    im = np.clip(im, -top, top)
    return re + 1j * im


def symbol_indices(c: Constellation, s: np.ndarray) -> np.ndarray:
    """Indices into c.points for exact constellation symbols."""
    s = np.asarray(s, dtype=np.complex128)
    if c.order == 2:
        idx = (s.real > 0).astype(np.int64)
    else:
        side = int(round(np.sqrt(c.order)))
        top = side - 1
        re_idx = ((s.real + top) / 2.0).round().astype(np.int64)
        im_idx = ((s.imag + top) / 2.0).round().astype(np.int64)
        if (re_idx < 0).any() or (re_idx >= side).any() or \
           (im_idx < 0).any() or (im_idx >= side).any():
            raise InputError("symbol not on the constellation grid")
        idx = re_idx * side + im_idx
    if not np.array_equal(c.points[idx], s):
        raise InputError("symbol not on the constellation grid")
    return idx


def demap_symbols(c: Constellation, s: np.ndarray) -> np.ndarray:
    """Inverse of map_bits for exact constellation symbols."""
    idx = symbol_indices(c, s)
    patterns = c.bit_patterns[idx]
    shifts = np.arange(c.bits_per_symbol - 1, -1, -1, dtype=np.int64)
    return ((patterns[:, None] >> shifts) & 1).ravel()
