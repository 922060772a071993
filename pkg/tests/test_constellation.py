"""Constellation construction, Gray labeling, slicing, bit round trips."""

import numpy as np
import pytest

from mimodetlab.constellation import (
    SUPPORTED_ORDERS,
    build_constellation,
    demap_symbols,
    map_bits,
    slice_symbols,
    symbol_indices,
)
from mimodetlab.errors import ConfigurationError, InputError

SEED = 20260815
ENERGY_REL_TOL = 0.01


@pytest.mark.parametrize("order,es", [(2, 1.0), (4, 2.0), (16, 10.0),
                                      (64, 42.0), (256, 170.0)])
def test_average_energy_exact(order, es):
    c = build_constellation(order)
    assert c.avg_energy == es
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(es, rel=1e-12)


@pytest.mark.parametrize("order", SUPPORTED_ORDERS)
def test_points_distinct_on_odd_grid(order):
    c = build_constellation(order)
    assert len(c.points) == order
    assert len(set(c.points.tolist())) == order
    if order == 2:
        assert set(c.points.tolist()) == {-1.0 + 0j, 1.0 + 0j}
        return
    side = int(round(np.sqrt(order)))
    levels = set(range(-(side - 1), side, 2))
    assert set(c.points.real.astype(int).tolist()) <= levels
    assert set(c.points.imag.astype(int).tolist()) <= levels


def test_bpsk_layout():
    c = build_constellation(2)
    assert c.bits_per_symbol == 1
    assert c.points[0] == -1.0 and c.points[1] == 1.0


@pytest.mark.parametrize("order", [4, 16, 64, 256])
def test_gray_adjacency_exhaustive(order):
    # any two points one axis step apart must differ in exactly one bit
    c = build_constellation(order)
    pts = c.points
    pat = c.bit_patterns
    checked = 0
    for i in range(order):
        for j in range(i + 1, order):
            d = pts[i] - pts[j]
            if abs(d) == 2.0 and (d.real == 0.0 or d.imag == 0.0):
                diff = int(pat[i]) ^ int(pat[j])
                assert diff and (diff & (diff - 1)) == 0, (
                    f"M={order}: neighbors {pts[i]}, {pts[j]} differ in "
                    f"more than one bit")
                checked += 1
    assert checked > 0


def test_map_bits_qpsk_zero_pattern():
    c = build_constellation(4)
    s = map_bits(c, np.array([0, 0], dtype=np.uint8))
    assert s[0] == -1.0 - 1.0j


def test_map_bits_all_patterns_distinct():
    c = build_constellation(16)
    bits = ((np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1).ravel()
    s = map_bits(c, bits.astype(np.uint8))
    assert len(set(s.tolist())) == 16


@pytest.mark.parametrize("order", [2, 4, 16, 64, 256])
def test_bit_roundtrip(order):
    rng = np.random.default_rng(SEED)
    c = build_constellation(order)
    bits = rng.integers(0, 2, size=10_000 * c.bits_per_symbol
                        // c.bits_per_symbol * c.bits_per_symbol,
                        dtype=np.uint8)
    back = demap_symbols(c, map_bits(c, bits))
    assert np.array_equal(back, bits)


def test_map_bits_length_mismatch():
    c = build_constellation(16)
    with pytest.raises(InputError):
        map_bits(c, np.array([0, 1, 0], dtype=np.uint8))


def test_slice_nearest_point():
    c4 = build_constellation(4)
    assert slice_symbols(c4, np.array([0.2 + 0.3j]))[0] == 1.0 + 1.0j
    c16 = build_constellation(16)
    assert slice_symbols(c16, np.array([5.7 - 9.0j]))[0] == 3.0 - 3.0j


@pytest.mark.parametrize("order", SUPPORTED_ORDERS)
def test_slice_idempotent_on_points(order):
    c = build_constellation(order)
    assert np.array_equal(slice_symbols(c, c.points), c.points)


def test_slice_rejects_non_finite():
    c = build_constellation(4)
    with pytest.raises(InputError):
        slice_symbols(c, np.array([1.0 + np.nan * 1j]))
    with pytest.raises(InputError):
        slice_symbols(c, np.array([np.inf + 0j]))


def test_slice_matches_exhaustive_nearest():
    # per-axis rounding must agree with the brute-force nearest point
    rng = np.random.default_rng(SEED)
    for order in (4, 16, 64):
        c = build_constellation(order)
        y = rng.uniform(-12, 12, 300) + 1j * rng.uniform(-12, 12, 300)
        got = slice_symbols(c, y)
        dists = np.abs(y[:, None] - c.points[None, :])
        want = c.points[np.argmin(dists, axis=1)]
        # ties (exactly halfway) can differ; exclude them
        d_sorted = np.sort(dists, axis=1)
        clear = d_sorted[:, 1] - d_sorted[:, 0] > 1e-9
        assert np.array_equal(got[clear], want[clear])


def test_symbol_indices_roundtrip():
    for order in SUPPORTED_ORDERS:
        c = build_constellation(order)
        assert np.array_equal(symbol_indices(c, c.points), np.arange(order))
    c = build_constellation(16)
    with pytest.raises(InputError):
        symbol_indices(c, np.array([0.5 + 0.5j]))


def test_empirical_energy():
    rng = np.random.default_rng(SEED)
    for order in (4, 64):
        c = build_constellation(order)
        s = c.points[rng.integers(0, order, 1_000_000)]
        emp = np.mean(np.abs(s) ** 2)
        assert abs(emp - c.avg_energy) < ENERGY_REL_TOL * c.avg_energy


def test_unsupported_order_named_in_error():
    with pytest.raises(ConfigurationError, match="32"):
        build_constellation(32)
    with pytest.raises(ConfigurationError):
        build_constellation(0)


def test_noise_free_chain_identity():
    rng = np.random.default_rng(SEED + 1)
    for order in (4, 16, 64):
        c = build_constellation(order)
        bits = rng.integers(0, 2, 6 * c.bits_per_symbol, dtype=np.uint8)
        s = map_bits(c, bits)
        assert np.array_equal(demap_symbols(c, slice_symbols(c, s)), bits)
