"""Monte Carlo bit error rate engine.

A run is a grid of (detector, Eb/N0) points. Every point is simulated
with its own deterministic counter-based random stream, so results do
not depend on the number of worker processes or on which other points
share the run.

Per-trial draw order is fixed and part of the reproducibility contract:
payload bits, then channel matrix, then noise vector.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import (
    CorrelationMatrix,
    GeometryParams,
    correlate,
    draw_iid,
    draw_noise,
    exp_corr_ula,
    geo_corr_ula,
    geo_corr_upa,
    upa_corr_kronecker,
)
from .complexity import ALL_KINDS
from .constellation import build_constellation, demap_symbols, map_bits
from .detect import detect
from .errors import ConfigurationError, DetectionError, MimoDetLabError

CORR_MODELS = ("none", "kronecker", "geometric")
ARRAY_KINDS = ("ula", "upa")

#: a point aborts if more than this fraction of trials failed to detect
FAILURE_RATE_LIMIT = 1e-3


def most_square_factors(n: int) -> tuple[int, int]:
    """Factor n as (a, b) with a*b = n, a <= b and b - a minimal."""
    if n < 1:
        raise ConfigurationError(f"cannot factor non-positive count {n}")
    a = int(math.isqrt(n))
    while n % a:
        a -= 1
    return a, n // a


@dataclass(frozen=True)
class SimConfig:
    """Fully resolved description of one simulation run."""

    detectors: tuple[str, ...]
    mod_order: int
    n_t: int
    n_r: int
    ebn0_db: tuple[float, ...]
    corr_model: str = "none"
    rho: float = 0.0
    array_kind: str = "ula"
    # antenna grid used to build per-side correlation for UPA layouts;
    # None means the most-square factorization of the antenna count
    upa_shape: tuple[int, int] | None = None
    geometry: GeometryParams | None = None
    min_errors: int = 400
    max_trials: int = 10_000_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.detectors:
            raise ConfigurationError("need at least one detector")
        for kind in self.detectors:
            if kind not in ALL_KINDS:
                raise ConfigurationError(f"unknown detector kind {kind!r}")
        if len(set(self.detectors)) != len(self.detectors):
            raise ConfigurationError("duplicate detector in list")
        if self.n_t < 1 or self.n_r < self.n_t:
            raise ConfigurationError(
                f"need n_r >= n_t >= 1, got n_r={self.n_r} n_t={self.n_t}"
            )
        if not self.ebn0_db:
            raise ConfigurationError("empty Eb/N0 grid")
        diffs = np.diff(np.asarray(self.ebn0_db, dtype=float))
        if len(diffs) and not (diffs > 0).all():
            raise ConfigurationError("Eb/N0 grid must be strictly increasing")
        if self.corr_model not in CORR_MODELS:
            raise ConfigurationError(f"unknown correlation model {self.corr_model!r}")
        if self.array_kind not in ARRAY_KINDS:
            raise ConfigurationError(f"unknown array kind {self.array_kind!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigurationError(f"rho must lie in [0, 1), got {self.rho}")
        if self.corr_model == "geometric" and self.geometry is None:
            raise ConfigurationError("geometric correlation needs geometry parameters")
        if self.upa_shape is not None:
            nx, ny = self.upa_shape
            if nx < 1 or ny < 1:
                raise ConfigurationError(f"bad UPA shape {self.upa_shape}")
            if nx * ny != self.n_t:
                raise ConfigurationError(
                    f"UPA shape {nx}x{ny} does not cover n_t={self.n_t}"
                )
        if self.min_errors < 1:
            raise ConfigurationError("min_errors must be positive")
        if self.min_errors < 100:
            warnings.warn(
                f"min_errors={self.min_errors} gives poor BER confidence",
                stacklevel=2,
            )
        if self.max_trials < 1:
            raise ConfigurationError("max_trials must be positive")
        if self.workers < 1:
            raise ConfigurationError("workers must be positive")

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.mod_order)))


@dataclass(frozen=True)
class BerPoint:
    """Result of one (detector, Eb/N0) Monte Carlo point."""

    detector: str
    ebn0_db: float
    trials: int
    bits_simulated: int
    bit_errors: int
    ber: float
    mean_flops: float
    mean_sd_nodes: float
    failures: int = 0


def ebn0_to_sigma2(ebn0_db: float, mod_order: int, avg_energy: float,
                   n_t: int = 1) -> float:
    """Noise variance per receive antenna for a given Eb/N0.

    The symbol SNR is Eb/N0 scaled by the bits carried per symbol.
    n_t documents the power convention: total transmit energy per
    channel use is held at avg_energy by scaling the channel 1/sqrt(n_t)
    (done by the caller), so sigma2 itself does not depend on n_t.
    """
    if n_t < 1:
        raise ConfigurationError(f"n_t must be >= 1, got {n_t}")
    bits = math.log2(mod_order)
    snr = 10.0 ** (ebn0_db / 10.0) * bits
    return avg_energy / snr


def _upa_grid(count: int, shape: tuple[int, int] | None) -> tuple[int, int]:
    if shape is not None and shape[0] * shape[1] == count:
        return shape
    return most_square_factors(count)


def build_correlations(
    cfg: SimConfig,
) -> tuple[CorrelationMatrix | None, CorrelationMatrix | None]:
    """Receive/transmit correlation pair implied by the config.

    Returns (None, None) when the channel is left uncorrelated.
    """
    if cfg.corr_model == "none":
        return None, None
    if cfg.corr_model == "kronecker":
        if cfg.rho == 0.0:
            return None, None
        if cfg.array_kind == "ula":
            return exp_corr_ula(cfg.n_r, cfg.rho), exp_corr_ula(cfg.n_t, cfg.rho)
        tx, ty = _upa_grid(cfg.n_t, cfg.upa_shape)
        rx, ry = _upa_grid(cfg.n_r, cfg.upa_shape if cfg.n_r == cfg.n_t else None)
        return (
            upa_corr_kronecker(rx, ry, cfg.rho),
            upa_corr_kronecker(tx, ty, cfg.rho),
        )
    # geometric
    g = cfg.geometry
    assert g is not None
    if cfg.array_kind == "ula":
        return geo_corr_ula(cfg.n_r, g), geo_corr_ula(cfg.n_t, g)
    nv, nh = _upa_grid(cfg.n_t, cfg.upa_shape)
    if cfg.n_r != cfg.n_t:
        raise ConfigurationError(
            "geometric UPA correlation needs n_r == n_t "
            f"(got {cfg.n_r} and {cfg.n_t})"
        )
    if (g.n_v, g.n_h) != (nv, nh):
        g = replace(g, n_v=nv, n_h=nh)
    # the default flat-index map is not a bijection off the square case
    r = geo_corr_upa(g, index_map="nv" if nv == nh else "nh")
    return r, r


def _flop_rho(cfg: SimConfig) -> float | None:
    """Correlation argument for the lattice reduction cost model.

    The fitted reduction cost is parameterized by the exponential
    correlation coefficient, so it only applies to the Kronecker model
    (with the uncorrelated case as rho = 0).
    """
    if cfg.corr_model == "none":
        return 0.0
    if cfg.corr_model == "kronecker":
        return cfg.rho
    return None


def trial_rng(seed: int, kind: str, ebn0_db: float, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial of one point.

    The Philox key is derived from (seed, detector, Eb/N0) so points
    never share a stream, and the trial index selects a disjoint
    counter block, so any worker can generate any trial independently.
    """
    tag = f"{seed}|{kind}|{ebn0_db:.6f}".encode()
    key = int.from_bytes(hashlib.sha256(tag).digest()[:16], "little")
    bg = np.random.Philox(key=key, counter=trial << 128)
    return np.random.Generator(bg)


def run_point(cfg: SimConfig, kind: str, ebn0_db: float) -> BerPoint:
    """Simulate one detector at one Eb/N0 until enough errors are seen.

    Stops at cfg.min_errors accumulated bit errors or cfg.max_trials
    channel uses, whichever comes first. Trials where the detector
    raises are counted as erasures with every bit wrong; the point
    aborts if those exceed FAILURE_RATE_LIMIT of all trials.
    """
    c = build_constellation(cfg.mod_order)
    sigma2 = ebn0_to_sigma2(ebn0_db, cfg.mod_order, c.avg_energy, cfg.n_t)
    r_rx, r_tx = build_correlations(cfg)
    flop_rho = _flop_rho(cfg)
    scale = 1.0 / math.sqrt(cfg.n_t)
    bits_per_trial = cfg.n_t * c.bits_per_symbol

    trials = 0
    bits = 0
    errors = 0
    failures = 0
    flop_sum = 0.0
    node_sum = 0

    while errors < cfg.min_errors and trials < cfg.max_trials:
        rng = trial_rng(cfg.seed, kind, ebn0_db, trials)
        trials += 1
        bits += bits_per_trial
        tx_bits = rng.integers(0, 2, size=bits_per_trial, dtype=np.uint8)
        s = map_bits(c, tx_bits)
        chan = draw_iid(cfg.n_r, cfg.n_t, rng)
        if r_rx is not None:
            chan = correlate(chan, r_rx, r_tx)
        g = scale * chan.H
        noise = draw_noise(cfg.n_r, sigma2, rng)
        x = g @ s + noise
        try:
            res = detect(kind, x, g, c, sigma2=sigma2, flop_rho=flop_rho)
        except MimoDetLabError:
            failures += 1
            errors += bits_per_trial
            continue
        rx_bits = demap_symbols(c, res.s_hat)
        errors += int(np.count_nonzero(rx_bits != tx_bits))
        flop_sum += res.flops_model
        node_sum += res.sd_nodes

    if failures > FAILURE_RATE_LIMIT * trials:
        raise DetectionError(
            f"{kind} at {ebn0_db} dB: {failures}/{trials} trials failed"
        )

    ok = trials - failures
    return BerPoint(
        detector=kind,
        ebn0_db=float(ebn0_db),
        trials=trials,
        bits_simulated=bits,
        bit_errors=errors,
        ber=errors / bits,
        mean_flops=flop_sum / ok if ok else float("nan"),
        mean_sd_nodes=node_sum / ok if ok else float("nan"),
        failures=failures,
    )


def _run_point_task(args: tuple[SimConfig, str, float]) -> BerPoint:
    return run_point(*args)


def run_sweep(cfg: SimConfig) -> list[BerPoint]:
    """Run the full (detector x Eb/N0) grid.

    Output order is detectors outer, grid inner, independent of worker
    count; with workers > 1 the points are farmed out to processes.
    """
    tasks = [(cfg, kind, e) for kind in cfg.detectors for e in cfg.ebn0_db]
    if cfg.workers == 1 or len(tasks) == 1:
        return [_run_point_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_run_point_task, tasks))
