"""Rayleigh MIMO channels with ULA/UPA spatial correlation.

Correlation constructions: exponential Kronecker (entries rho^((i-j)^2)),
UPA Kronecker product of two exponential factors, and the geometrical
3D model (full and separable forms). Square roots are Hermitian
eigendecomposition factors with a small-negative-eigenvalue clamp.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError

# relative clamp threshold for eigenvalues of a correlation matrix
PSD_CLAMP_REL = 1e-9


@dataclass(frozen=True)
class CorrelationMatrix:
    """Hermitian PSD matrix with unit diagonal plus cached sqrt factor."""

    matrix: np.ndarray
    _sqrt: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        R = self.matrix
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ConfigurationError("correlation matrix must be square")
        if np.abs(R - R.conj().T).max() > 1e-12:
            raise ConfigurationError("correlation matrix not Hermitian")
        if np.abs(np.diagonal(R) - 1.0).max() > 1e-12:
            raise ConfigurationError("correlation matrix diagonal must be 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def sqrt_factor(self) -> np.ndarray:
        if not self._sqrt:
            self._sqrt.append(matrix_sqrt(self.matrix))
        return self._sqrt[0]


def matrix_sqrt(R: np.ndarray) -> np.ndarray:
    """Hermitian square root S with S @ S^H = R.

    Eigenvalues below -PSD_CLAMP_REL relative to the largest are an
    error; small negatives inside the tolerance are clamped to zero.
    """
    R = np.asarray(R)
    w, V = np.linalg.eigh(R)
    scale = max(w.max(), 0.0)
    if w.min() < -PSD_CLAMP_REL * max(scale, 1.0):
        raise NumericError(f"matrix not positive semidefinite: most "
                           f"negative eigenvalue {w.min():.3e}")
    w = np.maximum(w, 0.0)
    return (V * np.sqrt(w)) @ V.conj().T


@dataclass(frozen=True)
class GeometryParams:
    """Geometry of the physical array for the geometrical correlation model.

    Spacings are in wavelengths (d over lambda is all that enters).
    theta: elevation AoD; phi: azimuth AoD; xi / sigma: standard
    deviations of the vertical / horizontal AoD.
    """

    d1: float = 0.5
    d2: float = 0.5
    theta: float = 0.0
    phi: float = 0.0
    xi: float = 0.0
    sigma: float = 0.0
    n_v: int = 1
    n_h: int = 1

    def __post_init__(self):
        if self.d1 <= 0 or self.d2 <= 0:
            raise ConfigurationError("element spacings must be > 0")
        for name in ("theta", "phi", "xi", "sigma"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigurationError(f"geometry angle {name} not finite")
        if self.xi < 0 or self.sigma < 0:
            raise ConfigurationError("angle spreads must be >= 0")
        if self.n_v < 1 or self.n_h < 1:
            raise ConfigurationError("element counts must be >= 1")


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray
    model: str = "iid"


def draw_iid(n_r: int, n_t: int, rng: np.random.Generator) -> ChannelRealization:
    """i.i.d. Rayleigh matrix: entries (a+jb)/sqrt(2), E|h|^2 = 1."""
    if n_r < n_t:
        raise ConfigurationError(f"overdetermined system required: "
                                 f"n_r={n_r} < n_t={n_t}")
    if n_t < 1:
        raise ConfigurationError("n_t must be >= 1")
    raw = rng.standard_normal((n_r, n_t, 2))
    H = (raw[..., 0] + 1j * raw[..., 1]) / np.sqrt(2.0)
    return ChannelRealization(H=H)


def draw_noise(n_r: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian vector, per-entry variance sigma2."""
    if sigma2 <= 0:
        raise ConfigurationError(f"sigma2 must be > 0, got {sigma2}")
    raw = rng.standard_normal((n_r, 2))
    return np.sqrt(sigma2 / 2.0) * (raw[:, 0] + 1j * raw[:, 1])


def exp_corr_ula(n: int, rho: float) -> CorrelationMatrix:
    """Exponential ULA correlation, entries rho^((i-j)^2)."""
    _check_rho(rho)
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    i = np.arange(n)
    expo = (i[:, None] - i[None, :]) ** 2
    R = np.power(float(rho), expo).astype(np.complex128) if rho > 0 \
        else np.eye(n, dtype=np.complex128)
    return CorrelationMatrix(matrix=R)


def upa_corr_kronecker(n_x: int, n_y: int, rho: float) -> CorrelationMatrix:
    """UPA correlation as Kronecker product of two ULA factors."""
    Rx = exp_corr_ula(n_x, rho).matrix
    Ry = exp_corr_ula(n_y, rho).matrix
    return CorrelationMatrix(matrix=np.kron(Rx, Ry))


def geo_corr_ula(n: int, g: GeometryParams) -> CorrelationMatrix:
    """Geometrical ULA correlation.

    R_ij = exp(j*2*pi*d*(i-j)*sin(theta))
         * exp(-1/2 * (xi*2*pi*d)^2 * (i-j)^2 * cos(theta)^2)
    """
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    i = np.arange(n)
    delta = (i[:, None] - i[None, :]).astype(float)
    kd = 2.0 * np.pi * g.d1
    phase = np.exp(1j * kd * delta * np.sin(g.theta))
    decay = np.exp(-0.5 * (g.xi * kd) ** 2 * delta ** 2
                   * np.cos(g.theta) ** 2)
    return CorrelationMatrix(matrix=phase * decay)


def _geo_d_terms(g: GeometryParams, pa: np.ndarray, qb: np.ndarray):
    """D-terms of the full geometrical UPA model for index offsets.

    pa = p - a (vertical offset), qb = q - b (horizontal offset).
    """
    k1 = 2.0 * np.pi * g.d1
    k2 = 2.0 * np.pi * g.d2
    ssq = (np.sin(g.phi) * g.sigma) ** 2
    d1t = np.exp(1j * k1 * pa * np.cos(g.theta)) \
        * np.exp(-0.5 * (g.xi * k1) ** 2 * pa ** 2 * np.sin(g.theta) ** 2)
    d2t = k2 * qb * np.sin(g.theta)
    d3t = g.xi * k2 * qb * np.cos(g.theta)
    d4t = 0.5 * (g.xi * 2.0 * np.pi) ** 2 * g.d1 * g.d2 * pa * qb \
        * np.sin(2.0 * g.theta)
    d5t = d3t ** 2 * ssq + 1.0
    d6t = d4t * ssq + np.cos(g.phi)
    d7t = d3t ** 2 * np.cos(g.phi) ** 2 - d4t ** 2 * ssq \
        - 2.0 * d4t * np.cos(g.phi)
    return d1t, d2t, d3t, d4t, d5t, d6t, d7t, ssq


def geo_corr_upa(g: GeometryParams, separable: bool = False,
                 index_map: str = "nv") -> CorrelationMatrix:
    """Geometrical UPA correlation for an n_v x n_h array.

    Full mode evaluates the complete D-term model; separable mode drops
    the cross term (D4 = 0) and builds the Kronecker product of the
    elevation and azimuth factors. index_map selects how the (a, b)
    element maps to a flat index: "nv" uses b + n_v*(a-1), "nh" uses
    b + n_h*(a-1). The "nv" map is only a bijection for square arrays.
    """
    nv, nh = g.n_v, g.n_h
    n = nv * nh
    if index_map not in ("nv", "nh"):
        raise ConfigurationError(f"unknown index map {index_map!r}")
    if index_map == "nv" and nv != nh:
        raise ConfigurationError("index map 'nv' is not a bijection for "
                                 "non-square arrays; use 'nh'")

    if separable:
        a = np.arange(nv, dtype=float)
        pa = a[None, :] - a[:, None]
        b = np.arange(nh, dtype=float)
        qb = b[None, :] - b[:, None]
        k1 = 2.0 * np.pi * g.d1
        k2 = 2.0 * np.pi * g.d2
        ssq = (np.sin(g.phi) * g.sigma) ** 2
        r_el = np.exp(1j * k1 * pa * np.cos(g.theta)) \
            * np.exp(-0.5 * (g.xi * k1) ** 2 * pa ** 2
                     * np.sin(g.theta) ** 2)
        d2t = k2 * qb * np.sin(g.theta)
        d3t = g.xi * k2 * qb * np.cos(g.theta)
        d5t = d3t ** 2 * ssq + 1.0
        r_az = (1.0 / np.sqrt(d5t)) \
            * np.exp(-d3t ** 2 * np.cos(g.phi) ** 2 / (2.0 * d5t)) \
            * np.exp(1j * d2t * np.cos(g.phi) / d5t) \
            * np.exp(-d2t ** 2 * ssq / d5t)
        # elevation index (a) is the slow axis under both flat-index maps
        R = np.kron(r_el, r_az)
        return CorrelationMatrix(matrix=R)

    # flat index of (a, b) is b + n_h*(a-1) in 1-based terms (a slow,
    # b fast); for square arrays the "nv" map coincides with this.
    a_of = np.repeat(np.arange(nv), nh)
    b_of = np.tile(np.arange(nh), nv)
    pa = a_of[None, :].astype(float) - a_of[:, None]
    qb = b_of[None, :].astype(float) - b_of[:, None]
    d1t, d2t, d3t, d4t, d5t, d6t, d7t, ssq = _geo_d_terms(g, pa, qb)
    R = (d1t / np.sqrt(d5t)) \
        * np.exp(-(d7t + d2t ** 2 * ssq) / (2.0 * d5t)) \
        * np.exp(1j * d2t * d6t / d5t)
    # enforce exact Hermitian symmetry against rounding dust
    R = 0.5 * (R + R.conj().T)
    out = CorrelationMatrix(matrix=R)
    out.sqrt_factor  # the full model can lose PSD; validate eagerly
    return out


def correlate(H: ChannelRealization, R_rx: CorrelationMatrix,
              R_tx: CorrelationMatrix) -> ChannelRealization:
    """Impose separable correlation: H = S_rx @ H' @ S_tx."""
    n_r, n_t = H.H.shape
    if R_rx.dim != n_r or R_tx.dim != n_t:
        raise ConfigurationError(
            f"correlation dims ({R_rx.dim}, {R_tx.dim}) do not match "
            f"channel {n_r}x{n_t}")
    out = R_rx.sqrt_factor @ H.H @ R_tx.sqrt_factor
    return ChannelRealization(H=out, model="correlated")


def _check_rho(rho: float):
    if not 0.0 <= rho < 1.0:
        raise ConfigurationError(
            f"rho must be in [0, 1) (rho=1 is singular), got {rho}")
