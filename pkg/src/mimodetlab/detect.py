"""Hard-decision MIMO detectors.

Kinds: ml, sd, zf, mmse, zf-sic, mmse-sic, zf-osic, mmse-osic, lr-zf,
lr-mmse, lr-zf-osic, lr-mmse-osic. Every detector returns the sliced
symbol vector plus accounting (flop model value, SD node count).

MMSE flavors work on the extended system [H; sigma_n*I], [x; 0] and
reuse the ZF machinery. LR flavors reduce the (extended) basis with
clll, equalize in the reduced domain, quantize with the shifted/scaled
rounding rule, map back through T and slice.
"""

from dataclasses import dataclass

import numpy as np

from . import complexity, lattice
from .constellation import Constellation, slice_symbols
from .errors import ConfigurationError, DetectionError, InputError
from .kernels import sphere_search

ML_GUARD = 2 ** 24
_ML_CHUNK = 1 << 14

DETECTOR_KINDS = complexity.ALL_KINDS


@dataclass(frozen=True)
class DetectionResult:
    s_hat: np.ndarray
    flops_model: float
    sd_nodes: int = 0


def detect(kind: str, x: np.ndarray, H: np.ndarray, c: Constellation,
           sigma2: float | None = None,
           flop_rho: float | None = None) -> DetectionResult:
    """Dispatch to the detector for kind; see module docstring."""
    if kind not in DETECTOR_KINDS:
        raise ConfigurationError(f"unknown detector kind {kind!r}")
    if kind in ("ml", "sd"):
        res = detect_ml(x, H, c) if kind == "ml" else detect_sd(x, H, c)
    elif kind in ("zf", "mmse"):
        res = detect_linear(kind, x, H, sigma2, c)
    elif kind in ("zf-sic", "mmse-sic", "zf-osic", "mmse-osic"):
        base = kind.split("-")[0]
        res = detect_sic(base, kind.endswith("osic"), x, H, sigma2, c)
    else:
        base = kind.split("-")[1]
        res = detect_lr(base, kind.endswith("osic"), x, H, sigma2, c)
    flops = complexity.flops_or_nan(kind, n=H.shape[1], M=c.order,
                                    rho=flop_rho)
    return DetectionResult(s_hat=res.s_hat, flops_model=flops,
                           sd_nodes=res.sd_nodes)


def _check_inputs(x: np.ndarray, H: np.ndarray):
    if H.ndim != 2 or x.shape != (H.shape[0],):
        raise InputError(f"shape mismatch: x {x.shape}, H {H.shape}")
    if not (np.all(np.isfinite(H.real)) and np.all(np.isfinite(H.imag))
            and np.all(np.isfinite(x.real)) and np.all(np.isfinite(x.imag))):
        raise InputError("non-finite entries in detector input")


def detect_ml(x: np.ndarray, H: np.ndarray, c: Constellation) -> DetectionResult:
    """Exhaustive minimum-distance search; first minimum in lexicographic
    candidate order wins ties."""
    x = np.asarray(x, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    _check_inputs(x, H)
    n = H.shape[1]
    M = c.order
    total = M ** n
    if total > ML_GUARD:
        raise ConfigurationError(
            f"ML search space M^n_T = {M}^{n} exceeds the guard {ML_GUARD}")
    weights = M ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_val = np.inf
    best_global = 0
    for start in range(0, total, _ML_CHUNK):
        stop = min(start + _ML_CHUNK, total)
        g = np.arange(start, stop, dtype=np.int64)
        idx = (g[:, None] // weights[None, :]) % M
        S = c.points[idx]
        resid = x[None, :] - S @ H.T
        d = np.einsum("ij,ij->i", resid.real, resid.real) \
            + np.einsum("ij,ij->i", resid.imag, resid.imag)
        j = int(np.argmin(d))
        if d[j] < best_val:
            best_val = float(d[j])
            best_global = start + j
    idx = (best_global // weights) % M
    return DetectionResult(s_hat=c.points[idx], flops_model=float("nan"))


def detect_sd(x: np.ndarray, H: np.ndarray, c: Constellation) -> DetectionResult:
    """Sphere decoder; exact ML decisions via depth-first tree search."""
    x = np.asarray(x, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    _check_inputs(x, H)
    f = lattice.qr(H)
    y = np.ascontiguousarray(f.q.conj().T @ x)
    r = np.ascontiguousarray(f.r)
    if c.order == 2:
        re_levels = np.array([-1.0, 1.0])
        im_levels = np.array([0.0])
    else:
        re_levels = c.levels
        im_levels = c.levels
    idx, nodes = sphere_search(r, y, re_levels, im_levels)
    return DetectionResult(s_hat=c.points[idx], flops_model=float("nan"),
                           sd_nodes=int(nodes))


def _extend(H: np.ndarray, x: np.ndarray, sigma2: float, es: float):
    """Extended system whose LS solution is the MMSE estimate.

    The regularization block is scaled by the average symbol energy so
    the filter stays unbiased-in-the-limit for unnormalized QAM grids;
    for a unit-energy alphabet it is plain sigma*I.
    """
    if sigma2 is None or sigma2 <= 0:
        raise ConfigurationError("mmse detection requires sigma2 > 0")
    n = H.shape[1]
    reg = np.sqrt(sigma2 / es)
    He = np.vstack([H, reg * np.eye(n, dtype=np.complex128)])
    xe = np.concatenate([x, np.zeros(n, dtype=np.complex128)])
    return He, xe


def _zf_solve(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    G = A.conj().T @ A
    try:
        return np.linalg.solve(G, A.conj().T @ v)
    except np.linalg.LinAlgError as exc:
        raise DetectionError("singular normal equations") from exc


def detect_linear(kind: str, x: np.ndarray, H: np.ndarray,
                  sigma2: float | None, c: Constellation) -> DetectionResult:
    """ZF (pseudo-inverse) or MMSE (extended-system ZF) with slicing."""
    x = np.asarray(x, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    _check_inputs(x, H)
    if kind == "zf":
        z = _zf_solve(H, x)
    elif kind == "mmse":
        He, xe = _extend(H, x, sigma2, c.avg_energy)
        z = _zf_solve(He, xe)
    else:
        raise ConfigurationError(f"unknown linear kind {kind!r}")
    return DetectionResult(s_hat=slice_symbols(c, z),
                           flops_model=float("nan"))


def detect_sic(kind: str, ordered: bool, x: np.ndarray, H: np.ndarray,
               sigma2: float | None, c: Constellation) -> DetectionResult:
    """Successive interference cancellation on (sorted) QR factors.

    Back-substitution layer by layer, slicing each symbol before it is
    cancelled; the ordered variant factors with sorted_qr and restores
    transmit order at the end.
    """
    x = np.asarray(x, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    _check_inputs(x, H)
    if kind == "zf":
        A, v = H, x
    elif kind == "mmse":
        A, v = _extend(H, x, sigma2, c.avg_energy)
    else:
        raise ConfigurationError(f"unknown sic kind {kind!r}")
    f = lattice.sorted_qr(A) if ordered else lattice.qr(A)
    y = f.q.conj().T @ v
    n = f.r.shape[0]
    s_sorted = np.zeros(n, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        w = (y[i] - f.r[i, i + 1:] @ s_sorted[i + 1:]) / f.r[i, i]
        s_sorted[i] = slice_symbols(c, np.array([w]))[0]
    s_hat = np.empty(n, dtype=np.complex128)
    s_hat[f.perm] = s_sorted
    return DetectionResult(s_hat=s_hat, flops_model=float("nan"))


def _lr_shift(t: np.ndarray, c: Constellation) -> np.ndarray:
    """beta' * T^{-1} 1: the lattice shift of the reduced domain.

    T is unimodular over the Gaussian integers, so the shift has exact
    Gaussian-integer coordinates scaled by beta'.
    """
    n = t.shape[0]
    beta = 1.0 + 1.0j if c.order != 2 else 1.0 + 0.0j
    try:
        v = np.linalg.solve(t, np.ones(n, dtype=np.complex128))
    except np.linalg.LinAlgError as exc:
        raise DetectionError("singular reduction transform") from exc
    vr = lattice.round_gaussian_vector(v)
    if np.abs(v - vr).max() > 1e-6:
        raise DetectionError("reduction transform is not unimodular over "
                             "the Gaussian integers")
    return beta * vr


def _lr_round(w: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Reduced-domain quantizer: scale-2 rounding about the shift."""
    return 2.0 * lattice.round_gaussian_vector((w - shift) / 2.0) + shift


def lr_quantize(z_tilde: np.ndarray, t: np.ndarray,
                c: Constellation) -> np.ndarray:
    """Quantize reduced-domain estimates onto the shifted/scaled lattice."""
    z_tilde = np.asarray(z_tilde, dtype=np.complex128)
    return _lr_round(z_tilde, _lr_shift(t, c))


def detect_lr(kind: str, ordered: bool, x: np.ndarray, H: np.ndarray,
              sigma2: float | None, c: Constellation) -> DetectionResult:
    """Lattice-reduction-aided linear or OSIC detection.

    ZF flavor reduces H; MMSE flavor reduces the extended matrix. The
    ordered variant runs SIC on the sorted factors of the reduced basis
    with the per-layer reduced-domain quantizer.
    """
    x = np.asarray(x, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    _check_inputs(x, H)
    if kind == "zf":
        A, v = H, x
    elif kind == "mmse":
        A, v = _extend(H, x, sigma2, c.avg_energy)
    else:
        raise ConfigurationError(f"unknown lr kind {kind!r}")
    lf = lattice.clll(A)
    shift = _lr_shift(lf.t, c)
    if not ordered:
        # z = R^-1 Q^H v on the reduced factors, then quantize
        w = np.linalg.solve(lf.r, lf.q.conj().T @ v)
        z_hat = _lr_round(w, shift)
    else:
        reduced = A @ lf.t
        f = lattice.sorted_qr(reduced)
        y = f.q.conj().T @ v
        n = f.r.shape[0]
        z_sorted = np.zeros(n, dtype=np.complex128)
        shift_sorted = shift[f.perm]
        for i in range(n - 1, -1, -1):
            w = (y[i] - f.r[i, i + 1:] @ z_sorted[i + 1:]) / f.r[i, i]
            z_sorted[i] = _lr_round(np.array([w]), shift_sorted[i:i + 1])[0]
        z_hat = np.empty(n, dtype=np.complex128)
        z_hat[f.perm] = z_sorted
    s_hat = slice_symbols(c, lf.t @ z_hat)
    return DetectionResult(s_hat=s_hat, flops_model=float("nan"))
