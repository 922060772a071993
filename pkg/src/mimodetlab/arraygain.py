"""Normalized ULA/UPA array factors, UV projection, and gain cuts.

Amplitude convention: AF is normalized to 1 at broadside and reported in
dB as 20*log10(|AF|) with a floor at -100 dB. Spacings are in wavelengths.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError

GAIN_FLOOR_DB = -100.0
_SING_TOL = 1e-8


@dataclass(frozen=True)
class ArraySpec:
    kind: str                 # "ula" or "upa"
    n_x: int                  # element count (ULA) or x-axis count (UPA)
    n_y: int = 1              # y-axis count (UPA only)
    d_x: float = 0.5          # spacing in wavelengths
    d_y: float = 0.5

    def __post_init__(self):
        if self.kind not in ("ula", "upa"):
            raise ConfigurationError(f"unknown array kind {self.kind!r}")
        if self.n_x < 1 or self.n_y < 1:
            raise ConfigurationError("element counts must be >= 1")
        if self.d_x <= 0 or self.d_y <= 0:
            raise ConfigurationError("spacings must be > 0")


def _axis_factor(n: int, psi) -> np.ndarray:
    """|sin(n*psi/2) / (n*sin(psi/2))| with the removable singularity -> 1."""
    psi = np.asarray(psi, dtype=float)
    # wrap to (-pi, pi]; the singularity repeats at every multiple of 2*pi
    wrapped = np.remainder(psi + np.pi, 2.0 * np.pi) - np.pi
    singular = np.abs(wrapped) < _SING_TOL
    safe = np.where(singular, 1.0, psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.abs(np.sin(n * safe / 2.0) / (n * np.sin(safe / 2.0)))
    return np.where(singular, 1.0, val)


def af_ula(spec: ArraySpec, theta, phi) -> np.ndarray:
    """Normalized ULA array factor |AF| at elevation theta, azimuth phi."""
    if spec.kind != "ula":
        raise ConfigurationError("af_ula requires a ULA spec")
    psi = 2.0 * np.pi * spec.d_x * np.sin(theta) * np.cos(phi)
    return _axis_factor(spec.n_x, psi)


def af_upa(spec: ArraySpec, theta, phi) -> np.ndarray:
    """Normalized UPA array factor: product of the two axis factors."""
    if spec.kind != "upa":
        raise ConfigurationError("af_upa requires a UPA spec")
    psi_x = 2.0 * np.pi * spec.d_x * np.sin(theta) * np.cos(phi)
    psi_y = 2.0 * np.pi * spec.d_y * np.sin(theta) * np.sin(phi)
    return _axis_factor(spec.n_x, psi_x) * _axis_factor(spec.n_y, psi_y)


def array_factor(spec: ArraySpec, theta, phi) -> np.ndarray:
    return af_ula(spec, theta, phi) if spec.kind == "ula" \
        else af_upa(spec, theta, phi)


def uv_project(theta, phi):
    """Direction cosines u = sin(theta)cos(phi), v = sin(theta)sin(phi)."""
    st = np.sin(theta)
    return st * np.cos(phi), st * np.sin(phi)


def gain_cut(spec: ArraySpec, phi: float, u_samples) -> np.ndarray:
    """Gain cut over u = sin(theta) at fixed azimuth phi.

    Returns an array of rows (u, theta_deg, gain_db).
    """
    u = np.asarray(u_samples, dtype=float)
    if np.any(np.abs(u) > 1.0):
        raise InputError("u samples must lie in [-1, 1]")
    theta = np.arcsin(u)
    af = array_factor(spec, theta, phi)
    with np.errstate(divide="ignore"):
        gain_db = 20.0 * np.log10(af)
    gain_db = np.maximum(gain_db, GAIN_FLOOR_DB)
    return np.column_stack([u, np.degrees(theta), gain_db])
