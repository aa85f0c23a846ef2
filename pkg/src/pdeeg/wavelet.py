"""Single-level Daubechies-4 wavelet analysis/synthesis, wavelet energy,
and approximate entropy.

The 8-tap orthonormal low-pass filter is a published constant; its
defining identities (quadrature mirror, sum rules, orthonormality) are
enforced by the test suite rather than trusted blindly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LengthMismatch, SeriesTooShort

# Orthonormal db4 analysis low-pass taps (8 coefficients).
DB4_LOW = np.array(
    [
        -0.010597401784997278,
        0.032883011666982945,
        0.030841381835986965,
        -0.18703481171888114,
        -0.027983769416983849,
        0.6308807679295904,
        0.7148465705525415,
        0.23037781330885523,
    ]
)
# Quadrature mirror: g[k] = (-1)^k * h[L-1-k].
DB4_HIGH = DB4_LOW[::-1].copy()
DB4_HIGH[1::2] *= -1.0

_L = DB4_LOW.shape[0]


@dataclass(frozen=True)
class WaveletDecomposition:
    """Approximation/detail coefficients of one analysis level."""

    cA: np.ndarray
    cD: np.ndarray
    mode: str  # "symmetric" or "periodic"

    @property
    def filter_pair(self) -> tuple[np.ndarray, np.ndarray]:
        return DB4_LOW, DB4_HIGH


def coefficient_length(n: int, mode: str = "symmetric") -> int:
    if mode == "symmetric":
        return (n + _L - 1) // 2
    if mode == "periodic":
        return n // 2
    raise ConfigError(f"unknown extension mode {mode!r}")


def dwt_db4(x: np.ndarray, mode: str = "symmetric") -> WaveletDecomposition:
    """Convolve-and-downsample analysis with boundary extension.

    Symmetric extension is the default for feature work; periodic mode
    (even lengths only) conserves energy exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < _L:
        raise SeriesTooShort(f"need at least {_L} samples, got {n}")
    if mode == "symmetric":
        ext = np.pad(x, _L - 1, mode="symmetric")
    elif mode == "periodic":
        if n % 2:
            raise ConfigError("periodic mode requires an even length")
        ext = np.concatenate([x[-(_L - 1):], x])
    else:
        raise ConfigError(f"unknown extension mode {mode!r}")
    cA = np.convolve(ext, DB4_LOW, mode="valid")[1::2]
    cD = np.convolve(ext, DB4_HIGH, mode="valid")[1::2]
    return WaveletDecomposition(cA=cA, cD=cD, mode=mode)


def _upsample(c: np.ndarray) -> np.ndarray:
    u = np.zeros(2 * c.shape[0])
    u[1::2] = c
    return u


def _periodic_synthesis(u: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # y[i] = sum_k taps[k] * u[(i + k) mod n]
    wrapped = np.concatenate([u, u[: _L - 1]])
    return np.convolve(wrapped, taps[::-1], mode="valid")


def idwt_db4(dec: WaveletDecomposition, original_len: int) -> np.ndarray:
    """Perfect reconstruction of the analyzed signal."""
    cA, cD = dec.cA, dec.cD
    if cA.shape[0] != cD.shape[0]:
        raise LengthMismatch(f"len(cA)={cA.shape[0]} != len(cD)={cD.shape[0]}")
    expected = coefficient_length(original_len, dec.mode)
    if cA.shape[0] != expected:
        raise LengthMismatch(
            f"{cA.shape[0]} coefficients inconsistent with length {original_len} "
            f"({dec.mode} mode expects {expected})"
        )
    ua, ud = _upsample(cA), _upsample(cD)
    if dec.mode == "periodic":
        return _periodic_synthesis(ua, DB4_LOW) + _periodic_synthesis(ud, DB4_HIGH)
    full = np.convolve(ua, DB4_LOW[::-1]) + np.convolve(ud, DB4_HIGH[::-1])
    offset = _L - 1
    return full[offset : offset + original_len]


def wavelet_energy(dec: WaveletDecomposition) -> float:
    """Sum of squared approximation and detail coefficients."""
    return float(np.sum(dec.cA**2) + np.sum(dec.cD**2))


def approximate_entropy(series: np.ndarray, m: int = 2, r_factor: float = 0.2) -> float:
    """Regularity statistic ApEn(m, r) with Chebyshev distance.

    r is r_factor times the population standard deviation; self-matches
    are counted, and an all-constant series returns 0 by convention.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.shape[0]
    if m < 1:
        raise ConfigError(f"template length m must be >= 1, got {m}")
    if n <= m + 1:
        raise SeriesTooShort(f"need more than {m + 1} samples, got {n}")
    sd = float(np.std(x))
    if sd == 0.0:
        return 0.0
    r = r_factor * sd

    dist = np.abs(x[:, None] - x[None, :])

    def phi(order: int) -> float:
        d = dist[: n - order + 1, : n - order + 1]
        for shift in range(1, order):
            d = np.maximum(d, dist[shift : n - order + 1 + shift,
                                   shift : n - order + 1 + shift])
        counts = np.count_nonzero(d <= r, axis=1)
        return float(np.mean(np.log(counts / d.shape[0])))

    return phi(m) - phi(m + 1)
