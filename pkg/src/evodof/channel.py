"""Block-fading channel sampling, precoders and the interference quantizer.

The estimate model: for a true channel h ~ CN(0, I_M) and a quality
exponent alpha, the estimate and its error satisfy

    h = h_hat + h_err,   h_err ~ CN(0, P^-alpha I),   h_err independent of h_hat.

Sampling draws h first and then each estimate from the exact conditional
law, so both the error power P^-alpha and the independence hold exactly
(this is what makes every declared high-SNR exponent measurable without a
constant-drift bias).  At alpha = 0 the estimate degenerates to the zero
vector: no usable CSIT, and precoders built from it fall back to random
directions.

Transmitted symbols are drawn with uniform random phase and deterministic
magnitude P^(p/2).  Declared class powers then hold exactly, and the
interference seen by either user (a sum of channel-coefficient times
symbol products) is exactly complex Gaussian, which keeps the quantizer's
4-sigma range honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quality import QualityProfile


def rng_for(seed: int, *tags: int) -> np.random.Generator:
    """Deterministic generator for a (seed, substream-tags) address."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *[int(t) & 0xFFFFFFFF for t in tags]])


def crandn(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """i.i.d. CN(0, var) samples."""
    scale = math.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _conditional_estimate(
    rng: np.random.Generator, h: np.ndarray, err_var: float
) -> np.ndarray:
    """Draw h_hat with h = h_hat + err, err ~ CN(0, err_var I) independent
    of h_hat, jointly Gaussian with the unit-variance h."""
    s2 = min(1.0, max(0.0, err_var))
    return (1.0 - s2) * h + crandn(rng, h.shape, s2 * (1.0 - s2))


@dataclass(frozen=True)
class BlockRealization:
    """One coherence block: true channels, per-slot current estimates and
    delayed estimates, with a leading trial axis.

    Shapes: h, g, h_check, g_check are (n, M); h_hat, g_hat are (T, n, M).
    Errors are recovered as differences, e.g. h - h_hat[t].
    """

    P: float
    M: int
    h: np.ndarray
    g: np.ndarray
    h_hat: np.ndarray
    g_hat: np.ndarray
    h_check: np.ndarray
    g_check: np.ndarray

    @property
    def trials(self) -> int:
        return self.h.shape[0]


def sample_blocks(
    P: float,
    profile: QualityProfile,
    rng: np.random.Generator,
    trials: int,
    M: int = 2,
) -> BlockRealization:
    """Vectorized draw of ``trials`` independent coherence blocks at SNR P."""
    if P <= 1:
        raise ValueError(f"P must exceed 1, got {P}")
    T = profile.T
    h = crandn(rng, (trials, M))
    g = crandn(rng, (trials, M))
    h_hat = np.empty((T, trials, M), dtype=complex)
    g_hat = np.empty((T, trials, M), dtype=complex)
    for t in range(T):
        h_hat[t] = _conditional_estimate(rng, h, P ** (-profile.alpha1[t]))
        g_hat[t] = _conditional_estimate(rng, g, P ** (-profile.alpha2[t]))
    h_check = _conditional_estimate(rng, h, P ** (-profile.beta1))
    g_check = _conditional_estimate(rng, g, P ** (-profile.beta2))
    return BlockRealization(P=float(P), M=M, h=h, g=g, h_hat=h_hat, g_hat=g_hat,
                            h_check=h_check, g_check=g_check)


def sample_block(P: float, profile: QualityProfile, seed: int, M: int = 2) -> BlockRealization:
    """Single deterministic block draw (trial axis of length 1)."""
    return sample_blocks(P, profile, rng_for(seed), trials=1, M=M)


# ---------------------------------------------------------------------------
# precoders


def random_unit(rng: np.random.Generator, n: int, M: int) -> np.ndarray:
    v = crandn(rng, (n, M))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def orthogonal_unit(est: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """Unit vectors u with est^T u = 0 (plain transpose, no conjugate).

    For M = 2 the 90-degree rotation (-e2, e1)/|e| nulls the estimate to
    machine precision.  For larger M the first right-singular nullspace
    direction of the 1xM row est^T is used.  Rows whose estimate is
    (numerically) zero carry no information; those take the corresponding
    ``fallback`` random direction instead.
    """
    n, M = est.shape
    norms = np.linalg.norm(est, axis=-1)
    dead = norms < 1e-12
    out = np.empty_like(est)
    if M == 2:
        safe = np.where(dead[:, None], 1.0, norms[:, None])
        out[:, 0] = -est[:, 1]
        out[:, 1] = est[:, 0]
        out /= safe
    else:
        for i in range(n):
            if dead[i]:
                continue
            # first nullspace direction of the 1xM row est[i]^T: svd of the
            # row A gives A @ conj(vh[k]) = 0 for k >= rank(A)
            _, _, vh = np.linalg.svd(est[i][None, :])
            out[i] = vh[1].conj()
    return np.where(dead[:, None], fallback, out)


# ---------------------------------------------------------------------------
# scalar quantizer


#: clamp range in units of the declared per-dimension deviation P^(e/2)
RANGE_SIGMAS = 5.0
#: entropy-coded uniform quantization of a Gaussian source operates at
#: distortion (2*pi*e/12) * var * 2^(-2 bits); the step realizing it
_GISH_PIERCE = math.sqrt(2 * math.pi * math.e)


def quantize_interference(
    value: np.ndarray | complex,
    prelog_bits: float,
    P: float,
    source_exponent: float,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Uniform scalar quantization of complex values with a prelog bit budget.

    ``prelog_bits`` * log2(P) bits describe each complex value, split
    evenly over the real and imaginary parts.  The bit budget is an
    entropy budget: the cell width is sqrt(2*pi*e) * P^(e/2) * 2^-bits
    (the high-resolution operating point of an entropy-coded uniform
    quantizer for a Gaussian source of the declared deviation P^(e/2)),
    so the residual power tracks the rate-distortion law P^(e - prelog)
    down to budgets of a fraction of a bit.  Sizing the cells by raw cell
    count over the clamp range instead would waste the budget whenever
    prelog_bits * log2(P) is small and break the matched-residual scaling
    at simulation SNRs.

    Cells are centered on an infinite lattice and clamped into
    +-RANGE_SIGMAS * P^(e/2) per real dimension, where e is the declared
    source exponent; clamping is the overflow event.

    Returns (quantized, residual, overflow_fraction) where residual is
    value - quantized and overflow_fraction is the fraction of clamped
    real dimensions.  prelog_bits = 0 conveys nothing: quantized = 0 and
    residual = value.
    """
    if prelog_bits < 0:
        raise ValueError(f"prelog_bits must be nonnegative, got {prelog_bits}")
    v = np.asarray(value, dtype=complex)
    if prelog_bits == 0:
        return np.zeros_like(v), v.copy(), 0.0
    sigma = P ** (source_exponent / 2.0)
    span = RANGE_SIGMAS * sigma
    bits_per_dim = 0.5 * prelog_bits * math.log2(P)
    step = _GISH_PIERCE * sigma * 2.0 ** (-bits_per_dim)

    def _q(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        centers = (np.floor(x / step) + 0.5) * step
        over = np.abs(x) > span
        centers = np.clip(centers, -span, span)
        return centers, over

    qr, ovr = _q(v.real)
    qi, ovi = _q(v.imag)
    q = qr + 1j * qi
    overflow = float((np.count_nonzero(ovr) + np.count_nonzero(ovi)) / (2 * v.size)) if v.size else 0.0
    return q, v - q, overflow
