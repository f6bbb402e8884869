"""Rotated-QAM lattice codebooks for the block common-information vectors.

A codeword is c = theta * V * q with q ranging over a T-fold product of a
square QAM alphabet (odd-integer grid per real dimension), V a unitary
rotation, and theta = P^((1-r)/2) sizing the code so that E||c||^2 grows
like P when the alphabet carries r*log2(P) bits per dimension.

The rotation V evaluates the alphabet polynomial at T points on the unit
circle (a Vandermonde of the roots of x^T = const, scaled by 1/sqrt(T),
which is unitary).  The points are chosen so that no nonzero polynomial
of degree < T with Gaussian-integer coefficients can vanish at any of
them; alphabet differences are exactly such polynomials, so every
coordinate of every pairwise difference is nonzero.  That is the
non-vanishing product distance property: the product of squared
coordinate differences stays bounded below by a constant times theta^(2T)
with the constant independent of P.

For T = 2 and 4 the evaluation points are roots of x^T = i, whose minimal
polynomials over the Gaussian rationals have degree T.  x^3 = i fails
(-i is a cube root of i), so T = 3 uses roots of x^3 = exp(2*pi*i/7): the
three points are 21st/7th roots of unity of degree >= 6 over the Gaussian
rationals, out of reach of any degree-2 integer relation.

After the per-coordinate whitening diag(P^(-alpha_t/2)) that models
unequal slot qualities, the arithmetic-geometric mean inequality turns
the product bound into a squared-distance floor of order P^delta when the
rate backs off to r = 1 - mean(alpha) - delta, which is what makes the
block common vectors decodable through unevenly faded slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import crandn, rng_for

#: pairwise brute force refuses above this codebook size
ENUMERATION_BUDGET = 10**6
PAIRWISE_BUDGET = 20000


class LatticeError(ValueError):
    pass


class ConstructionFailure(LatticeError):
    """A pairwise difference had a (numerically) zero coordinate."""


def rotation_matrix(T: int) -> np.ndarray:
    """Unitary T x T rotation with non-vanishing alphabet differences."""
    if T == 1:
        return np.eye(1, dtype=complex)
    if T in (2, 4):
        base = math.pi / (2 * T)  # roots of x^T = i
    elif T == 3:
        base = 2 * math.pi / 21  # roots of x^3 = exp(2*pi*i/7)
    else:
        raise LatticeError(f"dimension {T} not supported (T in 1..4)")
    roots = np.exp(1j * (base + 2 * math.pi * np.arange(T) / T))
    V = roots[:, None] ** np.arange(T)[None, :]
    return V / math.sqrt(T)


def _qam_points(m: int) -> np.ndarray:
    side = math.isqrt(m)
    if side * side != m or side % 2 or m < 4:
        raise LatticeError(f"qam size must be an even-sided square >= 4, got {m}")
    pam = np.arange(-side + 1, side, 2, dtype=float)
    re, im = np.meshgrid(pam, pam, indexing="ij")
    return (re + 1j * im).ravel()


@dataclass(frozen=True)
class LatticeCodebook:
    T: int
    r: float
    P: float
    delta: float
    qam: int
    theta: float
    generator: np.ndarray   # (T, T) unitary
    alphabet: np.ndarray    # (N, T) integer-grid QAM vectors
    codebook: np.ndarray    # (N, T) = theta * alphabet @ generator^T

    @property
    def size(self) -> int:
        return self.alphabet.shape[0]

    def mean_power(self) -> float:
        return float(np.mean(np.sum(np.abs(self.codebook) ** 2, axis=1)))


def derived_qam(r: float, P: float) -> int:
    """Square QAM size carrying about r*log2(P) bits per dimension."""
    bits = 2 * max(1, round(0.5 * r * math.log2(P)))
    return 2**bits


def build_codebook(
    T: int,
    r: float,
    P: float,
    delta: float = 0.1,
    qam: int | None = None,
) -> LatticeCodebook:
    """Construct the rotated-QAM codebook at SNR ``P`` and rate prelog ``r``.

    ``qam`` pins the per-dimension alphabet size; by default it is derived
    from the rate (rounded to a square).  theta = P^((1-r)/2) regardless,
    so a pinned alphabet keeps the unscaled lattice identical across P.
    """
    if not 1 <= T <= 4:
        raise LatticeError(f"dimension T must be in 1..4, got {T}")
    if not 0 < r <= 1:
        raise LatticeError(f"rate prelog r must lie in (0, 1], got {r}")
    if P <= 1:
        raise LatticeError(f"P must exceed 1, got {P}")
    if delta <= 0:
        raise LatticeError(f"delta must be positive, got {delta}")
    m = derived_qam(r, P) if qam is None else int(qam)
    if m**T > ENUMERATION_BUDGET:
        raise LatticeError(
            f"codebook of {m}^{T} = {m**T} words exceeds the enumeration "
            f"budget of {ENUMERATION_BUDGET}")
    points = _qam_points(m)
    grids = np.meshgrid(*([points] * T), indexing="ij")
    alphabet = np.stack([g.ravel() for g in grids], axis=-1)
    V = rotation_matrix(T)
    theta = P ** ((1 - r) / 2)
    codebook = theta * alphabet @ V.T
    return LatticeCodebook(T=T, r=float(r), P=float(P), delta=float(delta),
                           qam=m, theta=float(theta), generator=V,
                           alphabet=alphabet, codebook=codebook)


def _pair_chunks(cb: LatticeCodebook):
    n = cb.size
    if n > PAIRWISE_BUDGET:
        raise LatticeError(
            f"pairwise enumeration over {n} codewords exceeds the budget "
            f"of {PAIRWISE_BUDGET}")
    c = cb.codebook
    for i in range(n - 1):
        yield c[i + 1:] - c[i]


def min_coordinate_gap(cb: LatticeCodebook) -> float:
    """Smallest |c_t - c'_t| over all pairs and coordinates.

    Positive for a sound construction; a zero means some pair collapses in
    one coordinate and the product distance vanishes.
    """
    gap = math.inf
    for d in _pair_chunks(cb):
        gap = min(gap, float(np.abs(d).min()))
    return gap


def min_product_distance(cb: LatticeCodebook, check: bool = True) -> float:
    """Brute-force min over codeword pairs of prod_t |c_t - c'_t|^2.

    With ``check`` (default) a numerically zero coordinate difference
    raises ConstructionFailure rather than silently returning ~0.
    """
    best = math.inf
    floor = (1e-9 * cb.theta) ** 2
    for d in _pair_chunks(cb):
        sq = np.abs(d) ** 2
        if check and float(sq.min()) <= floor:
            raise ConstructionFailure(
                "a pairwise difference has a zero coordinate; the rotation "
                "does not give non-vanishing product distance")
        best = min(best, float(np.prod(sq, axis=1).min()))
    return best


def whitened_min_distance(cb: LatticeCodebook, alphas) -> float:
    """Min over pairs of sum_t |P^(-alpha_t/2) (c_t - c'_t)|^2.

    With r = 1 - mean(alphas) - delta this is bounded below by a constant
    times P^delta (product bound + AM-GM).
    """
    w = np.asarray([cb.P ** (-a) for a in alphas], dtype=float)
    if w.shape != (cb.T,):
        raise LatticeError(f"need {cb.T} whitening exponents, got {len(w)}")
    best = math.inf
    for d in _pair_chunks(cb):
        best = min(best, float((np.abs(d) ** 2 * w).sum(axis=1).min()))
    return best


def decode_error_rate(
    cb: LatticeCodebook,
    alphas,
    trials: int,
    seed: int,
    noise_scale: float = 1.0,
    chunk: int = 2048,
) -> float:
    """Monte Carlo ML word-error rate over the whitened channel.

    The receiver sees y = diag(P^(-alpha_t/2)) c + z with z i.i.d.
    CN(0, noise_scale) per slot and picks the nearest whitened codeword.
    noise_scale = 0 is the noiseless sanity mode (exact zero errors).
    """
    w = np.asarray([cb.P ** (-a / 2) for a in alphas], dtype=float)
    if w.shape != (cb.T,):
        raise LatticeError(f"need {cb.T} whitening exponents, got {len(w)}")
    W = cb.codebook * w  # (N, T) whitened codewords
    wnorm2 = np.sum(np.abs(W) ** 2, axis=1).real
    rng = rng_for(seed, 0x1A77, cb.T, cb.qam)
    errors = 0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        idx = rng.integers(cb.size, size=n)
        y = W[idx]
        if noise_scale > 0:
            y = y + crandn(rng, (n, cb.T), var=noise_scale)
        # argmin_k ||y - W_k||^2 = argmin_k (||W_k||^2 - 2 Re <y, W_k>)
        scores = wnorm2[None, :] - 2 * np.real(y @ W.conj().T)
        errors += int(np.sum(np.argmin(scores, axis=1) != idx))
        done += n
    return errors / trials
