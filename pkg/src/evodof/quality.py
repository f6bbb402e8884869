"""CSIT quality profiles for the two-user MISO broadcast channel.

A profile records, for each slot t of a T-slot coherence block, the
current-CSIT quality exponents of both users (estimation error power
decaying like P^-alpha_t) together with the delayed-CSIT exponent beta
(error power P^-beta for feedback that arrives after the block ends).
alpha = 0 means the current estimate is useless, alpha = 1 is
DoF-equivalent to perfect CSIT.

Everything downstream consumes two summary statistics: the per-user
average exponent and the fractional feedback delay (the leading fraction
of the block with zero-quality current CSIT).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

#: absolute tolerance for all exponent comparisons (profile values are
#: small rationals; exact comparisons would produce spurious violations)
TOL = 1e-12

MODES = ("symmetric", "partially-symmetric", "asymmetric")


class ProfileError(ValueError):
    """Structurally malformed profile input (empty lists, bad lengths, ...)."""


@dataclass(frozen=True)
class QualityProfile:
    """Immutable per-block CSIT quality description.

    alpha1/alpha2 hold the per-slot current-CSIT exponents of user 1 and
    user 2; beta1/beta2 the delayed exponents.  All implemented results
    take beta1 == beta2, but both are carried so that validation can
    reject the unequal case explicitly.
    """

    alpha1: tuple[float, ...]
    alpha2: tuple[float, ...]
    beta1: float
    beta2: float

    def __post_init__(self):
        if len(self.alpha1) == 0 or len(self.alpha2) == 0:
            raise ProfileError("alpha lists must have length T >= 1")
        if len(self.alpha1) != len(self.alpha2):
            raise ProfileError(
                f"alpha1 has length {len(self.alpha1)} but alpha2 has "
                f"length {len(self.alpha2)}"
            )
        for name in ("alpha1", "alpha2"):
            if not all(math.isfinite(x) for x in getattr(self, name)):
                raise ProfileError(f"{name} contains non-finite entries")
        if not (math.isfinite(self.beta1) and math.isfinite(self.beta2)):
            raise ProfileError("beta must be finite")

    @classmethod
    def make(
        cls,
        alpha1: Sequence[float],
        beta: float,
        alpha2: Sequence[float] | None = None,
        beta2: float | None = None,
    ) -> "QualityProfile":
        """Build a profile; alpha2 defaults to alpha1, beta2 to beta."""
        a1 = tuple(float(x) for x in alpha1)
        a2 = a1 if alpha2 is None else tuple(float(x) for x in alpha2)
        b1 = float(beta)
        b2 = b1 if beta2 is None else float(beta2)
        return cls(alpha1=a1, alpha2=a2, beta1=b1, beta2=b2)

    @property
    def T(self) -> int:
        return len(self.alpha1)

    @property
    def beta(self) -> float:
        """Common delayed exponent (valid profiles have beta1 == beta2)."""
        return self.beta1

    def alphas(self, user: int) -> tuple[float, ...]:
        if user == 1:
            return self.alpha1
        if user == 2:
            return self.alpha2
        raise ValueError(f"user must be 1 or 2, got {user!r}")

    def to_dict(self) -> dict:
        d = {"T": self.T, "alpha1": list(self.alpha1), "beta": self.beta1}
        if self.alpha2 != self.alpha1:
            d["alpha2"] = list(self.alpha2)
        if self.beta2 != self.beta1:
            d["beta2"] = self.beta2
        return d


@dataclass(frozen=True)
class ProfileSummary:
    """Average exponents and fractional delay of a validated profile."""

    abar1: float
    abar2: float
    gamma: float


def average_exponent(p: QualityProfile, user: int) -> float:
    """Mean of the per-slot current-CSIT exponents of one user."""
    a = p.alphas(user)
    return math.fsum(a) / len(a)


def fractional_delay(p: QualityProfile, user: int) -> float:
    """Fraction of the block over which the user's current CSIT is useless.

    Length of the leading run of (numerically) zero exponents divided by T.
    """
    a = p.alphas(user)
    n = 0
    for x in a:
        if abs(x) > TOL:
            break
        n += 1
    return n / len(a)


def summarize(p: QualityProfile) -> ProfileSummary:
    return ProfileSummary(
        abar1=average_exponent(p, 1),
        abar2=average_exponent(p, 2),
        gamma=fractional_delay(p, 1),
    )


def _check_user(violations: list[str], label: str, a: Sequence[float], beta: float):
    for t, x in enumerate(a):
        if x < -TOL:
            violations.append(f"{label}[{t}] = {x} is negative")
        if x > 1 + TOL:
            violations.append(f"{label}[{t}] = {x} exceeds 1")
    for t in range(1, len(a)):
        if a[t] < a[t - 1] - TOL:
            violations.append(
                f"{label}[{t}] = {a[t]} < {label}[{t - 1}] = {a[t - 1]} (non-monotone)"
            )
    if a[-1] > beta + TOL:
        violations.append(f"{label}[{len(a) - 1}] = {a[-1]} exceeds beta = {beta}")


def validate_profile(p: QualityProfile, mode: str = "symmetric") -> list[str]:
    """Check all ordering/range constraints; returns every violation found.

    An empty list means the profile is valid for the given mode.  All
    modes require 0 <= alpha_1 <= ... <= alpha_T <= beta <= 1 per user and
    a common delayed exponent.  On top of that:

    * ``symmetric``            - alpha1 == alpha2 slot by slot;
    * ``partially-symmetric``  - equal per-user averages;
    * ``asymmetric``           - alpha2_t <= alpha1_t for every slot.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    v: list[str] = []
    if abs(p.beta1 - p.beta2) > TOL:
        v.append(f"per-user delayed exponents differ: beta1={p.beta1}, beta2={p.beta2}")
    for label, a, beta in (("alpha1", p.alpha1, p.beta1), ("alpha2", p.alpha2, p.beta2)):
        _check_user(v, label, a, beta)
    for beta, name in ((p.beta1, "beta1"), (p.beta2, "beta2")):
        if beta < -TOL:
            v.append(f"{name} = {beta} is negative")
        if beta > 1 + TOL:
            v.append(f"{name} = {beta} exceeds 1")

    if mode == "symmetric":
        for t, (x, y) in enumerate(zip(p.alpha1, p.alpha2)):
            if abs(x - y) > TOL:
                v.append(f"symmetric mode requires alpha1[{t}] == alpha2[{t}] "
                         f"({x} != {y})")
    elif mode == "partially-symmetric":
        d = abs(average_exponent(p, 1) - average_exponent(p, 2))
        if d > TOL:
            v.append(f"partially-symmetric mode requires equal averages "
                     f"(|abar1 - abar2| = {d})")
    else:  # asymmetric
        for t, (x, y) in enumerate(zip(p.alpha1, p.alpha2)):
            if y > x + TOL:
                v.append(f"asymmetric mode requires alpha2[{t}] <= alpha1[{t}] "
                         f"({y} > {x})")
    return v


def require_valid(p: QualityProfile, mode: str) -> None:
    """Raise ProfileError if the profile violates the mode's constraints."""
    v = validate_profile(p, mode)
    if v:
        raise ProfileError("invalid profile: " + "; ".join(v))


def profile_from_dict(d: dict) -> QualityProfile:
    """Parse the JSON profile format.

    Expected keys: ``T`` (optional, cross-checked), ``alpha1``, optional
    ``alpha2`` (defaults to alpha1), ``beta``, optional ``beta2``.
    ``alpha`` is accepted as an alias for ``alpha1``.
    """
    if not isinstance(d, dict):
        raise ProfileError(f"profile must be an object, got {type(d).__name__}")
    alpha1 = d.get("alpha1", d.get("alpha"))
    if alpha1 is None:
        raise ProfileError("profile is missing 'alpha1'")
    if "beta" not in d:
        raise ProfileError("profile is missing 'beta'")
    p = QualityProfile.make(
        alpha1=alpha1,
        beta=d["beta"],
        alpha2=d.get("alpha2"),
        beta2=d.get("beta2"),
    )
    if "T" in d and int(d["T"]) != p.T:
        raise ProfileError(f"declared T={d['T']} but alpha lists have length {p.T}")
    return p


def load_profile(path: str | Path) -> QualityProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return profile_from_dict(json.load(fh))


def save_profile(p: QualityProfile, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(p.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
