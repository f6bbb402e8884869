"""Multi-phase precoding schemes for the two-user MISO BC.

Each scheme is resolved into explicit phase durations (in coherence
blocks), per-slot power/rate exponent tables, and an interference
quantization ledger.  The five kinds:

* ``X11`` - asymmetric CSIT, perfect delayed feedback; approaches the
  balanced corner C of the asymmetric region (needs 2*abar1 - abar2 < 1).
* ``X12`` - asymmetric CSIT; gives user 1 a full degree of freedom and
  approaches (1, abar1) or (1, (1+abar2)/2) depending on the case.
* ``X13`` - the single terminal block of X12 with the common stream
  assigned to user 2; achieves (abar2, 1) in one block.
* ``X2``  - symmetric/partially symmetric CSIT, perfect delayed feedback;
  a fixed three-block scheme achieving the symmetric optimum exactly.
* ``X3``  - symmetric/partially symmetric CSIT with imperfect delayed
  feedback of quality beta < 1; a geometric phase schedule whose limit
  traces the achievable corners as the fresh common information is split
  between the users with ratio omega.

Symbol classes per slot: ``a``/``ap`` are private streams for user 1
(``ap`` is the extra stream recovered retrospectively), ``b``/``bp`` for
user 2, ``c`` the common stream.  Powers are exponents p with symbol
power P^p; rates are prelogs r with the symbol carrying r*log2(P) bits.

The ledger identity behind every scheme: the quantized-interference bits
produced by phase s exactly fill the common-stream capacity of phase s+1.
The duration ratios (mu, eps1, eps2 / eta, phi1, phi2 / xi, zeta) are
defined to make that an algebraic identity, which the ledger check
verifies in floating point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from .quality import QualityProfile, TOL, average_exponent, require_valid
from .regions import DofPoint, beta_threshold


class SchemeError(ValueError):
    """Scheme preconditions violated (wrong case, bad delta, degenerate)."""


class SchemeKind(str, enum.Enum):
    X11 = "X11"
    X12 = "X12"
    X13 = "X13"
    X2 = "X2"
    X3 = "X3"


#: precoder tags: orthogonal to the current estimate of the *other* user's
#: channel (so the stream is invisible to them up to estimation error), or
#: pseudo-random.
ORTH_G = "orth_g"   # u: orthogonal to g-hat, hides user-1 streams from user 2
ORTH_H = "orth_h"   # v: orthogonal to h-hat
RANDOM = "random"

CLASS_PRECODER = {"a": ORTH_G, "ap": RANDOM, "b": ORTH_H, "bp": RANDOM, "c": RANDOM}

SPLIT = "split"
USER1 = "user1"
USER2 = "user2"


@dataclass(frozen=True)
class ClassAlloc:
    power: float      # exponent p: E|s|^2 = P^p
    rate: float       # prelog r
    precoder: str

    def __post_init__(self):
        if self.rate < -TOL:
            raise SchemeError(f"negative rate prelog {self.rate}")
        if self.power > 1 + TOL:
            raise SchemeError(f"power exponent {self.power} exceeds 1")


@dataclass(frozen=True)
class SlotAllocation:
    """Active symbol classes of one slot; absent keys are inactive."""

    classes: dict[str, ClassAlloc]
    vector_common: bool = False  # c decoded jointly over the whole block

    def rate(self, key: str) -> float:
        alloc = self.classes.get(key)
        return alloc.rate if alloc is not None else 0.0

    def power(self, key: str) -> float:
        alloc = self.classes.get(key)
        return alloc.power if alloc is not None else None


@dataclass(frozen=True)
class LedgerRow:
    phase: int
    produced_prelog: float   # quantization bits (in units of log2 P) made by this phase
    consumed_prelog: float   # common-stream prelog of the next phase
    balanced: bool


@dataclass(frozen=True)
class QuantizationLedger:
    rows: tuple[LedgerRow, ...]
    residual_exponent_target: float = 0.0  # matched quantization keeps noise bounded

    @property
    def balanced(self) -> bool:
        return all(r.balanced for r in self.rows)

    def max_imbalance(self) -> float:
        return max((abs(r.produced_prelog - r.consumed_prelog) for r in self.rows),
                   default=0.0)


@dataclass(frozen=True)
class SchemeConfig:
    kind: SchemeKind
    profile: QualityProfile
    S: int
    T1: float
    durations: tuple[float, ...]
    delta: float | None = None           # X11 only
    omega: float = 0.5                   # X3 split ratio of fresh common info
    common_assignment: str = SPLIT
    derived: dict = field(default_factory=dict)

    @property
    def abar1(self) -> float:
        return average_exponent(self.profile, 1)

    @property
    def abar2(self) -> float:
        return average_exponent(self.profile, 2)

    @property
    def total_blocks(self) -> float:
        return math.fsum(self.durations)

    def phase_kind(self, phase: int) -> str:
        """'head' / 'mid' / 'tail' row of this scheme's table for a phase."""
        if not 1 <= phase <= self.S:
            raise SchemeError(f"phase {phase} out of range 1..{self.S}")
        k = self.kind
        if k in (SchemeKind.X13,):
            return "tail"
        if k in (SchemeKind.X2, SchemeKind.X3) and self.common_assignment != SPLIT:
            return "tail"  # truncated single-block variants
        if k is SchemeKind.X3:
            return "main" if phase < self.S else "tail"
        if phase == 1:
            return "head"
        return "tail" if phase == self.S else "mid"

    def uses_noisy_delayed(self) -> bool:
        """X3 reconstructs interference from imperfect delayed estimates;
        the perfect-delayed schemes use the true channel."""
        return self.kind is SchemeKind.X3

    def rounded(self) -> "SchemeConfig":
        """Same scheme with durations floored to whole blocks (min 1).

        The exact real durations keep the ledger identities exact; the
        rounded variant is what a block-level run would use, at the cost
        of a small, reportable DoF offset.
        """
        rd = tuple(float(max(1, math.floor(d + TOL))) for d in self.durations)
        return replace(self, durations=rd)


# ---------------------------------------------------------------------------
# construction


def _scheme_mode(kind: SchemeKind) -> str:
    return "asymmetric" if kind in (SchemeKind.X11, SchemeKind.X12, SchemeKind.X13) \
        else "partially-symmetric"


def build_scheme(
    kind: SchemeKind | str,
    profile: QualityProfile,
    S: int = 10,
    T1: float = 1.0,
    delta: float | None = None,
    omega: float = 0.5,
    common_assignment: str = SPLIT,
) -> SchemeConfig:
    """Resolve a scheme into durations and derived constants.

    Raises SchemeError for the wrong asymmetry case (X11 needs
    2*abar1 - abar2 < 1), a delta outside its open interval, degenerate
    duration ratios, or a profile invalid for the scheme's mode.
    """
    kind = SchemeKind(kind)
    require_valid(profile, _scheme_mode(kind))
    if T1 <= 0:
        raise SchemeError(f"T1 must be positive, got {T1}")
    if not 0 <= omega <= 1:
        raise SchemeError(f"omega must lie in [0, 1], got {omega}")
    if common_assignment not in (SPLIT, USER1, USER2):
        raise SchemeError(f"unknown common_assignment {common_assignment!r}")

    a1 = average_exponent(profile, 1)
    a2 = average_exponent(profile, 2)
    beta = profile.beta

    if kind in (SchemeKind.X11, SchemeKind.X12, SchemeKind.X13, SchemeKind.X2):
        # these schemes reconstruct past interference exactly
        if abs(beta - 1.0) > TOL:
            raise SchemeError(f"{kind.value} requires perfect delayed CSIT (beta=1), "
                              f"got beta={beta}")

    if kind is SchemeKind.X11:
        if 2 * a1 - a2 >= 1 - TOL:
            raise SchemeError(
                f"wrong-case: X11 needs 2*abar1 - abar2 < 1, got {2 * a1 - a2}")
        dmax = (1 - 2 * a1 + a2) / 3
        if delta is None:
            delta = dmax / 2  # midpoint of the open interval
        if not (TOL < delta < dmax - TOL):
            raise SchemeError(
                f"invalid-delta: delta must lie in (0, {dmax}), got {delta}")
        if max(profile.alpha1) + delta > 1 + TOL:
            raise SchemeError(
                "degenerate-parameters: alpha1_t + delta exceeds 1, the common "
                "stream rate 1 - alpha1_t - delta would be negative")
        den1 = 1 - a1 - delta
        den2 = 1 - a2
        if den1 <= TOL or den2 <= TOL:
            raise SchemeError("degenerate-parameters: duration ratio denominator is 0")
        mu = (a1 - a2 + 2 * delta) / den1
        eps1 = (2 - a1 - a2) / den1
        eps2 = (a1 - a2 + 2 * delta) / den2
        if S < 3:
            raise SchemeError("X11 needs S >= 3 (head, middle, terminal phases)")
        durations = [T1] + [T1 * eps1 * mu ** (s - 2) for s in range(2, S)]
        durations.append(durations[-1] * eps2)
        derived = {"mu": mu, "eps1": eps1, "eps2": eps2, "delta": delta}

    elif kind is SchemeKind.X12:
        if 1 - a1 <= TOL or 1 - a2 <= TOL:
            raise SchemeError("degenerate-parameters: X12 needs abar1 < 1")
        eta = (a1 - a2) / (1 - a1)
        phi1 = (1 - a2) / (1 - a1)
        phi2 = (a1 - a2) / (1 - a2)
        if S < 3:
            raise SchemeError("X12 needs S >= 3 (head, middle, terminal phases)")
        durations = [T1] + [T1 * phi1 * eta ** (s - 2) for s in range(2, S)]
        durations.append(durations[-1] * phi2)
        derived = {"eta": eta, "phi1": phi1, "phi2": phi2}

    elif kind is SchemeKind.X13:
        # single terminal block of X12
        S = 1
        durations = [1.0]
        derived = {}
        common_assignment = USER2

    elif kind is SchemeKind.X2:
        S = 2
        durations = [1.0, 2.0] if common_assignment == SPLIT else [1.0]
        if common_assignment != SPLIT:
            S = 1
        derived = {}

    else:  # X3
        abar = a1
        if common_assignment == SPLIT:
            if beta >= 1 - TOL:
                raise SchemeError("degenerate-parameters: X3 needs beta < 1 "
                                  "(use X2 under perfect delayed CSIT)")
            if beta <= abar + TOL:
                raise SchemeError("degenerate-parameters: X3 needs beta > abar, "
                                  "there is no delayed-quality surplus to forward")
            xi = 2 * (beta - abar) / (1 - beta)
            zeta = 2 * (beta - abar) / (1 - abar)
            derived = {"xi": xi, "zeta": zeta}
            if S < 2:
                raise SchemeError("X3 needs S >= 2")
            durations = [T1 * xi ** (s - 1) for s in range(1, S)]
            durations.append(durations[-1] * zeta)
        else:
            # truncated terminal block; never touches delayed CSIT, any beta
            S = 1
            durations = [1.0]
            derived = {}

    cfg = SchemeConfig(
        kind=kind,
        profile=profile,
        S=S,
        T1=float(T1),
        durations=tuple(float(d) for d in durations),
        delta=None if kind is not SchemeKind.X11 else float(delta),
        omega=float(omega),
        common_assignment=common_assignment,
        derived=derived,
    )
    _check_rates(cfg)
    return cfg


def _check_rates(cfg: SchemeConfig) -> None:
    # ClassAlloc raises on negative rates / powers above 1
    for phase in range(1, cfg.S + 1):
        for t in range(1, cfg.profile.T + 1):
            allocation(cfg, phase, t)


# ---------------------------------------------------------------------------
# per-slot allocation tables


def _alloc(**kv: tuple[float, float]) -> dict[str, ClassAlloc]:
    return {
        k: ClassAlloc(power=p, rate=r, precoder=CLASS_PRECODER[k])
        for k, (p, r) in kv.items()
    }


def allocation(cfg: SchemeConfig, phase: int, t: int) -> SlotAllocation:
    """Power/rate exponent row for slot ``t`` (1-based) of ``phase``."""
    if not 1 <= t <= cfg.profile.T:
        raise SchemeError(f"slot {t} out of range 1..{cfg.profile.T}")
    pk = cfg.phase_kind(phase)
    a1 = cfg.profile.alpha1[t - 1]
    a2 = cfg.profile.alpha2[t - 1]
    kind = cfg.kind

    if kind is SchemeKind.X11:
        d = cfg.delta
        if pk == "head":
            return SlotAllocation(_alloc(
                a=(1.0, 1.0), ap=(1 - a2, 1 - a2),
                b=(1.0, 1.0), bp=(1 - a1, 1 - a1)))
        if pk == "mid":
            return SlotAllocation(_alloc(
                c=(1.0, 1 - a1 - d),
                a=(a1 + d, a1 + d), ap=(a1 - a2 + d, a1 - a2 + d),
                b=(a1 + d, a1 + d), bp=(d, d)))
        return SlotAllocation(_alloc(
            c=(1.0, 1 - a2), a=(a2, a2), b=(a2, a2)))

    if kind in (SchemeKind.X12, SchemeKind.X13):
        if pk == "head":
            return SlotAllocation(_alloc(
                a=(1.0, 1.0), ap=(1 - a2, 1 - a2), b=(a1, a1)))
        if pk == "mid":
            return SlotAllocation(_alloc(
                c=(1.0, 1 - a1),
                a=(a1, a1), ap=(a1 - a2, a1 - a2), b=(a1, a1)))
        return SlotAllocation(_alloc(
            c=(1.0, 1 - a2), a=(a2, a2), b=(a2, a2)))

    if kind is SchemeKind.X2:
        if pk == "head":
            return SlotAllocation(_alloc(
                a=(1.0, 1.0), ap=(1 - a2, 1 - a2),
                b=(1.0, 1.0), bp=(1 - a1, 1 - a1)))
        # two-block vector phase: the common vector carries T(1-abar) per block
        abar = cfg.abar1
        return SlotAllocation(_alloc(
            c=(1.0, 1 - abar), a=(a2, a2), b=(a1, a1)), vector_common=True)

    # X3
    beta = cfg.profile.beta
    if pk == "main":
        return SlotAllocation(_alloc(
            c=(1.0, 1 - beta),
            a=(beta, beta), ap=(beta - a2, beta - a2),
            b=(beta, beta), bp=(beta - a1, beta - a1)))
    abar = cfg.abar1
    return SlotAllocation(_alloc(
        c=(1.0, 1 - abar), a=(a2, a2), b=(a1, a1)), vector_common=True)


def quantization_plan(cfg: SchemeConfig, phase: int, t: int) -> dict[str, float]:
    """Quantization prelogs for the two interference values of one slot.

    Returns {"i1": phi, "i2": phi} restricted to the interferences this
    phase actually feeds back.  The prelog always matches the declared
    source exponent, so the quantization noise stays bounded ("matched"
    quantization); the source exponents themselves are recovered via
    ``interference_exponents``.
    """
    pk = cfg.phase_kind(phase)
    a1 = cfg.profile.alpha1[t - 1]
    a2 = cfg.profile.alpha2[t - 1]
    kind = cfg.kind
    if kind is SchemeKind.X11:
        if pk == "head":
            return {"i1": 1 - a1, "i2": 1 - a2}
        if pk == "mid":
            return {"i1": cfg.delta, "i2": a1 - a2 + cfg.delta}
        return {}
    if kind in (SchemeKind.X12, SchemeKind.X13):
        if pk == "head":
            return {"i2": 1 - a2}
        if pk == "mid":
            return {"i2": a1 - a2}
        return {}
    if kind is SchemeKind.X2:
        return {"i1": 1 - a1, "i2": 1 - a2} if pk == "head" else {}
    # X3: every non-terminal phase forwards both interference streams
    beta = cfg.profile.beta
    if pk == "main":
        return {"i1": beta - a1, "i2": beta - a2}
    return {}


def interference_exponents(cfg: SchemeConfig, phase: int, t: int) -> dict[str, float]:
    """Declared power exponents of the delayed interference estimates.

    i1 is the interference overheard by user 1 (from the b/bp streams),
    i2 the one overheard by user 2.  With matched quantization these equal
    the plan's prelogs wherever a value is quantized.
    """
    alloc = allocation(cfg, phase, t)
    a1 = cfg.profile.alpha1[t - 1]
    a2 = cfg.profile.alpha2[t - 1]
    out: dict[str, float] = {}
    # orthogonal precoding suppresses the main stream by the current
    # estimation error (alpha_t <= beta, so the current error dominates
    # the delayed one); the random-precoded extra stream leaks in full
    terms1 = []
    if "b" in alloc.classes:
        terms1.append(alloc.classes["b"].power - a1)
    if "bp" in alloc.classes:
        terms1.append(alloc.classes["bp"].power)
    if terms1:
        out["i1"] = max(terms1)
    terms2 = []
    if "a" in alloc.classes:
        terms2.append(alloc.classes["a"].power - a2)
    if "ap" in alloc.classes:
        terms2.append(alloc.classes["ap"].power)
    if terms2:
        out["i2"] = max(terms2)
    return out


# ---------------------------------------------------------------------------
# ledger and DoF accounting


def _slot_sum(cfg: SchemeConfig, phase: int, f) -> float:
    return math.fsum(f(allocation(cfg, phase, t)) for t in range(1, cfg.profile.T + 1))


def quantization_ledger(cfg: SchemeConfig) -> QuantizationLedger:
    """Per-phase produced vs consumed quantization prelog.

    produced(s) sums the plan's prelogs over phase s (times its duration);
    consumed(s) is the common-stream prelog of phase s+1.  The terminal
    phase produces nothing.  Imbalance is reported, never raised.
    """
    rows = []
    for s in range(1, cfg.S + 1):
        produced = cfg.durations[s - 1] * math.fsum(
            math.fsum(quantization_plan(cfg, s, t).values())
            for t in range(1, cfg.profile.T + 1)
        )
        if s < cfg.S:
            consumed = cfg.durations[s] * _slot_sum(cfg, s + 1, lambda al: al.rate("c"))
        else:
            consumed = 0.0
        rows.append(LedgerRow(
            phase=s,
            produced_prelog=produced,
            consumed_prelog=consumed,
            balanced=abs(produced - consumed) <= 1e-9 * max(1.0, abs(produced)),
        ))
    return QuantizationLedger(rows=tuple(rows))


def _fresh_common_credit(cfg: SchemeConfig) -> tuple[float, float]:
    """Common-stream prelog carrying fresh data, split between the users.

    Only two places carry fresh bits on the common stream: the first phase
    of X3 (everything later retransmits quantized interference) and the
    common stream of the truncated single-block variants (X13 and the
    X2/X3 corner variants)."""
    if cfg.kind is SchemeKind.X3 and cfg.common_assignment == SPLIT:
        total = cfg.durations[0] * _slot_sum(cfg, 1, lambda al: al.rate("c"))
        return cfg.omega * total, (1 - cfg.omega) * total
    if cfg.common_assignment in (USER1, USER2):
        total = cfg.durations[0] * _slot_sum(cfg, 1, lambda al: al.rate("c"))
        return (total, 0.0) if cfg.common_assignment == USER1 else (0.0, total)
    return 0.0, 0.0


def dof_finite(cfg: SchemeConfig) -> DofPoint:
    """Exact DoF pair of the finite-phase scheme.

    Duration-weighted private prelogs (plus any fresh common credit)
    divided by the total number of channel uses."""
    u1 = u2 = 0.0
    for s in range(1, cfg.S + 1):
        d = cfg.durations[s - 1]
        u1 += d * _slot_sum(cfg, s, lambda al: al.rate("a") + al.rate("ap"))
        u2 += d * _slot_sum(cfg, s, lambda al: al.rate("b") + al.rate("bp"))
    c1, c2 = _fresh_common_credit(cfg)
    total = cfg.profile.T * cfg.total_blocks
    return DofPoint((u1 + c1) / total, (u2 + c2) / total)


def dof_limit(
    kind: SchemeKind | str,
    profile: QualityProfile,
    omega: float = 0.5,
    common_assignment: str = SPLIT,
) -> DofPoint:
    """Large-phase-count DoF pair of a scheme, in closed form."""
    kind = SchemeKind(kind)
    require_valid(profile, _scheme_mode(kind))
    a1 = average_exponent(profile, 1)
    a2 = average_exponent(profile, 2)

    if kind is SchemeKind.X11:
        if 2 * a1 - a2 >= 1 - TOL:
            raise SchemeError(
                f"wrong-case: X11 needs 2*abar1 - abar2 < 1, got {2 * a1 - a2}")
        return DofPoint((2 + 2 * a1 - a2) / 3, (2 + 2 * a2 - a1) / 3)

    if kind is SchemeKind.X12:
        if 2 * a1 - a2 < 1 - TOL:
            return DofPoint(1.0, a1)
        return DofPoint(1.0, (1 + a2) / 2)

    if kind is SchemeKind.X13:
        return DofPoint(a2, 1.0)

    abar = a1
    if common_assignment == USER1:
        return DofPoint(1.0, abar)
    if common_assignment == USER2:
        return DofPoint(abar, 1.0)

    if kind is SchemeKind.X2:
        return DofPoint((2 + abar) / 3, (2 + abar) / 3)

    # X3: effective delayed quality saturates at the perfect-equivalent level
    if not 0 <= omega <= 1:
        raise SchemeError(f"omega must lie in [0, 1], got {omega}")
    bpp = min(profile.beta, beta_threshold(abar))
    d1 = bpp * (2 - 3 * omega) + abar * (2 * omega - 1) + omega
    d2 = bpp * (3 * omega - 1) + abar * (1 - 2 * omega) + 1 - omega
    return DofPoint(d1, d2)


def scheme_summary(cfg: SchemeConfig) -> dict:
    """Plain-dict description used by the CLI report."""
    ledger = quantization_ledger(cfg)
    fin = dof_finite(cfg)
    lim = dof_limit(cfg.kind, cfg.profile, omega=cfg.omega,
                    common_assignment=cfg.common_assignment)
    return {
        "kind": cfg.kind.value,
        "S": cfg.S,
        "T1": cfg.T1,
        "delta": cfg.delta,
        "omega": cfg.omega,
        "common_assignment": cfg.common_assignment,
        "derived": dict(cfg.derived),
        "durations": list(cfg.durations),
        "dof_finite": [fin.d1, fin.d2],
        "dof_limit": [lim.d1, lim.d2],
        "ledger": [
            {
                "phase": r.phase,
                "produced_prelog": r.produced_prelog,
                "consumed_prelog": r.consumed_prelog,
                "balanced": r.balanced,
            }
            for r in ledger.rows
        ],
        "ledger_balanced": ledger.balanced,
    }
