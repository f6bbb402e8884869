"""Monte Carlo verification of the schemes' high-SNR exponents.

Every claim a scheme makes is of the form  quantity(P) ~ P^B  (powers of
received-signal terms) or  rate(P) ~ B * log2(P)  (decodable prelogs).
The engine samples the block-fading channel over a geometric SNR grid,
averages each quantity per grid point, and checks the least-squares slope
of log10(mean) against log10(P) (or of the mean rate against log2(P))
against the declared exponent.

Measured surfaces per scheme phase:

* term exponents: per received-signal summand (both users, every active
  symbol class, noise, and for imperfect delayed feedback the delayed
  interference estimate and its residual);
* decodable common-stream prelog: scalar slots via log(1+SINR) treating
  everything else as noise, block phases via the per-block sum;
* retrospective private rates via the 2x2 effective channel formed by the
  interference-cleaned observation and the quantized cross-interference
  observation (log-det slope = sum of the two stream prelogs);
* direct private rates of terminal phases (SISO after common removal);
* quantizer residual power (slope 0 under matched feedback) and overflow;
* transmit power (slope of E||x||^2 <= 1, dominated by the top class).

Determinism: every (seed, scheme, phase, grid-point) tuple addresses an
independent substream; results are bit-identical for identical inputs and
do not depend on which measurements are requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    crandn,
    orthogonal_unit,
    quantize_interference,
    random_unit,
    rng_for,
    sample_blocks,
)
from .schemes import (
    SchemeConfig,
    SlotAllocation,
    allocation,
    interference_exponents,
    quantization_plan,
)

SLOPE_TOL = 0.05

# substream tags (stable addresses, do not reorder)
_TAG_TERMS, _TAG_COMMON, _TAG_MIMO, _TAG_PRIV, _TAG_QUANT, _TAG_POWER = range(1, 7)


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentMeasurement:
    label: str
    expected: float
    grid: tuple[float, ...]
    means: tuple[float, ...]
    slope: float
    stderr: float
    trials: int
    extras: dict = field(default_factory=dict)

    def passes(self, tol: float = SLOPE_TOL) -> bool:
        return abs(self.slope - self.expected) <= tol

    @property
    def error(self) -> float:
        return self.slope - self.expected


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    resid = y - (ym + slope * (x - xm))
    dof = max(1, len(x) - 2)
    stderr = math.sqrt(float((resid**2).sum()) / dof / sxx)
    return slope, stderr


def _check_grid(grid) -> tuple[float, ...]:
    g = tuple(float(p) for p in grid)
    if len(g) < 3:
        raise MeasurementError("grid needs at least 3 SNR points")
    if any(p <= 1 for p in g):
        raise MeasurementError("grid SNRs must exceed 1")
    if sorted(g) != list(g):
        raise MeasurementError("grid must be strictly increasing")
    if math.log10(g[-1] / g[0]) < 3 - 1e-9:
        raise MeasurementError(
            "grid spans fewer than 3 decades; slope estimates would be unreliable")
    return g


def _power_measurement(label, expected, grid, means, trials, extras=None) -> ExponentMeasurement:
    slope, stderr = _ols(np.log10(grid), np.log10(np.maximum(means, 1e-300)))
    return ExponentMeasurement(label=label, expected=float(expected), grid=tuple(grid),
                               means=tuple(float(m) for m in means), slope=slope,
                               stderr=stderr, trials=trials, extras=extras or {})


def _rate_fit_window(grid) -> np.ndarray:
    """Indices of the asymptotic (upper log-half) grid points for rate fits.

    Rates are log(1 + SINR) quantities: at the bottom of the grid the +1
    still bends the curve, so fitting the full window would understate
    the prelog by more than the tolerance.  At least 3 points are kept.
    """
    lg = np.log10(np.asarray(grid, dtype=float))
    mid = 0.5 * (lg[0] + lg[-1])
    idx = np.nonzero(lg >= mid - 1e-9)[0]
    if len(idx) < min(3, len(lg)):
        idx = np.arange(len(lg))[-3:]
    return idx


def _rate_measurement(label, expected, grid, rates, trials, extras=None) -> ExponentMeasurement:
    # rates are in bits; the prelog is the slope against log2 P
    idx = _rate_fit_window(grid)
    g = np.asarray(grid, dtype=float)
    slope, stderr = _ols(np.log2(g[idx]), np.asarray(rates)[idx])
    ex = dict(extras or {})
    ex["fit_points"] = int(len(idx))
    return ExponentMeasurement(label=label, expected=float(expected), grid=tuple(grid),
                               means=tuple(float(m) for m in rates), slope=slope,
                               stderr=stderr, trials=trials, extras=ex)


# ---------------------------------------------------------------------------
# slot realizations


@dataclass
class _SlotDraw:
    """All channel/precoder inner products and symbols of one slot.

    Every field is a length-n complex array.  d-prefixed dots use the
    transmitter's delayed channel estimate, which is the true channel for
    the perfect-delayed schemes and the noisy check-estimate for X3.
    """

    P: float
    t: int
    alloc: SlotAllocation
    hu: np.ndarray; hup: np.ndarray; hv: np.ndarray; hvp: np.ndarray; hw: np.ndarray
    gu: np.ndarray; gup: np.ndarray; gv: np.ndarray; gvp: np.ndarray; gw: np.ndarray
    dhv: np.ndarray; dhvp: np.ndarray; dgu: np.ndarray; dgup: np.ndarray
    symbols: dict
    z1: np.ndarray
    z2: np.ndarray
    xnorm2: np.ndarray
    ortho_defect: float

    def dot(self, user: int, key: str) -> np.ndarray:
        return {
            (1, "a"): self.hu, (1, "ap"): self.hup, (1, "b"): self.hv,
            (1, "bp"): self.hvp, (1, "c"): self.hw,
            (2, "a"): self.gu, (2, "ap"): self.gup, (2, "b"): self.gv,
            (2, "bp"): self.gvp, (2, "c"): self.gw,
        }[(user, key)]

    def interference(self, user: int, delayed: bool) -> np.ndarray:
        """Cross-stream interference overheard by ``user``; ``delayed``
        selects the transmitter's delayed reconstruction of it."""
        n = self.z1.shape[0]
        out = np.zeros(n, dtype=complex)
        if user == 1:
            if "b" in self.symbols:
                out += (self.dhv if delayed else self.hv) * self.symbols["b"]
            if "bp" in self.symbols:
                out += (self.dhvp if delayed else self.hvp) * self.symbols["bp"]
        else:
            if "a" in self.symbols:
                out += (self.dgu if delayed else self.gu) * self.symbols["a"]
            if "ap" in self.symbols:
                out += (self.dgup if delayed else self.gup) * self.symbols["ap"]
        return out


def _dot(ch: np.ndarray, vec: np.ndarray) -> np.ndarray:
    # transpose inner product ch^T vec, row-wise
    return np.einsum("ij,ij->i", ch, vec)


def _draw_slot(cfg: SchemeConfig, phase: int, t: int, blocks,
               rng: np.random.Generator) -> _SlotDraw:
    P, trials, M = blocks.P, blocks.trials, blocks.M
    alloc = allocation(cfg, phase, t)
    # fallback directions are always drawn to keep substreams aligned
    u = orthogonal_unit(blocks.g_hat[t - 1], random_unit(rng, trials, M))
    v = orthogonal_unit(blocks.h_hat[t - 1], random_unit(rng, trials, M))
    up = random_unit(rng, trials, M)
    vp = random_unit(rng, trials, M)
    w = random_unit(rng, trials, M)

    symbols = {}
    for key, cl in alloc.classes.items():
        mag = P ** (cl.power / 2.0)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=trials)
        symbols[key] = mag * np.exp(1j * phases)

    z1 = crandn(rng, trials)
    z2 = crandn(rng, trials)

    if cfg.uses_noisy_delayed():
        dh, dg = blocks.h_check, blocks.g_check
    else:
        dh, dg = blocks.h, blocks.g

    vecs = {"a": u, "ap": up, "b": v, "bp": vp, "c": w}
    x = np.zeros((trials, M), dtype=complex)
    for key, s in symbols.items():
        x += vecs[key] * s[:, None]

    defect = 0.0
    if blocks.g_hat[t - 1].any():
        defect = float(np.abs(_dot(blocks.g_hat[t - 1], u)).max())
    if blocks.h_hat[t - 1].any():
        defect = max(defect, float(np.abs(_dot(blocks.h_hat[t - 1], v)).max()))

    return _SlotDraw(
        P=P, t=t, alloc=alloc,
        hu=_dot(blocks.h, u), hup=_dot(blocks.h, up), hv=_dot(blocks.h, v),
        hvp=_dot(blocks.h, vp), hw=_dot(blocks.h, w),
        gu=_dot(blocks.g, u), gup=_dot(blocks.g, up), gv=_dot(blocks.g, v),
        gvp=_dot(blocks.g, vp), gw=_dot(blocks.g, w),
        dhv=_dot(dh, v), dhvp=_dot(dh, vp), dgu=_dot(dg, u), dgup=_dot(dg, up),
        symbols=symbols, z1=z1, z2=z2,
        xnorm2=np.einsum("ij,ij->i", x, x.conj()).real,
        ortho_defect=defect,
    )


def _draw_phase(cfg, phase, P, trials, rng, M=2) -> list[_SlotDraw]:
    # one channel draw per coherence block, shared by all T slots
    blocks = sample_blocks(P, cfg.profile, rng, trials, M)
    return [_draw_slot(cfg, phase, t, blocks, rng)
            for t in range(1, cfg.profile.T + 1)]


def _label(cfg: SchemeConfig, phase: int, rest: str) -> str:
    return f"{cfg.kind.value}/ph{phase}({cfg.phase_kind(phase)})/{rest}"


def _slots(cfg: SchemeConfig, slots) -> list[int]:
    if slots is None:
        return list(range(1, cfg.profile.T + 1))
    return [int(t) for t in slots]


# ---------------------------------------------------------------------------
# measurements


def term_exponents(cfg: SchemeConfig, phase: int, grid, trials: int, seed: int,
                   slots=None, M: int = 2) -> list[ExponentMeasurement]:
    """Measured power slope of every received-signal summand of a phase.

    Includes the additive noise (slope 0) and, for noisy delayed feedback,
    the delayed interference estimate and the leftover delayed-error term.
    """
    grid = _check_grid(grid)
    slots = _slots(cfg, slots)
    acc: dict[str, tuple[float, list[float]]] = {}

    for gi, P in enumerate(grid):
        rng = rng_for(seed, _TAG_TERMS, phase, gi)
        draws = _draw_phase(cfg, phase, P, trials, rng, M)
        for t in slots:
            d = draws[t - 1]
            a1 = cfg.profile.alpha1[t - 1]
            a2 = cfg.profile.alpha2[t - 1]
            quantities: list[tuple[str, float, np.ndarray]] = []
            for key, cl in d.alloc.classes.items():
                exp1 = cl.power - a1 if key == "b" else cl.power
                exp2 = cl.power - a2 if key == "a" else cl.power
                quantities.append((f"t{t}/user1/{key}", exp1, d.dot(1, key) * d.symbols[key]))
                quantities.append((f"t{t}/user2/{key}", exp2, d.dot(2, key) * d.symbols[key]))
            quantities.append((f"t{t}/user1/noise", 0.0, d.z1))
            quantities.append((f"t{t}/user2/noise", 0.0, d.z2))
            if cfg.uses_noisy_delayed():
                e = interference_exponents(cfg, phase, t)
                if "i1" in e and ("b" in d.symbols or "bp" in d.symbols):
                    est = d.interference(1, delayed=True)
                    res = d.interference(1, delayed=False) - est
                    quantities.append((f"t{t}/user1/delayed_interf_estimate", e["i1"], est))
                    quantities.append((f"t{t}/user1/delayed_interf_residual", 0.0, res))
                if "i2" in e and ("a" in d.symbols or "ap" in d.symbols):
                    est = d.interference(2, delayed=True)
                    res = d.interference(2, delayed=False) - est
                    quantities.append((f"t{t}/user2/delayed_interf_estimate", e["i2"], est))
                    quantities.append((f"t{t}/user2/delayed_interf_residual", 0.0, res))
            for rest, expect, vals in quantities:
                label = _label(cfg, phase, rest)
                mean = float(np.mean(np.abs(vals) ** 2))
                if label not in acc:
                    acc[label] = (expect, [])
                acc[label][1].append(mean)

    return [
        _power_measurement(label, expect, grid, means, trials)
        for label, (expect, means) in acc.items()
    ]


def _sinr_denom(d: _SlotDraw, user: int) -> np.ndarray:
    out = np.ones(d.z1.shape[0])
    for key in d.alloc.classes:
        if key == "c":
            continue
        out = out + np.abs(d.dot(user, key) * d.symbols[key]) ** 2
    return out


def rate_prelog_common(cfg: SchemeConfig, phase: int, grid, trials: int, seed: int,
                       M: int = 2) -> list[ExponentMeasurement]:
    """Decodable prelog of the common stream, treating the rest as noise.

    Scalar phases yield one measurement per slot with expectation equal to
    the slot's common rate; block (vector) phases yield one measurement
    with expectation sum_t r_c = T(1 - abar).  The decodable rate is the
    worse of the two users' mutual informations.
    """
    grid = _check_grid(grid)
    probe = allocation(cfg, phase, 1)
    if "c" not in probe.classes:
        raise MeasurementError(f"phase {phase} has no common stream")
    vector = probe.vector_common
    T = cfg.profile.T

    per_slot: list[list[float]] = [[] for _ in range(T)]
    block: list[float] = []
    for gi, P in enumerate(grid):
        rng = rng_for(seed, _TAG_COMMON, phase, gi)
        draws = _draw_phase(cfg, phase, P, trials, rng, M)
        mi1 = np.zeros(trials)
        mi2 = np.zeros(trials)
        for t in range(1, T + 1):
            d = draws[t - 1]
            pc = d.alloc.classes["c"].power
            s1 = np.log2(1 + (P**pc) * np.abs(d.hw) ** 2 / _sinr_denom(d, 1))
            s2 = np.log2(1 + (P**pc) * np.abs(d.gw) ** 2 / _sinr_denom(d, 2))
            if vector:
                mi1 += s1
                mi2 += s2
            else:
                per_slot[t - 1].append(float(np.mean(np.minimum(s1, s2))))
        if vector:
            block.append(float(np.mean(np.minimum(mi1, mi2))))

    if vector:
        expect = sum(allocation(cfg, phase, t).rate("c") for t in range(1, T + 1))
        return [_rate_measurement(_label(cfg, phase, "common_vector"), expect, grid,
                                  block, trials)]
    out = []
    for t in range(1, T + 1):
        expect = allocation(cfg, phase, t).rate("c")
        out.append(_rate_measurement(_label(cfg, phase, f"t{t}/common"), expect, grid,
                                     per_slot[t - 1], trials))
    return out


def _retro_pieces(cfg, phase, d: _SlotDraw, P):
    """Quantized interference estimates and residuals for one slot."""
    plan = quantization_plan(cfg, phase, d.t)
    exps = interference_exponents(cfg, phase, d.t)
    res = {}
    for key in ("i1", "i2"):
        user = 1 if key == "i1" else 2
        est = d.interference(user, delayed=True)
        true = d.interference(user, delayed=False)
        if key in plan and plan[key] > 0:
            q, r, ovf = quantize_interference(est, plan[key], P, exps[key])
        else:
            q, r, ovf = np.zeros_like(est), est, 0.0
        res[key] = {"true": true, "est": est, "q": q, "resid": r, "overflow": ovf}
    return res


def rate_prelog_mimo(cfg: SchemeConfig, phase: int, user: int, grid, trials: int,
                     seed: int, slots=None, M: int = 2) -> list[ExponentMeasurement]:
    """Sum prelog of a user's private streams via retrospective decoding.

    Builds the effective channel of the phase: the user's observation
    after common-stream removal and own-interference subtraction (with the
    quantization residual as noise) stacked with the quantized
    cross-interference observation delivered by the next phase.  The
    log-det Gaussian rate slope equals the sum of the stream prelogs.
    Only non-terminal phases decode retrospectively.
    """
    grid = _check_grid(grid)
    if cfg.phase_kind(phase) == "tail":
        raise MeasurementError(
            f"phase {phase} is terminal; no retrospective observation exists")
    slots = _slots(cfg, slots)
    own_keys = ("a", "ap") if user == 1 else ("b", "bp")
    probe = allocation(cfg, phase, 1)
    keys = [k for k in own_keys if k in probe.classes]

    acc: dict[int, list[float]] = {t: [] for t in slots}
    singular = 0
    for gi, P in enumerate(grid):
        rng = rng_for(seed, _TAG_MIMO, phase, user, gi)
        draws = _draw_phase(cfg, phase, P, trials, rng, M)
        for t in slots:
            d = draws[t - 1]
            pieces = _retro_pieces(cfg, phase, d, P)
            own = pieces["i1" if user == 1 else "i2"]
            cross = pieces["i2" if user == 1 else "i1"]
            z = d.z1 if user == 1 else d.z2
            n_obs = z + (own["true"] - own["q"])
            n_extra = -cross["resid"]
            if user == 1:
                h_obs = {"a": d.hu, "ap": d.hup}
                h_extra = {"a": d.dgu, "ap": d.dgup}
            else:
                h_obs = {"b": d.gv, "bp": d.gvp}
                h_extra = {"b": d.dhv, "bp": d.dhvp}
            qpow = np.array([P ** d.alloc.classes[k].power for k in keys])

            if len(keys) == 2:
                H = np.stack([
                    np.stack([h_obs[keys[0]], h_obs[keys[1]]], axis=-1),
                    np.stack([h_extra[keys[0]], h_extra[keys[1]]], axis=-1),
                ], axis=-2)  # (n, 2, 2), row 0 = observation, row 1 = extra
                detH = H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] * H[:, 1, 0]
                singular += int(np.sum(np.abs(detH) ** 2 < 1e-30))
                R = np.array([np.mean(np.abs(n_obs) ** 2), np.mean(np.abs(n_extra) ** 2)])
                W = H * np.sqrt(qpow)[None, None, :] / np.sqrt(R)[None, :, None]
                m00 = 1 + np.abs(W[:, 0, 0]) ** 2 + np.abs(W[:, 0, 1]) ** 2
                m11 = 1 + np.abs(W[:, 1, 0]) ** 2 + np.abs(W[:, 1, 1]) ** 2
                m01 = W[:, 0, 0] * W[:, 1, 0].conj() + W[:, 0, 1] * W[:, 1, 1].conj()
                mi = np.log2(np.maximum(m00 * m11 - np.abs(m01) ** 2, 1.0))
            else:
                R = np.mean(np.abs(n_obs) ** 2)
                mi = np.log2(1 + qpow[0] * np.abs(h_obs[keys[0]]) ** 2 / R)
            acc[t].append(float(np.mean(mi)))

    out = []
    for t in slots:
        al = allocation(cfg, phase, t)
        expect = sum(al.rate(k) for k in keys)
        out.append(_rate_measurement(
            _label(cfg, phase, f"t{t}/user{user}/private_retro"), expect, grid,
            acc[t], trials, extras={"near_singular": singular}))
    return out


def rate_prelog_private(cfg: SchemeConfig, phase: int, user: int, grid, trials: int,
                        seed: int, slots=None, M: int = 2) -> list[ExponentMeasurement]:
    """Direct SISO private rate after common removal (terminal phases, and
    any user with a single stream and bounded residual interference)."""
    grid = _check_grid(grid)
    slots = _slots(cfg, slots)
    key = "a" if user == 1 else "b"
    acc: dict[int, list[float]] = {t: [] for t in slots}
    for gi, P in enumerate(grid):
        rng = rng_for(seed, _TAG_PRIV, phase, user, gi)
        draws = _draw_phase(cfg, phase, P, trials, rng, M)
        for t in slots:
            d = draws[t - 1]
            if key not in d.alloc.classes:
                raise MeasurementError(f"user {user} has no direct stream in phase {phase}")
            other = d.interference(user, delayed=False)
            z = d.z1 if user == 1 else d.z2
            R = float(np.mean(np.abs(other + z) ** 2))
            sig = P ** d.alloc.classes[key].power * np.abs(d.dot(user, key)) ** 2
            acc[t].append(float(np.mean(np.log2(1 + sig / R))))
    out = []
    for t in slots:
        expect = allocation(cfg, phase, t).rate(key)
        out.append(_rate_measurement(
            _label(cfg, phase, f"t{t}/user{user}/private_direct"), expect, grid,
            acc[t], trials))
    return out


def quantizer_residuals(cfg: SchemeConfig, phase: int, grid, trials: int, seed: int,
                        slots=None, M: int = 2) -> list[ExponentMeasurement]:
    """Residual power slope (0 under matched feedback) and overflow fraction
    for every interference value the phase quantizes."""
    grid = _check_grid(grid)
    slots = _slots(cfg, slots)
    acc: dict[str, tuple[float, list[float], list[float]]] = {}
    for gi, P in enumerate(grid):
        rng = rng_for(seed, _TAG_QUANT, phase, gi)
        draws = _draw_phase(cfg, phase, P, trials, rng, M)
        for t in slots:
            d = draws[t - 1]
            plan = quantization_plan(cfg, phase, t)
            exps = interference_exponents(cfg, phase, t)
            for key, phi in plan.items():
                if phi <= 0:
                    continue
                user = 1 if key == "i1" else 2
                est = d.interference(user, delayed=True)
                _, resid, ovf = quantize_interference(est, phi, P, exps[key])
                label = _label(cfg, phase, f"t{t}/quant_{key}")
                if label not in acc:
                    acc[label] = (exps[key] - phi, [], [])
                acc[label][1].append(float(np.mean(np.abs(resid) ** 2)))
                acc[label][2].append(ovf)
    out = []
    for label, (expect, means, ovfs) in acc.items():
        out.append(_power_measurement(label, expect, grid, means, trials,
                                      extras={"overflow": tuple(ovfs)}))
    return out


def transmit_power(cfg: SchemeConfig, phase: int, grid, trials: int, seed: int,
                   slots=None, M: int = 2) -> list[ExponentMeasurement]:
    """Slope of the mean transmit power (must match the dominant class)."""
    grid = _check_grid(grid)
    slots = _slots(cfg, slots)
    acc: dict[int, list[float]] = {t: [] for t in slots}
    for gi, P in enumerate(grid):
        rng = rng_for(seed, _TAG_POWER, phase, gi)
        draws = _draw_phase(cfg, phase, P, trials, rng, M)
        for t in slots:
            acc[t].append(float(np.mean(draws[t - 1].xnorm2)))
    out = []
    for t in slots:
        al = allocation(cfg, phase, t)
        expect = max(cl.power for cl in al.classes.values())
        out.append(_power_measurement(
            _label(cfg, phase, f"t{t}/transmit_power"), expect, grid, acc[t], trials))
    return out


def orthogonality_defect(cfg: SchemeConfig, phase: int, P: float, trials: int,
                         seed: int, M: int = 2) -> float:
    """Largest |estimate^T precoder| over all slots/trials (0 up to rounding)."""
    rng = rng_for(seed, _TAG_POWER, phase, 999)
    draws = _draw_phase(cfg, phase, P, trials, rng, M)
    return max(d.ortho_defect for d in draws)


# ---------------------------------------------------------------------------
# full-scheme verification driver


def representative_phases(cfg: SchemeConfig) -> list[int]:
    """First phase of each distinct table row (head/mid/tail or main/tail)."""
    seen: dict[str, int] = {}
    for s in range(1, cfg.S + 1):
        seen.setdefault(cfg.phase_kind(s), s)
    return sorted(seen.values())


def verify_scheme(cfg: SchemeConfig, grid, trials: int, seed: int,
                  M: int = 2) -> list[ExponentMeasurement]:
    """Run every exponent/rate/quantizer contract of a scheme.

    One representative phase per table row; each measurement carries its
    declared expectation, so callers just check ``passes()``.
    """
    grid = _check_grid(grid)
    out: list[ExponentMeasurement] = []
    for phase in representative_phases(cfg):
        kind = cfg.phase_kind(phase)
        out += term_exponents(cfg, phase, grid, trials, seed, M=M)
        if "c" in allocation(cfg, phase, 1).classes:
            out += rate_prelog_common(cfg, phase, grid, trials, seed, M=M)
        out += transmit_power(cfg, phase, grid, trials, seed, M=M)
        if kind == "tail":
            for user in (1, 2):
                out += rate_prelog_private(cfg, phase, user, grid, trials, seed, M=M)
        else:
            for user in (1, 2):
                out += rate_prelog_mimo(cfg, phase, user, grid, trials, seed, M=M)
            out += quantizer_residuals(cfg, phase, grid, trials, seed, M=M)
    return out
