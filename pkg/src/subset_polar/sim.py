"""BI-AWGN Monte Carlo BLER estimation.

Every trial draws from its own generator keyed by ``(seed, arm, point, trial)``,
so a trial's payload and noise never depend on batch size, thread count or the
other trials. Noise is drawn in mother-code coordinates: the ``r``-th time a
coded position is sent within a trial it receives row ``r`` of the trial's
noise. Two disjoint transmissions therefore see exactly the noise a single
full-length transmission would see.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .decoder import scl_decode_batch
from .polar_core import MotherCode, PolarDomainError, _transform_inplace, assemble_message

if TYPE_CHECKING:
    from .harq import RvPlan

log = logging.getLogger(__name__)

Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class ChannelConfig:
    """BPSK over AWGN at a given Eb/N0, with ``rate`` payload bits per channel use."""

    ebn0_db: float
    rate: float
    seed: int = 0

    def __post_init__(self):
        if self.rate <= 0:
            raise PolarDomainError("rate must be positive")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))


@dataclass(frozen=True)
class TrialPolicy:
    min_trials: int = 0
    min_errors: int = 100
    max_trials: int = 10**6

    def done(self, trials: int, errors: int) -> bool:
        if trials >= self.max_trials:
            return True
        return trials >= self.min_trials and errors >= self.min_errors


@dataclass(frozen=True)
class DecoderConfig:
    L: int = 32
    llr_clip: float | None = None


@dataclass(frozen=True)
class BlerPoint:
    ebn0_db: float
    trials: int
    errors: int
    bler: float
    ci95_low: float
    ci95_high: float
    undetected: int = 0


@dataclass(frozen=True)
class CodeSetup:
    """What is sent per trial: one or more transmissions of mother-code positions.

    ``transmissions`` holds 0-based kept positions; all transmissions of a
    trial are combined by LLR addition before a single decode.
    """

    mother: MotherCode
    transmissions: tuple[np.ndarray, ...]
    label: str = "code"
    arm: int = 0

    def __post_init__(self):
        if not self.transmissions:
            raise PolarDomainError("at least one transmission is required")
        tx = tuple(np.asarray(t, dtype=np.int64) for t in self.transmissions)
        for t in tx:
            if t.size and (t.min() < 0 or t.max() >= self.mother.N or np.unique(t).size != t.size):
                raise PolarDomainError("transmission positions must be distinct and within [0, N)")
        object.__setattr__(self, "transmissions", tx)

    @classmethod
    def mother_code(cls, mother: MotherCode, label: str = "mother", arm: int = 0) -> "CodeSetup":
        return cls(mother, (np.arange(mother.N),), label, arm)

    @classmethod
    def subset(cls, mother: MotherCode, kept_positions: np.ndarray, label: str = "subset", arm: int = 0) -> "CodeSetup":
        return cls(mother, (np.asarray(kept_positions),), label, arm)

    @property
    def bits_sent(self) -> int:
        return int(sum(t.size for t in self.transmissions))

    @property
    def rate(self) -> float:
        return self.mother.K / self.bits_sent


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


def make_point(ebn0_db: float, trials: int, errors: int, undetected: int = 0) -> BlerPoint:
    lo, hi = wilson_interval(errors, trials)
    return BlerPoint(ebn0_db, trials, errors, errors / trials if trials else 0.0, lo, hi, undetected)


def awgn_llr(bits: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """BPSK-modulate ``bits`` (0 -> +1), add noise, return ``2 y / sigma2``."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    sym = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    sigma2 = cfg.sigma2
    y = sym + math.sqrt(sigma2) * rng.standard_normal(sym.shape)
    return 2.0 * y / sigma2


def trial_rng(seed: int, arm: int, point: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, arm, point, trial])))


def _simulate_trials(code: CodeSetup, sigma2: float, seed: int, point: int, start: int, count: int):
    """Payloads and combined LLR frames for trials ``start .. start+count-1``."""
    m = code.mother
    N = m.N
    payloads = np.empty((count, m.K), dtype=np.uint8)
    frames = np.zeros((count, N))
    scale = math.sqrt(sigma2)
    for r in range(count):
        rng = trial_rng(seed, code.arm, point, start + r)
        payload = rng.integers(0, 2, m.K, dtype=np.uint8)
        x = assemble_message(payload, m)
        _transform_inplace(x)
        sym = 1.0 - 2.0 * x
        uses = np.zeros(N, dtype=np.int64)
        noise: list[np.ndarray] = []
        for pos in code.transmissions:
            level = uses[pos]
            while len(noise) <= level.max(initial=0):
                noise.append(rng.standard_normal(N))
            z = np.stack(noise)[level, pos] if len(noise) > 1 else noise[0][pos]
            frames[r, pos] += 2.0 * (sym[pos] + scale * z) / sigma2
            uses[pos] += 1
        payloads[r] = payload
    return payloads, frames


def _decode_chunk(code: CodeSetup, dec: DecoderConfig, sigma2: float, seed: int, point: int,
                  start: int, count: int):
    payloads, frames = _simulate_trials(code, sigma2, seed, point, start, count)
    res = scl_decode_batch(frames, code.mother, dec.L, dec.llr_clip)
    match = np.all(res.payload == payloads, axis=1)
    err = ~(match & res.crc_ok)
    undetected = res.crc_ok & ~match
    return err, undetected


def simulate_point(code: CodeSetup, dec: DecoderConfig, ebn0_db: float, policy: TrialPolicy,
                   seed: int, point: int = 0, batch: int = 256, threads: int = 1) -> BlerPoint:
    """Run trials in index order until ``policy`` is satisfied."""
    sigma2 = ChannelConfig(ebn0_db, code.rate).sigma2
    trials = errors = undetected = 0
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while not policy.done(trials, errors):
            starts = [trials + k * batch for k in range(max(threads, 1))]
            starts = [s for s in starts if s < policy.max_trials]
            counts = [min(batch, policy.max_trials - s) for s in starts]
            if pool is None:
                chunks = [_decode_chunk(code, dec, sigma2, seed, point, s, c) for s, c in zip(starts, counts)]
            else:
                chunks = list(pool.map(lambda sc: _decode_chunk(code, dec, sigma2, seed, point, *sc),
                                       zip(starts, counts)))
            for err, und in chunks:
                for e, u in zip(err, und):
                    trials += 1
                    errors += int(e)
                    undetected += int(u)
                    if policy.done(trials, errors):
                        break
                if policy.done(trials, errors):
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    log.info("%s @ %.2f dB: %d/%d errors", code.label, ebn0_db, errors, trials)
    return make_point(ebn0_db, trials, errors, undetected)


def run_bler(code: CodeSetup, dec: DecoderConfig, sweep: Sequence[float], policy: TrialPolicy,
             seed: int = 0, threads: int = 1) -> list[BlerPoint]:
    """One :class:`BlerPoint` per Eb/N0 value; point ``k`` uses substreams keyed by ``k``."""
    return [simulate_point(code, dec, float(snr), policy, seed, k, threads=threads)
            for k, snr in enumerate(sweep)]


def snr_at_bler(points: Sequence[BlerPoint], target: float = 1e-2) -> float:
    """Eb/N0 where the curve crosses ``target``, interpolating log10(BLER) linearly.

    Returns NaN when the points do not bracket the target.
    """
    pts = sorted((p for p in points if p.errors > 0), key=lambda p: p.ebn0_db)
    lt = math.log10(target)
    for a, b in zip(pts, pts[1:]):
        la, lb = math.log10(a.bler), math.log10(b.bler)
        if la >= lt >= lb and la != lb:
            return a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db)
    return float("nan")


def intervals_overlap(a: BlerPoint, b: BlerPoint) -> bool:
    return a.ci95_low <= b.ci95_high and b.ci95_low <= a.ci95_high


HARQ_ARMS = {"joint": 0, "mother": 0, "rv0": 1, "rv1": 2}


def harq_setups(plan: "RvPlan") -> dict[str, CodeSetup]:
    """The curves of the two-RV experiment; ``joint`` and ``mother`` share noise."""
    m = plan.mother
    rv0, rv1 = plan.kept_positions(0), plan.kept_positions(1)
    return {
        "rv0": CodeSetup.subset(m, rv0, "rv0", HARQ_ARMS["rv0"]),
        "rv1": CodeSetup.subset(m, rv1, "rv1", HARQ_ARMS["rv1"]),
        "joint": CodeSetup(m, (rv0, rv1), "joint", HARQ_ARMS["joint"]),
        "mother": CodeSetup.mother_code(m, "mother", HARQ_ARMS["mother"]),
    }


def run_harq_experiment(plan: "RvPlan", sweep: Sequence[float], policy: TrialPolicy,
                        dec: DecoderConfig = DecoderConfig(), seed: int = 0,
                        include_mother: bool = True, threads: int = 1) -> dict[str, list[BlerPoint]]:
    """BLER of RV 0 alone, RV 1 alone and both combined (plus the mother code).

    Each RV's Eb/N0 counts only its own bits; the joint curve counts both
    transmissions, which puts it on the same axis as the mother code.
    """
    curves = {}
    for name, code in harq_setups(plan).items():
        if name == "mother" and not include_mother:
            continue
        curves[name] = run_bler(code, dec, sweep, policy, seed, threads)
    return curves


@dataclass(frozen=True)
class SessionStats:
    ebn0_db: float
    sessions: int
    decoded_after: tuple[int, ...]  # count of sessions decoded after k+1 transmissions
    failed: int
    trace: tuple[str, ...]


def simulate_harq_sessions(plan: "RvPlan", ebn0_db: float, sessions: int, dec: DecoderConfig = DecoderConfig(),
                           seed: int = 0, point: int = 0, max_attempts: int | None = None) -> SessionStats:
    """Ideal ACK/NACK operation: send RVs in plan order until the CRC passes."""
    from .harq import HarqSession, HarqState, accumulate_rv, harq_try_decode

    m = plan.mother
    attempts = plan.num_rvs if max_attempts is None else max_attempts
    M = plan.base.M
    sigma2 = ChannelConfig(ebn0_db, m.K / M).sigma2
    scale = math.sqrt(sigma2)
    decoded_after = [0] * attempts
    failed = 0
    trace: list[str] = []
    for t in range(sessions):
        rng = trial_rng(seed, 3, point, t)
        payload = rng.integers(0, 2, m.K, dtype=np.uint8)
        x = assemble_message(payload, m)
        _transform_inplace(x)
        sym = 1.0 - 2.0 * x
        uses = np.zeros(m.N, dtype=np.int64)
        noise: list[np.ndarray] = []
        s = HarqSession(m.N, max_attempts=attempts)
        for k in range(attempts):
            rv = k % plan.num_rvs
            pos = plan.kept_positions(rv)
            level = uses[pos]
            while len(noise) <= level.max(initial=0):
                noise.append(rng.standard_normal(m.N))
            z = np.stack(noise)[level, pos]
            uses[pos] += 1
            accumulate_rv(s, rv, 2.0 * (sym[pos] + scale * z) / sigma2, plan, ebn0_db)
            res = harq_try_decode(s, m, dec.L, dec.llr_clip)
            if s.state is HarqState.DECODED and np.array_equal(res.payload, payload):
                decoded_after[k] += 1
                break
            if s.state is not HarqState.WAITING:
                failed += 1
                break
        trace.extend(s.trace)
    return SessionStats(ebn0_db, sessions, tuple(decoded_after), failed, tuple(trace))
