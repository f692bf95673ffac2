"""Redundancy versions built from XOR-translates of one symmetric subset code.

Every RV is decoded against the same mother frozen set. Receptions are combined
by adding LLRs in mother-code coordinates, so two disjoint RVs covering all
``N`` positions give exactly the frame of an unpunctured transmission.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .construction import puncture_symmetric
from .decoder import DecodeResult, LlrFrame, scl_decode
from .polar_core import MotherCode, PolarDomainError, PuncturePattern, SubsetCode, xor_translate


@dataclass(frozen=True)
class RvPlan:
    base: SubsetCode
    offsets: tuple[int, ...]
    pattern: PuncturePattern | None = None

    def __post_init__(self):
        if not self.offsets or self.offsets[0] != 1:
            raise PolarDomainError("the first offset must be 1 so that RV 0 is the base code")
        N = self.base.mother.N
        for x in self.offsets:
            if not 1 <= x <= N:
                raise PolarDomainError(f"offset {x} outside [1, {N}]")

    @property
    def mother(self) -> MotherCode:
        return self.base.mother

    @property
    def num_rvs(self) -> int:
        return len(self.offsets)

    def kept(self, rv: int) -> frozenset[int]:
        self._check_rv(rv)
        return xor_translate(self.base.kept, self.offsets[rv], self.mother.N)

    def kept_positions(self, rv: int) -> np.ndarray:
        """0-based kept positions of ``rv`` in increasing order."""
        return np.array(sorted(self.kept(rv)), dtype=np.int64) - 1

    def _check_rv(self, rv: int) -> None:
        if not 0 <= rv < len(self.offsets):
            raise PolarDomainError(f"RV index {rv} outside [0, {len(self.offsets)})")


def make_rv_plan(mother: MotherCode, M: int, x: int, extra_offsets: Sequence[int] = ()) -> RvPlan:
    """Symmetric greedy base code plus RVs at offsets ``[1, x, *extra_offsets]``.

    For extra RVs built from ``y`` pass ``[y, xor_offset(x, y)]``.
    """
    pattern = puncture_symmetric(mother, M, x)
    plan = RvPlan(pattern.subset_code(), (1, int(x), *(int(y) for y in extra_offsets)), pattern)
    for k in range(plan.num_rvs):
        if len(plan.kept(k)) != M:
            raise AssertionError("RV kept-set lost cardinality")
    return plan


def xor_offset(x: int, y: int) -> int:
    """The single offset equivalent to translating by ``x`` and then by ``y``."""
    return ((x - 1) ^ (y - 1)) + 1


def rv_transmit_bits(codeword: np.ndarray, plan: RvPlan, rv: int) -> np.ndarray:
    """Mother-codeword bits at the kept positions of ``rv``, by increasing index."""
    codeword = np.asarray(codeword, dtype=np.uint8)
    if codeword.shape != (plan.mother.N,):
        raise PolarDomainError(f"codeword length {codeword.shape} != N = {plan.mother.N}")
    return codeword[plan.kept_positions(rv)]


class HarqState(enum.Enum):
    IDLE = "idle"
    WAITING = "waiting"
    DECODED = "decoded"
    EXHAUSTED = "exhausted"


@dataclass
class HarqSession:
    """Combining buffer and bookkeeping for one H-ARQ process."""

    N: int
    max_attempts: int = 4
    values: np.ndarray = field(default=None)
    covered: np.ndarray = field(default=None)
    rvs_received: list[int] = field(default_factory=list)
    decode_attempts: int = 0
    state: HarqState = HarqState.IDLE
    trace: list[str] = field(default_factory=list)
    last_snr_db: float = float("nan")

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros(self.N)
        if self.covered is None:
            self.covered = np.zeros(self.N, dtype=np.bool_)

    @property
    def frame(self) -> LlrFrame:
        return LlrFrame(self.values.copy(), self.covered.copy())


def accumulate_rv(session: HarqSession, rv: int, llrs: np.ndarray, plan: RvPlan,
                  snr_db: float = float("nan")) -> HarqSession:
    """Add the ``M`` received LLRs of ``rv`` into the combining buffer.

    Repeated receptions of a position add up.
    """
    if session.state in (HarqState.DECODED, HarqState.EXHAUSTED):
        raise PolarDomainError(f"session is {session.state.value}; no further RVs accepted")
    pos = plan.kept_positions(rv)
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != pos.shape:
        raise PolarDomainError(f"expected {pos.size} LLRs for RV {rv}, got {llrs.shape}")
    session.values[pos] += llrs
    session.covered[pos] = True
    session.rvs_received.append(rv)
    session.last_snr_db = snr_db
    session.state = HarqState.WAITING
    return session


def harq_try_decode(session: HarqSession, mother: MotherCode, L: int = 32,
                    llr_clip: float | None = None) -> DecodeResult:
    """Decode the combined buffer and advance the session state."""
    if session.state is HarqState.DECODED:
        raise PolarDomainError("session already decoded")
    res = scl_decode(session.values, mother, L, llr_clip)
    session.decode_attempts += 1
    if res.crc_ok:
        session.state = HarqState.DECODED
    elif session.decode_attempts >= session.max_attempts:
        session.state = HarqState.EXHAUSTED
    else:
        session.state = HarqState.WAITING
    rv = session.rvs_received[-1] if session.rvs_received else -1
    session.trace.append(
        f"{rv} {session.last_snr_db:.2f} {session.decode_attempts} {int(res.crc_ok)} {res.chosen_path_metric:.6g}"
    )
    return res
