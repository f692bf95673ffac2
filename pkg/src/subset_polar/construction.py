"""BEC density evolution, union-bound BLER estimates and puncturing constructions.

A punctured coded bit is modelled as a leaf channel that always erases, so every
quantity here is an exact BEC erasure probability. The stage ordering follows the
natural-order transform in :mod:`subset_polar.polar_core`: the first stage pairs
leaf ``j`` with leaf ``j + N/2`` and the bit-channel index bits line up with the
leaf index bits.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numba
import numpy as np

from .polar_core import (
    MotherCode,
    PolarDomainError,
    PuncturePattern,
    log2_exact,
    xor_translate,
)

log = logging.getLogger(__name__)

EPS_STEP = 0.001
EPS_FLOOR = EPS_STEP
TIE_RTOL = 1e-12  # scores this close count as equal; the lower index then wins


@dataclass(frozen=True)
class ZProfile:
    z: np.ndarray
    eps: float
    pattern: tuple[int, ...]


@dataclass(frozen=True)
class BlerEstimate:
    value: float
    eps: float
    pattern: tuple[int, ...]


class EpsUpdate(NamedTuple):
    eps: float
    saturated: bool


# ---------------------------------------------------------------- kernels


@numba.njit(cache=True, inline="always")
def _minus(a, b):
    # an erased input erases the combination exactly; (1 + b) - b can miss 1.0
    if a == 1.0 or b == 1.0:
        return 1.0
    return a + b - a * b


@numba.njit(cache=True)
def _evolve_inplace(z):
    N = z.shape[0]
    h = N >> 1
    while h >= 1:
        for blk in range(0, N, 2 * h):
            for j in range(blk, blk + h):
                a = z[j]
                b = z[j + h]
                z[j] = _minus(a, b)
                z[j + h] = a * b
        h >>= 1


@numba.njit(cache=True)
def _evolve_levels(leaf):
    """All intermediate stage vectors; row s is the state after s stages."""
    N = leaf.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    levels = np.empty((n + 1, N))
    levels[0, :] = leaf
    for s in range(n):
        h = N >> (s + 1)
        src = levels[s]
        dst = levels[s + 1]
        for blk in range(0, N, 2 * h):
            for j in range(blk, blk + h):
                a = src[j]
                b = src[j + h]
                dst[j] = _minus(a, b)
                dst[j + h] = a * b
    return levels


@numba.njit(cache=True)
def _info_sum(z, info_pos):
    total = 0.0
    for i in info_pos:
        total += z[i]
    return total


@numba.njit(cache=True)
def _leaf_vector(N, eps, punct_pos):
    leaf = np.full(N, eps)
    for p in punct_pos:
        leaf[p] = 1.0
    return leaf


@numba.njit(cache=True)
def _score_candidates(levels, info_pos, allowed):
    """Union bound after additionally erasing leaf ``l``, for every allowed ``l``.

    Only the positions reachable from leaf ``l`` are recomputed (their count
    doubles per stage); the final profile is scattered back so the sum runs in
    index order and matches a full re-evolution bit for bit.
    """
    n = levels.shape[0] - 1
    N = levels.shape[1]
    out = np.full(N, np.inf)
    pos = np.empty(N, dtype=np.int64)
    val = np.empty(N)
    npos = np.empty(N, dtype=np.int64)
    nval = np.empty(N)
    z = np.empty(N)
    for l in range(N):
        if not allowed[l]:
            continue
        pos[0] = l
        val[0] = 1.0
        cnt = 1
        for s in range(n):
            h = N >> (s + 1)
            base = levels[s]
            c2 = 0
            for k in range(cnt):
                p = pos[k]
                q = p ^ h
                if p & h:
                    a = base[q]
                    b = val[k]
                    lo = q
                    hi = p
                else:
                    a = val[k]
                    b = base[q]
                    lo = p
                    hi = q
                npos[c2] = lo
                nval[c2] = _minus(a, b)
                npos[c2 + 1] = hi
                nval[c2 + 1] = a * b
                c2 += 2
            cnt = c2
            for k in range(cnt):
                pos[k] = npos[k]
                val[k] = nval[k]
        for k in range(cnt):
            z[pos[k]] = val[k]
        out[l] = _info_sum(z, info_pos)
    return out


# ---------------------------------------------------------------- public API


def _pattern_positions(pattern, N: int) -> tuple[tuple[int, ...], np.ndarray]:
    if pattern is None:
        idx: tuple[int, ...] = ()
    elif isinstance(pattern, PuncturePattern):
        idx = pattern.indices
    else:
        idx = tuple(int(i) for i in pattern)
    for i in idx:
        if not 1 <= i <= N:
            raise PolarDomainError(f"pattern index {i} outside [1, {N}]")
    return idx, np.array(idx, dtype=np.int64) - 1


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise PolarDomainError(f"eps must lie in [0, 1], got {eps}")
    return eps


def bec_evolve(eps: float, N: int, pattern: PuncturePattern | Iterable[int] | None = None) -> ZProfile:
    """Per-bit-channel erasure probabilities with punctured leaves always erased."""
    eps = _check_eps(eps)
    log2_exact(N)
    idx, pos = _pattern_positions(pattern, N)
    z = _leaf_vector(N, eps, pos)
    _evolve_inplace(z)
    return ZProfile(z=z, eps=eps, pattern=idx)


def estimate_bler(pattern: PuncturePattern | Iterable[int] | None, eps: float, mother: MotherCode) -> BlerEstimate:
    """Union bound: sum of the non-frozen bit-channel erasure probabilities."""
    prof = bec_evolve(eps, mother.N, pattern)
    return BlerEstimate(_info_sum(prof.z, mother.info_positions), prof.eps, prof.pattern)


def _bound(punct_pos: np.ndarray, eps: float, mother: MotherCode) -> float:
    z = _leaf_vector(mother.N, eps, punct_pos)
    _evolve_inplace(z)
    return _info_sum(z, mother.info_positions)


def design_mother(n: int, K: int, crc_len: int, eps: float) -> MotherCode:
    """Mother code whose non-frozen set is the ``K + crc_len`` smallest erasure probabilities.

    Ties go to the lower index.
    """
    if n < 1:
        raise PolarDomainError("n must be >= 1")
    N = 1 << n
    if K < 0 or K + crc_len >= N:
        raise PolarDomainError(f"need 0 <= K and K + crc_len < N, got K={K}, crc_len={crc_len}, N={N}")
    if not 0.0 < eps < 1.0:
        raise PolarDomainError("design eps must lie in (0, 1)")
    z = bec_evolve(eps, N).z
    order = np.lexsort((np.arange(N), z))
    chosen = np.sort(order[: K + crc_len]) + 1
    return MotherCode(n=n, K=K, crc_len=crc_len, non_frozen=tuple(int(i) for i in chosen), design_eps=float(eps))


def _update_eps(punct_pos: np.ndarray, eps: float, e_target: float, mother: MotherCode) -> EpsUpdate:
    k = 0
    cur = eps
    e_o = _bound(punct_pos, cur, mother)
    while e_o > e_target:
        nxt = round(eps - (k + 1) * EPS_STEP, 12)
        if nxt < EPS_FLOOR:
            return EpsUpdate(cur, True)
        k += 1
        cur = nxt
        e_o = _bound(punct_pos, cur, mother)
    return EpsUpdate(cur, False)


def update_eps(pattern: PuncturePattern | Iterable[int] | None, eps: float, e_target: float, mother: MotherCode) -> EpsUpdate:
    """Lower ``eps`` in steps of 0.001 until the union bound is at most ``e_target``.

    Stops at the floor 0.001 and reports ``saturated=True`` if the target is
    still not met there.
    """
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise PolarDomainError(f"eps must lie in (0, 1], got {eps}")
    _, pos = _pattern_positions(pattern, mother.N)
    return _update_eps(pos, eps, float(e_target), mother)


def _greedy(mother: MotherCode, M: int, *, adaptive: bool, offset: int | None = None,
            eps: float | None = None) -> PuncturePattern:
    N = mother.N
    if not mother.info_len <= M <= N:
        raise PolarDomainError(f"M must lie in [{mother.info_len}, {N}], got {M}")
    eps0 = mother.design_eps if eps is None else _check_eps(eps)
    cur = eps0
    info = mother.info_positions
    e_target = _bound(np.zeros(0, dtype=np.int64), cur, mother)
    allowed = np.ones(N, dtype=np.bool_)
    punct: list[int] = []
    saturated = False
    off = None if offset is None else offset - 1
    for step in range(N - M):
        pos = np.array(punct, dtype=np.int64)
        levels = _evolve_levels(_leaf_vector(N, cur, pos))
        scores = _score_candidates(levels, info, allowed)
        best = scores.min()
        if not np.isfinite(best):
            raise PolarDomainError("no admissible candidate left to puncture")
        l = int(np.flatnonzero(scores <= best + TIE_RTOL * abs(best))[0])
        punct.append(l)
        allowed[l] = False
        if off is not None:
            allowed[l ^ off] = False
        if adaptive:
            cur, sat = _update_eps(np.array(punct, dtype=np.int64), cur, e_target, mother)
            saturated |= sat
        log.debug("step %d: punctured %d, eps=%.3f", step, l + 1, cur)
    return PuncturePattern(tuple(p + 1 for p in punct), mother, eps_initial=eps0,
                           eps_final=cur, saturated=saturated)


def puncture_greedy(mother: MotherCode, M: int, target_bler_mode: bool = True) -> PuncturePattern:
    """Greedy puncturing that keeps the union bound at its starting value by lowering eps.

    With ``target_bler_mode=False`` eps is held at the design value.
    """
    return _greedy(mother, M, adaptive=target_bler_mode)


def puncture_fixed_eps(mother: MotherCode, M: int, eps: float | None = None) -> PuncturePattern:
    """Greedy puncturing at a constant eps (the design eps unless given)."""
    return _greedy(mother, M, adaptive=False, eps=eps)


def puncture_symmetric(mother: MotherCode, M: int, x: int) -> PuncturePattern:
    """Adaptive greedy puncturing that never picks an index of ``P`` translated by ``x``.

    The pattern and its translate stay disjoint, so for ``M = N/2`` the two
    subset codes partition the coded bits.
    """
    N = mother.N
    if not 1 <= x <= N:
        raise PolarDomainError(f"offset {x} outside [1, {N}]")
    if x == 1:
        raise PolarDomainError("offset 1 is the identity; the symmetric constraint would be void")
    if 2 * M < N:
        raise PolarDomainError(f"M = {M} < N/2: pattern and translate cannot be disjoint")
    return _greedy(mother, M, adaptive=True, offset=x)


def puncture_frozen_based(mother: MotherCode, M: int) -> PuncturePattern:
    """Baseline that zeroes the capacity of the weakest frozen bit-channels.

    Targets are taken in decreasing erasure probability, restricted so that the
    target set stays closed under clearing index bits. For such a set, erasing
    the coded bits with the same indices erases exactly those bit-channels in
    the natural-order transform; the postcondition is re-checked by density
    evolution.
    """
    N = mother.N
    count = N - M
    if M > N or count < 0:
        raise PolarDomainError(f"M must lie in [0, {N}], got {M}")
    frozen = mother.frozen_mask
    if count > int(frozen.sum()):
        raise PolarDomainError(f"cannot puncture {count} bits with only {int(frozen.sum())} frozen channels")
    z = bec_evolve(mother.design_eps, N).z
    order = np.lexsort((np.arange(N), -z))
    chosen = np.zeros(N, dtype=np.bool_)
    targets: list[int] = []
    while len(targets) < count:
        for i in order:
            if chosen[i] or not frozen[i]:
                continue
            if all(chosen[i & ~(1 << b)] for b in range(mother.n) if i >> b & 1):
                chosen[i] = True
                targets.append(int(i))
                break
        else:
            raise PolarDomainError("ran out of frozen channels closed under bit clearing")
    pattern = PuncturePattern(tuple(t + 1 for t in targets), mother,
                              eps_initial=mother.design_eps, eps_final=mother.design_eps)
    zp = bec_evolve(mother.design_eps, N, pattern).z
    if targets and not np.all(zp[targets] == 1.0):
        raise AssertionError("frozen-based puncturing failed to erase its target channels")
    return pattern


def check_symmetric_prefixes(pattern: PuncturePattern, x: int) -> bool:
    """True if every prefix of ``pattern`` is disjoint from its translate by ``x``."""
    seen: set[int] = set()
    shifted: set[int] = set()
    N = pattern.mother.N
    for p in pattern.indices:
        q = next(iter(xor_translate({p}, x, N)))
        seen.add(p)
        shifted.add(q)
        if seen & shifted:
            return False
    return True


ALGORITHMS = ("greedy", "symmetric", "fixed_eps", "frozen")


def build_pattern(mother: MotherCode, M: int, algorithm: str = "greedy", x: int | None = None) -> PuncturePattern:
    """Dispatch to one of the puncturing constructions by name."""
    if algorithm == "greedy":
        return puncture_greedy(mother, M)
    if algorithm == "symmetric":
        return puncture_symmetric(mother, M, mother.N if x is None else x)
    if algorithm == "fixed_eps":
        return puncture_fixed_eps(mother, M)
    if algorithm == "frozen":
        return puncture_frozen_based(mother, M)
    raise PolarDomainError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
