"""CRC-aided successive-cancellation list decoding with min-sum updates.

LLRs follow ``log P(y|0) / P(y|1)``, so a positive value favours bit 0. A
punctured or unobserved coded bit enters as LLR 0. The per-frame kernel keeps,
for every path, one LLR buffer and one partial-sum buffer per tree stage
(stage ``s`` occupies ``[2**s, 2**(s+1))``); on a fork only the stages that
will be read again are copied.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import math

import numba
import numpy as np

from .polar_core import CRC_SPECS, MotherCode, PolarDomainError, _crc_register


@dataclass(frozen=True)
class LlrFrame:
    """Soft values in mother-code coordinates; uncovered positions hold 0.0."""

    values: np.ndarray
    covered: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        cov = np.ones(v.shape, dtype=np.bool_) if self.covered is None else np.asarray(self.covered, dtype=np.bool_)
        if cov.shape != v.shape or v.ndim != 1:
            raise PolarDomainError("values and covered must be 1-D and of equal length")
        if np.any(v[~cov] != 0.0):
            raise PolarDomainError("uncovered positions must carry LLR 0")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "covered", cov)

    @classmethod
    def empty(cls, N: int) -> "LlrFrame":
        return cls(np.zeros(N), np.zeros(N, dtype=np.bool_))

    @classmethod
    def from_positions(cls, N: int, positions: np.ndarray, llrs: np.ndarray) -> "LlrFrame":
        """Scatter ``llrs`` onto 0-based ``positions`` of an otherwise empty frame."""
        v = np.zeros(N)
        cov = np.zeros(N, dtype=np.bool_)
        v[positions] = llrs
        cov[positions] = True
        return cls(v, cov)


@dataclass(frozen=True)
class DecodeResult:
    payload: np.ndarray
    crc_ok: bool
    chosen_path_metric: float
    list_size_used: int


@dataclass(frozen=True)
class BatchDecode:
    payload: np.ndarray  # (frames, K) uint8
    crc_ok: np.ndarray
    metric: np.ndarray
    list_size_used: np.ndarray


# ---------------------------------------------------------------- update rules


@numba.njit(cache=True)
def f_check(a, b):
    """Min-sum check-node update; an LLR of exactly 0 counts as positive."""
    # branch-free: the sign of a*b survives underflow as a signed zero
    return math.copysign(min(abs(a), abs(b)), a * b)


@numba.njit(cache=True)
def g_check(a, b, u):
    return b + (1 - 2 * u) * a


@numba.njit(cache=True)
def hard_decision(llr):
    return 0 if llr >= 0.0 else 1


@numba.njit(cache=True)
def path_metric_update(pm, llr, u):
    """Add ``|llr|`` when ``u`` disagrees with the hard decision."""
    if u != hard_decision(llr):
        return pm + abs(llr)
    return pm


# ---------------------------------------------------------------- kernel


@numba.njit(cache=True)
def _descend(alpha, beta, chan, p, i, n, clip):
    """Leaf LLR of bit ``i`` on path slot ``p``, recomputing only the stages that changed."""
    # plain index arithmetic: array views cost a refcount round trip per leaf
    if i == 0:
        top = n
    else:
        t = 0
        while not (i >> t) & 1:
            t += 1
        h = 1 << t
        if t + 1 == n:
            for j in range(h):
                alpha[p, h + j] = g_check(chan[j], chan[j + h], beta[p, h + j])
        else:
            for j in range(h):
                alpha[p, h + j] = g_check(alpha[p, 2 * h + j], alpha[p, 3 * h + j], beta[p, h + j])
        if clip > 0.0:
            for j in range(h, 2 * h):
                alpha[p, j] = min(max(alpha[p, j], -clip), clip)
        top = t
    if top == n:
        h = 1 << (n - 1)
        for j in range(h):
            alpha[p, h + j] = f_check(chan[j], chan[j + h])
        top -= 1
    for s in range(top, 0, -1):
        h = 1 << (s - 1)
        for j in range(h):
            alpha[p, h + j] = f_check(alpha[p, 2 * h + j], alpha[p, 3 * h + j])
    return alpha[p, 1]


@numba.njit(cache=True)
def _propagate(beta, bit, p, i, n, c):
    """Fold the decision for bit ``i`` into the stored partial sums of slot ``p``."""
    c[0] = bit
    ln = 1
    for s in range(n):
        off = 1 << s
        if not (i >> s) & 1:
            for j in range(ln):
                beta[p, off + j] = c[j]
            return
        for j in range(ln):
            c[ln + j] = c[j]
            c[j] ^= beta[p, off + j]
        ln *= 2


@numba.njit(cache=True)
def _fork_copy(alpha, beta, src, dst, i, n):
    for s in range(1, n):
        if not (i >> (s - 1)) & 1:
            for j in range(1 << s, 1 << (s + 1)):
                alpha[dst, j] = alpha[src, j]
    for s in range(n):
        if (i >> s) & 1:
            for j in range(1 << s, 1 << (s + 1)):
                beta[dst, j] = beta[src, j]


@numba.njit(cache=True)
def _traceback(hist_bit, hist_par, steps, q, out):
    for j in range(steps - 1, -1, -1):
        out[j] = hist_bit[j, q]
        q = hist_par[j, q]


@numba.njit(cache=True)
def _crc_ok(bits, K, crc_len, poly, init):
    if crc_len == 0:
        return True
    rem = _crc_register(bits[:K], poly, init, crc_len)
    for j in range(crc_len):
        if rem[j] != bits[K + j]:
            return False
    return True


@numba.njit(cache=True)
def _scl_frame(chan, frozen, L, clip, info_pos, K, crc_len, poly, init,
               alpha, beta, ucur, hist_bit, hist_par, pm, work_i, work_f, c, c2, bits, out_payload):
    N = chan.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    active = work_i[0]  # slots in lexicographic order of history
    nxt = work_i[1]
    kids = work_i[2]
    free_slots = work_i[3]
    order = work_i[4]
    sel = work_i[5]
    cm = work_f[0]
    lam = work_f[1]
    newm = work_f[2]
    P = 1
    active[0] = 0
    pm[0] = 0.0
    ji = 0
    for i in range(N):
        for k in range(P):
            p = active[k]
            lam[p] = _descend(alpha, beta, chan, p, i, n, clip)
        if frozen[i]:
            for k in range(P):
                p = active[k]
                ucur[p] = 0
                pm[p] = path_metric_update(pm[p], lam[p], 0)
        else:
            nc = 2 * P
            for k in range(P):
                p = active[k]
                for b in range(2):
                    cm[2 * k + b] = path_metric_update(pm[p], lam[p], b)
            # candidate q = 2 * rank + bit is already in history order, so a
            # stable sort on the metric breaks ties towards the smaller history
            for q in range(nc):
                sel[q] = 1
            keep = nc
            if nc > L:
                keep = L
                for q in range(nc):
                    order[q] = q
                for q in range(1, nc):
                    v = order[q]
                    j = q - 1
                    while j >= 0 and cm[order[j]] > cm[v]:
                        order[j + 1] = order[j]
                        j -= 1
                    order[j + 1] = v
                for q in range(keep, nc):
                    sel[order[q]] = 0
            for s in range(L):
                kids[s] = 0
            for k in range(P):
                kids[active[k]] = sel[2 * k] + sel[2 * k + 1]
            free = 0
            for s in range(L):
                if kids[s] == 0:
                    free_slots[free] = s
                    free += 1
            r = 0
            for k in range(P):
                parent = active[k]
                reused = False
                for b in range(2):
                    if not sel[2 * k + b]:
                        continue
                    if not reused:
                        slot = parent
                        reused = True
                    else:
                        free -= 1
                        slot = free_slots[free]
                        _fork_copy(alpha, beta, parent, slot, i, n)
                    nxt[r] = slot
                    newm[r] = cm[2 * k + b]
                    ucur[slot] = b
                    hist_bit[ji, r] = b
                    hist_par[ji, r] = k
                    r += 1
            ji += 1
            for q in range(keep):
                active[q] = nxt[q]
                pm[nxt[q]] = newm[q]
            P = keep
        if i < N - 1:
            for k in range(P):
                _propagate(beta, ucur[active[k]], active[k], i, n, c)
    for k in range(P):
        newm[k] = pm[active[k]]
    fin = np.argsort(newm[:P], kind="mergesort")
    best = fin[0]
    ok = False
    for k in range(P):
        _traceback(hist_bit, hist_par, ji, fin[k], bits)
        if _crc_ok(bits, K, crc_len, poly, init):
            best = fin[k]
            ok = True
            break
    _traceback(hist_bit, hist_par, ji, best, bits)
    for j in range(K):
        out_payload[j] = bits[j]
    return ok, pm[active[best]], P


@numba.njit(cache=True, nogil=True)
def _scl_batch(chans, frozen, L, clip, info_pos, K, crc_len, poly, init):
    T, N = chans.shape
    alpha = np.zeros((L, N))
    beta = np.zeros((L, N), dtype=np.uint8)
    ucur = np.zeros(L, dtype=np.uint8)
    steps = info_pos.shape[0]
    hist_bit = np.zeros((max(steps, 1), 2 * L), dtype=np.uint8)
    hist_par = np.zeros((max(steps, 1), 2 * L), dtype=np.int64)
    bits = np.zeros(max(steps, 1), dtype=np.uint8)
    pm = np.zeros(L)
    work_i = np.zeros((6, 2 * L), dtype=np.int64)
    work_f = np.zeros((3, 2 * L))
    c = np.empty(max(N, 2), dtype=np.uint8)
    c2 = np.empty(max(N, 2), dtype=np.uint8)
    payload = np.zeros((T, K), dtype=np.uint8)
    ok = np.zeros(T, dtype=np.bool_)
    metric = np.zeros(T)
    used = np.zeros(T, dtype=np.int64)
    for t in range(T):
        o, m, P = _scl_frame(chans[t], frozen, L, clip, info_pos, K, crc_len, poly, init,
                             alpha, beta, ucur, hist_bit, hist_par, pm, work_i, work_f, c, c2,
                             bits, payload[t])
        ok[t] = o
        metric[t] = m
        used[t] = P
    return payload, ok, metric, used


def _crc_args(mother: MotherCode) -> tuple[int, int]:
    if mother.crc_len == 0:
        return 0, 0
    return CRC_SPECS[mother.crc_len]


def scl_decode_batch(llrs: np.ndarray, mother: MotherCode, L: int = 32,
                     llr_clip: float | None = None) -> BatchDecode:
    """Decode a stack of frames (shape ``(frames, N)``) with the same code."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != mother.N:
        raise PolarDomainError(f"expected frames of length {mother.N}, got shape {llrs.shape}")
    if L < 1:
        raise PolarDomainError("list size must be >= 1")
    clip = 0.0 if llr_clip is None else float(llr_clip)
    if clip > 0.0:
        llrs = np.clip(llrs, -clip, clip)
    poly, init = _crc_args(mother)
    payload, ok, metric, used = _scl_batch(llrs, mother.frozen_mask, int(L), clip,
                                           mother.info_positions, mother.K, mother.crc_len, poly, init)
    return BatchDecode(payload, ok, metric, used)


def scl_decode(frame: LlrFrame | np.ndarray, mother: MotherCode, L: int = 32,
               llr_clip: float | None = None) -> DecodeResult:
    """Decode one frame; the lowest-metric path passing the CRC wins.

    If no surviving path passes, the lowest-metric path is returned with
    ``crc_ok=False``.
    """
    values = frame.values if isinstance(frame, LlrFrame) else np.asarray(frame, dtype=np.float64)
    if values.shape != (mother.N,):
        raise PolarDomainError(f"frame length {values.shape} != N = {mother.N}")
    res = scl_decode_batch(values[None, :], mother, L, llr_clip)
    return DecodeResult(res.payload[0], bool(res.crc_ok[0]), float(res.metric[0]), int(res.list_size_used[0]))
