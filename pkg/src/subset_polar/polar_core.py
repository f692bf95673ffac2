"""Index arithmetic, the polar transform, CRC handling and the core code objects.

All public index sets are 1-based (``1..N``); arrays handed to the numeric
kernels are 0-based. The transform is ``x = u F^{(x)n}`` in natural order
(no bit-reversal permutation), used consistently by the encoder, the density
evolution and the decoder.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numba
import numpy as np


class PolarDomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


# length -> (generator polynomial without the leading term, register init)
CRC_SPECS: dict[int, tuple[int, int]] = {
    8: (0x07, 0x00),
    16: (0x1021, 0xFFFF),  # CRC-16/CCITT-FALSE
    24: (0x864CFB, 0x000000),
}


def log2_exact(N: int) -> int:
    if N < 1 or N & (N - 1):
        raise PolarDomainError(f"block length must be a power of 2, got {N}")
    return N.bit_length() - 1


def _check_index(i: int, N: int) -> int:
    i = int(i)
    if not 1 <= i <= N:
        raise PolarDomainError(f"index {i} outside [1, {N}]")
    return i


def xor_translate(s: Iterable[int], x: int, N: int) -> frozenset[int]:
    """Map every index ``e`` of ``s`` to ``((e-1) ^ (x-1)) + 1``.

    The map is a bijection on ``[1, N]`` and an involution for fixed ``x``.
    """
    log2_exact(N)
    off = _check_index(x, N) - 1
    return frozenset(((_check_index(e, N) - 1) ^ off) + 1 for e in s)


@numba.njit(cache=True)
def _transform_inplace(x):
    N = x.shape[0]
    h = N >> 1
    while h >= 1:
        for blk in range(0, N, 2 * h):
            for j in range(blk, blk + h):
                x[j] ^= x[j + h]
        h >>= 1


def polar_encode(u: Sequence[int] | np.ndarray) -> np.ndarray:
    """Return ``u F^{(x)n}`` over GF(2) as a uint8 vector.

    The transform is its own inverse.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    if x.ndim != 1:
        raise PolarDomainError("polar_encode expects a 1-D bit vector")
    log2_exact(x.shape[0])
    _transform_inplace(x)
    return x


@numba.njit(cache=True)
def _crc_register(bits, poly, init, width):
    mask = (1 << width) - 1
    reg = init
    for b in bits:
        top = ((reg >> (width - 1)) & 1) ^ (b & 1)
        reg = (reg << 1) & mask
        if top:
            reg ^= poly
    out = np.zeros(width, dtype=np.uint8)
    for k in range(width):
        out[k] = (reg >> (width - 1 - k)) & 1
    return out


def _crc_params(crc_len: int) -> tuple[int, int]:
    try:
        return CRC_SPECS[crc_len]
    except KeyError:
        raise PolarDomainError(
            f"unsupported CRC length {crc_len}; choose 0 or one of {sorted(CRC_SPECS)}"
        ) from None


def crc_compute(bits: Sequence[int] | np.ndarray, crc_len: int = 16) -> np.ndarray:
    """CRC remainder of ``bits`` (MSB first, no reflection, no final XOR)."""
    if crc_len == 0:
        return np.zeros(0, dtype=np.uint8)
    poly, init = _crc_params(crc_len)
    return _crc_register(np.asarray(bits, dtype=np.uint8), poly, init, crc_len)


def crc_check(bits: Sequence[int] | np.ndarray, crc_len: int = 16) -> bool:
    bits = np.asarray(bits, dtype=np.uint8)
    if crc_len == 0:
        return True
    if bits.shape[0] < crc_len:
        return False
    k = bits.shape[0] - crc_len
    return bool(np.array_equal(crc_compute(bits[:k], crc_len), bits[k:]))


@dataclass(frozen=True)
class MotherCode:
    """An ``(N, K)`` polar code with ``K + crc_len`` non-frozen bit-channels."""

    n: int
    K: int
    crc_len: int
    non_frozen: tuple[int, ...]
    design_eps: float

    def __post_init__(self):
        if self.n < 1:
            raise PolarDomainError("n must be >= 1")
        if self.crc_len != 0:
            _crc_params(self.crc_len)
        nf = tuple(sorted(int(i) for i in self.non_frozen))
        object.__setattr__(self, "non_frozen", nf)
        if len(set(nf)) != len(nf):
            raise PolarDomainError("non-frozen indices must be distinct")
        if len(nf) != self.K + self.crc_len:
            raise PolarDomainError(
                f"|non_frozen| = {len(nf)} but K + crc_len = {self.K + self.crc_len}"
            )
        for i in nf:
            _check_index(i, self.N)
        if not 0.0 < self.design_eps < 1.0:
            raise PolarDomainError("design_eps must lie in (0, 1)")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def info_len(self) -> int:
        return self.K + self.crc_len

    @cached_property
    def info_positions(self) -> np.ndarray:
        """0-based non-frozen positions in increasing order."""
        return np.array(self.non_frozen, dtype=np.int64) - 1

    @cached_property
    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.N, dtype=np.bool_)
        mask[self.info_positions] = False
        return mask


@dataclass(frozen=True)
class PuncturePattern:
    """Punctured coded-bit indices, in the order they were selected."""

    indices: tuple[int, ...]
    mother: MotherCode
    eps_initial: float | None = None
    eps_final: float | None = None
    saturated: bool = False

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(set(idx)) != len(idx):
            raise PolarDomainError("punctured indices must be distinct")
        for i in idx:
            _check_index(i, self.mother.N)

    @property
    def M(self) -> int:
        return self.mother.N - len(self.indices)

    def prefix(self, j: int) -> "PuncturePattern":
        return PuncturePattern(self.indices[:j], self.mother)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.mother.N, dtype=np.bool_)
        if self.indices:
            m[np.array(self.indices) - 1] = True
        return m

    def subset_code(self) -> "SubsetCode":
        return SubsetCode(self.mother, frozenset(range(1, self.mother.N + 1)) - set(self.indices))


@dataclass(frozen=True)
class SubsetCode:
    """The ``M`` coded bits of a mother code that are actually transmitted."""

    mother: MotherCode
    kept: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        kept = frozenset(int(i) for i in self.kept)
        object.__setattr__(self, "kept", kept)
        for i in kept:
            _check_index(i, self.mother.N)

    @property
    def M(self) -> int:
        return len(self.kept)

    @cached_property
    def kept_positions(self) -> np.ndarray:
        """0-based kept positions in increasing order."""
        return np.array(sorted(self.kept), dtype=np.int64) - 1

    @property
    def punctured(self) -> frozenset[int]:
        return frozenset(range(1, self.mother.N + 1)) - self.kept

    def translate(self, x: int) -> "SubsetCode":
        return SubsetCode(self.mother, xor_translate(self.kept, x, self.mother.N))


def assemble_message(payload: Sequence[int] | np.ndarray, mother: MotherCode) -> np.ndarray:
    """Place ``payload || crc(payload)`` on the non-frozen positions of a zero u-vector."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape != (mother.K,):
        raise PolarDomainError(f"payload length {payload.shape} != K = {mother.K}")
    u = np.zeros(mother.N, dtype=np.uint8)
    u[mother.info_positions[: mother.K]] = payload
    u[mother.info_positions[mother.K :]] = crc_compute(payload, mother.crc_len)
    return u


def extract_payload(u: Sequence[int] | np.ndarray, mother: MotherCode) -> np.ndarray:
    """Inverse of :func:`assemble_message`; returns the first ``K`` non-frozen bits."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape != (mother.N,):
        raise PolarDomainError(f"u-vector length {u.shape} != N = {mother.N}")
    return u[mother.info_positions[: mother.K]].copy()
