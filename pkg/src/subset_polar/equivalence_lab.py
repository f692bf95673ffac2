"""Checks that XOR-translated subset codes behave identically.

Three levels of evidence, from cheapest to strongest:

* erasure-probability profiles under BEC density evolution (exact, any N),
* Monte Carlo BLER of both codes over BI-AWGN,
* for N <= 4, full transition tables of every bit-channel and an explicit
  output-alphabet bijection between them, in exact rational arithmetic.
"""
from __future__ import annotations

import hashlib
import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .construction import bec_evolve
from .polar_core import MotherCode, PolarDomainError, log2_exact, polar_encode, xor_translate
from .sim import BlerPoint, CodeSetup, DecoderConfig, TrialPolicy, intervals_overlap, simulate_point

BEC_TOL = 1e-12
ERASURE = 2  # output symbol of an erased leg; 0 and 1 are the bit values


@dataclass(frozen=True)
class EquivalenceReport:
    n: int
    s: frozenset[int]
    x: int
    eps: float
    max_abs_diff: float
    passed: bool

    @property
    def s_hash(self) -> str:
        return subset_hash(self.s)

    def line(self) -> str:
        return f"{1 << self.n} {self.s_hash} {self.x} {self.eps:g} {self.max_abs_diff:.3e} {'PASS' if self.passed else 'FAIL'}"


def subset_hash(s: Iterable[int]) -> str:
    return hashlib.sha1(",".join(map(str, sorted(s))).encode()).hexdigest()[:10]


def _complement(s: Iterable[int], N: int) -> list[int]:
    kept = set(s)
    return [i for i in range(1, N + 1) if i not in kept]


def check_equivalence_bec(s: Iterable[int], x: int, eps: float, N: int, tol: float = BEC_TOL) -> EquivalenceReport:
    """Compare the erasure profiles of kept-set ``s`` and its translate by ``x``."""
    n = log2_exact(N)
    s = frozenset(int(i) for i in s)
    t = xor_translate(s, x, N)
    zs = bec_evolve(eps, N, _complement(s, N)).z
    zt = bec_evolve(eps, N, _complement(t, N)).z
    diff = float(np.max(np.abs(zs - zt)))
    return EquivalenceReport(n, s, int(x), float(eps), diff, diff <= tol)


@dataclass(frozen=True)
class MonteCarloEquivalence:
    s_point: BlerPoint
    t_point: BlerPoint
    overlap: bool
    profile: EquivalenceReport


def check_equivalence_montecarlo(s: Iterable[int], x: int, mother: MotherCode, snr_db: float, trials: int,
                                 seed: int, L: int = 8, shared_noise: bool = False) -> MonteCarloEquivalence:
    """Simulate subset ``s`` and its translate for ``trials`` frames each.

    The two arms use independent noise unless ``shared_noise`` is set.
    Equivalence is declared when the 95% Wilson intervals overlap.
    """
    if trials < 1:
        raise PolarDomainError("trials must be >= 1")
    N = mother.N
    s = frozenset(int(i) for i in s)
    t = xor_translate(s, x, N)
    pos_s = np.array(sorted(s), dtype=np.int64) - 1
    pos_t = np.array(sorted(t), dtype=np.int64) - 1
    policy = TrialPolicy(min_trials=trials, min_errors=0, max_trials=trials)
    dec = DecoderConfig(L)
    ps = simulate_point(CodeSetup.subset(mother, pos_s, "S", arm=0), dec, snr_db, policy, seed)
    pt = simulate_point(CodeSetup.subset(mother, pos_t, "T", arm=0 if shared_noise else 1), dec, snr_db, policy, seed)
    profile = check_equivalence_bec(s, x, mother.design_eps, N)
    return MonteCarloEquivalence(ps, pt, intervals_overlap(ps, pt), profile)


# ---------------------------------------------------------------- exhaustive tables

Table = dict[tuple, tuple[Fraction, Fraction]]


def _leg_prob(y: int, bit: int, kept: bool, eps: Fraction) -> Fraction:
    if not kept:
        return Fraction(1) if y == ERASURE else Fraction(0)
    if y == ERASURE:
        return eps
    return 1 - eps if y == bit else Fraction(0)


def channel_table(N: int, kept: Iterable[int], i: int, eps: Fraction | float) -> Table:
    """Transition probabilities of bit-channel ``i`` (1-based) of the subset code.

    Keys are ``(y_1..y_N, u_1..u_{i-1})`` over the whole output alphabet;
    punctured legs only ever output the erasure symbol. Values are
    ``(W(. | u_i = 0), W(. | u_i = 1))``.
    """
    log2_exact(N)
    if not 1 <= i <= N:
        raise PolarDomainError(f"bit-channel {i} outside [1, {N}]")
    eps = Fraction(eps).limit_denominator(10**9) if not isinstance(eps, Fraction) else eps
    kept = {int(k) - 1 for k in kept}
    legs = [(0, 1, ERASURE) if j in kept else (ERASURE,) for j in range(N)]
    table: Table = {}
    for y in itertools.product(*legs):
        for prefix in itertools.product((0, 1), repeat=i - 1):
            table[y + prefix] = (Fraction(0), Fraction(0))
    weight = Fraction(1, 2 ** (N - 1))
    for u in itertools.product((0, 1), repeat=N):
        x = polar_encode(u)
        ui = u[i - 1]
        per_leg = [[(y, _leg_prob(y, int(x[j]), j in kept, eps)) for y in legs[j]] for j in range(N)]
        for combo in itertools.product(*per_leg):
            p = weight
            for _, q in combo:
                p *= q
            if p == 0:
                continue
            key = tuple(y for y, _ in combo) + tuple(u[: i - 1])
            w0, w1 = table[key]
            table[key] = (w0 + p, w1) if ui == 0 else (w0, w1 + p)
    return table


def find_output_bijection(t1: Table, t2: Table) -> dict | None:
    """An invertible ``f`` with ``t1[y] == t2[f(y)]`` for every output ``y``, or None.

    Outputs are grouped by their probability pair first, so a bijection exists
    exactly when the groups have equal sizes; members are then paired in order.
    """
    if len(t1) != len(t2):
        return None
    g1: dict[tuple, list] = defaultdict(list)
    g2: dict[tuple, list] = defaultdict(list)
    for y, probs in t1.items():
        g1[probs].append(y)
    for y, probs in t2.items():
        g2[probs].append(y)
    if {k: len(v) for k, v in g1.items()} != {k: len(v) for k, v in g2.items()}:
        return None
    f = {}
    for probs, ys in g1.items():
        for a, b in zip(sorted(ys), sorted(g2[probs])):
            f[a] = b
    assert all(t1[y] == t2[f[y]] for y in t1) and len(set(f.values())) == len(f)
    return f


def enumerate_channel_equivalence(N: int, s: Iterable[int], x: int, eps: Fraction | float) -> bool:
    """Exhaustively test every bit-channel of ``s`` against that of its translate."""
    if N not in (2, 4):
        raise PolarDomainError("exhaustive channel comparison supports N in {2, 4} only")
    s = frozenset(int(i) for i in s)
    t = xor_translate(s, x, N)
    for i in range(1, N + 1):
        if find_output_bijection(channel_table(N, s, i, eps), channel_table(N, t, i, eps)) is None:
            return False
    return True
