import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bec_profile_bruteforce, de_recursive, greedy_oracle, union_bound
from subset_polar.construction import (
    EPS_FLOOR,
    bec_evolve,
    build_pattern,
    check_symmetric_prefixes,
    design_mother,
    estimate_bler,
    puncture_fixed_eps,
    puncture_frozen_based,
    puncture_greedy,
    puncture_symmetric,
    update_eps,
)
from subset_polar.polar_core import MotherCode, PolarDomainError, xor_translate


@st.composite
def punctured_instance(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    N = 1 << n
    P = draw(st.lists(st.integers(1, N), unique=True, max_size=N))
    eps = draw(st.floats(0.0, 1.0))
    return N, P, eps


def test_bec_two_point_examples():
    assert bec_evolve(0.5, 2).z.tolist() == [0.75, 0.25]
    assert bec_evolve(0.5, 2, [2]).z.tolist() == [1.0, 0.5]
    assert bec_evolve(0.5, 2, [1]).z.tolist() == [1.0, 0.5]


@pytest.mark.parametrize("N, P", [(4, ()), (4, (3,)), (8, ()), (8, (2, 7)), (8, (1, 4, 6)), (16, (5, 11, 12))])
def test_bec_matches_rank_oracle(N, P):
    for eps in (0.2, 0.5, 0.8):
        z = bec_evolve(eps, N, P).z
        assert np.allclose(z, bec_profile_bruteforce(eps, N, P), atol=1e-12)


def test_bec_rejects_bad_eps():
    with pytest.raises(PolarDomainError):
        bec_evolve(1.5, 4)
    with pytest.raises(PolarDomainError):
        bec_evolve(0.5, 4, [5])


@settings(max_examples=200)
@given(punctured_instance(max_n=10))
def test_capacity_conservation(inst):
    N, P, eps = inst
    z = bec_evolve(eps, N, P).z
    assert np.all((z >= 0) & (z <= 1))
    assert abs(math.fsum(1 - z) - (N - len(P)) * (1 - eps)) <= 1e-12 * max(1, N)


@settings(max_examples=100)
@given(punctured_instance(max_n=7))
def test_matches_recursive_oracle(inst):
    N, P, eps = inst
    leaf = [1.0 if i + 1 in set(P) else eps for i in range(N)]
    assert np.allclose(bec_evolve(eps, N, P).z, de_recursive(leaf), rtol=0, atol=1e-14)


def _small_mother():
    return MotherCode(1, 1, 0, frozenset({2}), 0.5)


def test_estimate_bler_examples():
    m = _small_mother()
    assert estimate_bler([], 0.5, m).value == 0.25
    assert estimate_bler([], 0.0, m).value == 0.0


@settings(max_examples=100)
@given(st.integers(2, 7), st.data())
def test_estimate_monotone_in_pattern_and_eps(n, data):
    N = 1 << n
    K = data.draw(st.integers(1, N - 1))
    m = design_mother(n, K, 0, 0.5)
    P = data.draw(st.lists(st.integers(1, N), unique=True, max_size=N - 1))
    extra = data.draw(st.integers(1, N).filter(lambda v: v not in P))
    eps = data.draw(st.floats(0.0, 1.0))
    base = estimate_bler(P, eps, m).value
    assert estimate_bler(P + [extra], eps, m).value >= base
    grid = np.linspace(0, 1, 11)
    vals = [estimate_bler(P, e, m).value for e in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert base == pytest.approx(union_bound(N, list(m.non_frozen), eps, P), rel=1e-12, abs=1e-15)


def test_design_small_cases():
    assert design_mother(1, 1, 0, 0.5).non_frozen == (2,)
    z = bec_profile_bruteforce(0.5, 8)
    m = design_mother(3, 2, 0, 0.5)
    assert set(m.non_frozen) == set((np.argsort(z, kind="stable")[:2] + 1).tolist())
    with pytest.raises(PolarDomainError):
        design_mother(3, 8, 0, 0.5)
    with pytest.raises(PolarDomainError):
        design_mother(3, 2, 0, 0.0)


def test_design_large_configuration():
    m = design_mother(12, 1024, 16, 0.64)
    assert len(m.non_frozen) == 1040 and m.N == 4096
    z = bec_evolve(0.64, 4096).z
    assert z[m.info_positions].max() <= z[m.frozen_mask].min()


def test_update_eps_examples():
    m = _small_mother()
    assert update_eps([], 0.5, 0.25, m) == (0.5, False)
    eps, sat = update_eps([1], 0.5, 0.25, m)
    assert not sat and abs(eps - 0.25) <= 0.001 + 1e-12
    assert estimate_bler([1], eps, m).value <= 0.25
    assert update_eps([1], 0.5, 0.0, m) == (EPS_FLOOR, True)


def test_greedy_trivial_and_first_step():
    m = design_mother(3, 2, 0, 0.5)
    assert puncture_greedy(m, 8).indices == ()
    first = puncture_greedy(m, 7).indices[0]
    scores = [union_bound(8, list(m.non_frozen), 0.5, [l]) for l in range(1, 9)]
    assert first == 1 + int(np.argmin(scores))
    with pytest.raises(PolarDomainError):
        puncture_greedy(m, 1)


@pytest.mark.parametrize("n, K, crc_len, eps, M", [(3, 2, 0, 0.5, 5), (4, 4, 0, 0.5, 10), (5, 8, 8, 0.64, 20),
                                                   (6, 16, 8, 0.5, 36), (6, 8, 0, 0.3, 20)])
def test_greedy_matches_stepwise_oracle(n, K, crc_len, eps, M):
    m = design_mother(n, K, crc_len, eps)
    info = list(m.non_frozen)
    for adaptive in (True, False):
        P, e = greedy_oracle(m.N, info, eps, M, adaptive=adaptive)
        pat = puncture_greedy(m, M) if adaptive else puncture_fixed_eps(m, M)
        assert list(pat.indices) == P
        assert pat.eps_final == pytest.approx(e, abs=1e-12)
    if 2 * M >= m.N:
        P, _ = greedy_oracle(m.N, info, eps, M, x=m.N)
        assert list(puncture_symmetric(m, M, m.N).indices) == P


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 7), st.data())
def test_greedy_keeps_bound_at_target(n, data):
    N = 1 << n
    K = data.draw(st.integers(1, N // 2))
    m = design_mother(n, K, 0, data.draw(st.sampled_from([0.3, 0.5, 0.64])))
    M = data.draw(st.integers(K, N))
    pat = puncture_greedy(m, M)
    target = estimate_bler([], m.design_eps, m).value
    assert len(pat.indices) == N - M
    if not pat.saturated:
        assert estimate_bler(pat, pat.eps_final, m).value <= target
        if pat.eps_final < m.design_eps:
            # one step higher would have missed the target
            assert estimate_bler(pat, pat.eps_final + 0.001, m).value > target or pat.eps_final + 0.001 > m.design_eps
        fixed = puncture_fixed_eps(m, M)
        assert estimate_bler(fixed, m.design_eps, m).value >= estimate_bler(pat, pat.eps_final, m).value
    assert puncture_greedy(m, M) == pat


def test_fixed_eps_divergence_is_recorded():
    m = design_mother(6, 16, 0, 0.5)
    a, f = puncture_greedy(m, 32), puncture_fixed_eps(m, 32)
    assert puncture_fixed_eps(m, 64).indices == ()
    diverge = next((k for k, (x, y) in enumerate(zip(a.indices, f.indices)) if x != y), None)
    assert diverge is None or diverge >= 1
    assert f.eps_final == m.design_eps


def test_symmetric_examples():
    m = design_mother(3, 2, 0, 0.5)
    pat = puncture_symmetric(m, 4, 8)
    P = set(pat.indices)
    assert len(P) == 4
    assert P | xor_translate(P, 8, 8) == set(range(1, 9)) and not P & xor_translate(P, 8, 8)
    with pytest.raises(PolarDomainError):
        puncture_symmetric(m, 3, 8)
    with pytest.raises(PolarDomainError):
        puncture_symmetric(m, 4, 1)
    with pytest.raises(PolarDomainError):
        puncture_symmetric(m, 4, 9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.data())
def test_symmetric_prefixes_disjoint(n, data):
    N = 1 << n
    M = data.draw(st.integers(N // 2 if N > 1 else 1, N))
    K = data.draw(st.integers(1, max(1, min(M, N - 1))))
    if K >= N:
        return
    x = data.draw(st.integers(2, N))
    m = design_mother(n, K, 0, 0.5)
    pat = puncture_symmetric(m, M, x)
    assert check_symmetric_prefixes(pat, x)
    # when the constraint never binds on the unconstrained run, both runs agree
    free = puncture_greedy(m, M)
    if check_symmetric_prefixes(free, x):
        assert free.indices == pat.indices


def test_frozen_based_examples():
    m = _small_mother()
    pat = puncture_frozen_based(m, 1)
    assert pat.indices == (1,)
    assert bec_evolve(0.5, 2, pat).z[0] == 1.0
    assert puncture_frozen_based(m, 2).indices == ()
    with pytest.raises(PolarDomainError):
        puncture_frozen_based(m, 0)


@pytest.mark.parametrize("n, K, M", [(6, 16, 40), (8, 64, 160), (10, 272, 512), (10, 272, 384)])
def test_frozen_based_erases_targets(n, K, M):
    m = design_mother(n, K, 0, 0.5)
    pat = puncture_frozen_based(m, M)
    z = bec_evolve(0.5, m.N, pat).z
    targets = np.array(pat.indices) - 1
    assert np.all(z[targets] == 1.0)
    assert not np.any(m.frozen_mask[targets] == False)  # noqa: E712
    assert estimate_bler(pat, 0.5, m).value >= estimate_bler([], 0.5, m).value


def test_build_pattern_dispatch():
    m = design_mother(5, 8, 0, 0.5)
    assert build_pattern(m, 20, "greedy") == puncture_greedy(m, 20)
    assert build_pattern(m, 20, "symmetric", 32) == puncture_symmetric(m, 20, 32)
    assert build_pattern(m, 20, "fixed_eps") == puncture_fixed_eps(m, 20)
    assert build_pattern(m, 20, "frozen") == puncture_frozen_based(m, 20)
    with pytest.raises(PolarDomainError):
        build_pattern(m, 20, "random")
