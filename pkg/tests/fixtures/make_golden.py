"""Regenerate the golden pattern files from the pure-Python greedy oracle.

Run from the repository root: ``python3 tests/fixtures/make_golden.py``.
"""
import sys
from pathlib import Path

here = Path(__file__).parent
sys.path.insert(0, str(here.parent))

from oracles import de_recursive, greedy_oracle  # noqa: E402

CASES = {
    "golden_greedy_n5.txt": dict(n=5, K=8, crc_len=8, eps=0.64, M=20, x=None),
    "golden_symmetric_n5.txt": dict(n=5, K=8, crc_len=8, eps=0.64, M=16, x=32),
}


def mother_info(n, K, crc_len, eps):
    N = 1 << n
    z = de_recursive([eps] * N)
    order = sorted(range(N), key=lambda i: (z[i], i))
    return sorted(i + 1 for i in order[: K + crc_len])


def render(n, K, crc_len, eps, M, x):
    N = 1 << n
    P, eps_final = greedy_oracle(N, mother_info(n, K, crc_len, eps), eps, M, adaptive=True, x=x)
    lines = [f"{N} {M} {K} {crc_len} {eps!r} {eps_final!r}"] + [str(p) for p in P]
    if x is not None:
        lines.append("# disjoint=true")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    for name, case in CASES.items():
        (here / name).write_text(render(**case))
        print(name)
