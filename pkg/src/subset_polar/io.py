"""Text artifacts: mother-code files, puncturing-pattern files and BLER CSVs.

All writers go through :func:`atomic_write_text`, so a file either appears
complete or not at all.
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .polar_core import MotherCode, PolarDomainError, PuncturePattern
from .sim import BlerPoint

CSV_COLUMNS = "ebn0_db,trials,errors,bler,ci_low,ci_high"


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _data_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


# ---------------------------------------------------------------- mother code


def format_mother(mother: MotherCode) -> str:
    lines = [f"{mother.N} {mother.K} {mother.crc_len} {mother.design_eps!r}"]
    lines += [str(i) for i in sorted(mother.non_frozen)]
    return "\n".join(lines) + "\n"


def parse_mother(text: str) -> MotherCode:
    lines = _data_lines(text)
    if not lines:
        raise PolarDomainError("empty mother-code file")
    head = lines[0].split()
    if len(head) != 4:
        raise PolarDomainError("mother header must be 'N K crc_len eps'")
    N, K, crc_len, eps = int(head[0]), int(head[1]), int(head[2]), float(head[3])
    n = N.bit_length() - 1
    return MotherCode(n, K, crc_len, frozenset(int(v) for v in lines[1:]), eps)


# ---------------------------------------------------------------- pattern


def format_pattern(pattern: PuncturePattern, disjoint: bool | None = None) -> str:
    m = pattern.mother
    lines = [f"{m.N} {pattern.M} {m.K} {m.crc_len} {pattern.eps_initial!r} {pattern.eps_final!r}"]
    lines += [str(i) for i in pattern.indices]
    if disjoint is not None:
        lines.append(f"# disjoint={'true' if disjoint else 'false'}")
    return "\n".join(lines) + "\n"


def parse_pattern(text: str, mother: MotherCode) -> PuncturePattern:
    """Read a pattern file back against the mother code it was built for."""
    lines = _data_lines(text)
    if not lines:
        raise PolarDomainError("empty pattern file")
    head = lines[0].split()
    if len(head) != 6:
        raise PolarDomainError("pattern header must be 'N M K crc_len eps_initial eps_final'")
    N, M, K, crc_len = (int(v) for v in head[:4])
    if (N, K, crc_len) != (mother.N, mother.K, mother.crc_len):
        raise PolarDomainError("pattern header does not match the mother code")
    indices = tuple(int(v) for v in lines[1:])
    if len(indices) != N - M:
        raise PolarDomainError(f"header says M={M} but {len(indices)} punctured indices follow")
    return PuncturePattern(indices, mother, float(head[4]), float(head[5]))


# ---------------------------------------------------------------- curves


def format_curve(points: Sequence[BlerPoint], code_desc: str, L: int, seed: int,
                 config: Mapping[str, object] | None = None) -> str:
    lines = [f"# code={code_desc} decoder=L{L} seed={seed}"]
    for k, v in (config or {}).items():
        lines.append(f"# {k}={v}")
    lines.append(CSV_COLUMNS)
    for p in points:
        lines.append(f"{p.ebn0_db:g},{p.trials},{p.errors},{p.bler:.6e},{p.ci95_low:.6e},{p.ci95_high:.6e}")
    return "\n".join(lines) + "\n"


def parse_curve(text: str) -> list[tuple[float, int, int]]:
    """``(ebn0_db, trials, errors)`` rows of a curve file."""
    rows = _data_lines(text)
    if not rows or rows[0] != CSV_COLUMNS:
        raise PolarDomainError("missing CSV column header")
    out = []
    for r in rows[1:]:
        f = r.split(",")
        out.append((float(f[0]), int(f[1]), int(f[2])))
    return out


def write_lines(path: str | os.PathLike, lines: Iterable[str]) -> Path:
    return atomic_write_text(path, "".join(f"{ln}\n" for ln in lines))
