"""Command-line driver: design, puncture, simulate, harq and equiv-check.

Configuration is a flat ``section.key=value`` text file; every key can also
be given as a flag (``--mother.n 10``), and the flag wins. The whole config is
resolved and validated before anything is computed or written.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import io
from .construction import ALGORITHMS, build_pattern, check_symmetric_prefixes, design_mother
from .equivalence_lab import check_equivalence_bec
from .harq import make_rv_plan, xor_offset
from .polar_core import MotherCode, PolarDomainError, PuncturePattern
from .sim import CodeSetup, DecoderConfig, TrialPolicy, run_bler, run_harq_experiment, simulate_harq_sessions

log = logging.getLogger("subset_polar")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    """``"1,1.5,2"`` or an inclusive range ``"1:2:0.5"``."""
    text = text.strip()
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        if step <= 0 or hi < lo:
            raise ValueError(f"bad range {text!r}")
        k = int(round((hi - lo) / step))
        return tuple(round(lo + j * step, 10) for j in range(k + 1))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _opt_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none") else float(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class MotherSection:
    n: int = 10
    K: int = 256
    crc_len: int = 16
    eps: float = 0.64


@dataclass
class SubsetSection:
    M: int = 512
    algorithm: str = "greedy"
    x: int = 0  # 0 means N


@dataclass
class DecoderSection:
    L: int = 8
    llr_clip: float | None = None


@dataclass
class ChannelSection:
    snr: tuple[float, ...] = (1.5, 2.0, 2.5)
    seed: int = 0


@dataclass
class PolicySection:
    min_errors: int = 100
    max_trials: int = 100_000
    min_trials: int = 0


@dataclass
class HarqSection:
    extra_offsets: tuple[int, ...] = ()
    sessions: int = 0
    trace: bool = False


@dataclass
class EquivSection:
    max_n: int = 5
    points: int = 100
    eps: tuple[float, ...] = (0.2, 0.5, 0.8)


@dataclass
class ExperimentConfig:
    mother: MotherSection = field(default_factory=MotherSection)
    subset: SubsetSection = field(default_factory=SubsetSection)
    decoder: DecoderSection = field(default_factory=DecoderSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    policy: PolicySection = field(default_factory=PolicySection)
    harq: HarqSection = field(default_factory=HarqSection)
    equiv: EquivSection = field(default_factory=EquivSection)

    @property
    def N(self) -> int:
        return 1 << self.mother.n

    @property
    def x(self) -> int:
        return self.subset.x or self.N

    def validate(self, command: str) -> None:
        m, s = self.mother, self.subset
        if not 1 <= m.n <= 16:
            raise ConfigError("mother.n must lie in [1, 16]")
        if m.crc_len not in (0, 8, 16, 24):
            raise ConfigError("mother.crc_len must be one of 0, 8, 16, 24")
        if m.K < 1 or m.K + m.crc_len > self.N:
            raise ConfigError(f"need 1 <= K and K + crc_len <= N = {self.N}")
        if not 0.0 < m.eps < 1.0:
            raise ConfigError("mother.eps must lie in (0, 1)")
        if command in ("puncture", "simulate", "harq"):
            if not m.K + m.crc_len <= s.M <= self.N:
                raise ConfigError(f"subset.M must lie in [{m.K + m.crc_len}, {self.N}]")
            if s.algorithm not in ALGORITHMS:
                raise ConfigError(f"subset.algorithm must be one of {', '.join(ALGORITHMS)}")
            if not 0 <= s.x <= self.N:
                raise ConfigError(f"subset.x must lie in [1, {self.N}] (0 means N)")
            if s.algorithm == "symmetric" or command == "harq":
                if self.x == 1:
                    raise ConfigError("subset.x must differ from 1 for symmetric codes")
                if 2 * s.M < self.N:
                    raise ConfigError("symmetric codes need M >= N/2")
            if s.algorithm == "frozen" and self.N - s.M > self.N - m.K - m.crc_len:
                raise ConfigError("frozen baseline cannot puncture more bits than there are frozen channels")
        if command == "harq":
            for y in self.harq.extra_offsets:
                if not 1 <= y <= self.N:
                    raise ConfigError(f"harq.extra_offsets entry {y} outside [1, {self.N}]")
        if command in ("simulate", "harq"):
            if self.decoder.L < 1:
                raise ConfigError("decoder.L must be >= 1")
            if not self.channel.snr:
                raise ConfigError("channel.snr is empty")
            if self.policy.max_trials < 1 or self.policy.min_errors < 0:
                raise ConfigError("policy needs max_trials >= 1 and min_errors >= 0")
        if command == "equiv-check":
            if not 1 <= self.equiv.max_n <= 12 or self.equiv.points < 1:
                raise ConfigError("equiv needs max_n in [1, 12] and points >= 1")
            if not all(0.0 <= e <= 1.0 for e in self.equiv.eps):
                raise ConfigError("equiv.eps values must lie in [0, 1]")

    def resolved(self) -> dict[str, object]:
        out = {}
        for sec in dataclasses.fields(self):
            for f in dataclasses.fields(getattr(self, sec.name)):
                v = getattr(getattr(self, sec.name), f.name)
                if isinstance(v, tuple):
                    v = ",".join(map(str, v))
                out[f"{sec.name}.{f.name}"] = v
        return out


_PARSERS: dict[str, Callable[[str], object]] = {
    "channel.snr": _floats,
    "equiv.eps": _floats,
    "harq.extra_offsets": _ints,
    "decoder.llr_clip": _opt_float,
    "harq.trace": _bool,
    "subset.algorithm": str,
}


def config_keys() -> list[str]:
    cfg = ExperimentConfig()
    return [f"{sec.name}.{f.name}" for sec in dataclasses.fields(cfg) for f in dataclasses.fields(getattr(cfg, sec.name))]


def apply_setting(cfg: ExperimentConfig, key: str, raw: str) -> None:
    if key not in config_keys():
        raise ConfigError(f"unknown config key {key!r}")
    section, name = key.split(".")
    sec = getattr(cfg, section)
    conv = _PARSERS.get(key)
    if conv is None:
        default = getattr(type(sec)(), name)
        conv = type(default)
    try:
        setattr(sec, name, conv(raw))
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None


def load_config(path: str | Path | None, overrides: dict[str, str]) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected section.key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            apply_setting(cfg, key, value)
    for key, value in overrides.items():
        apply_setting(cfg, key, value)
    return cfg


# ---------------------------------------------------------------- commands


def _mother(cfg: ExperimentConfig) -> MotherCode:
    m = cfg.mother
    return design_mother(m.n, m.K, m.crc_len, m.eps)


def _pattern(cfg: ExperimentConfig, mother: MotherCode) -> PuncturePattern:
    return build_pattern(mother, cfg.subset.M, cfg.subset.algorithm, cfg.x)


def _code_desc(cfg: ExperimentConfig) -> str:
    m, s = cfg.mother, cfg.subset
    base = f"({cfg.N}>={s.M};{m.K}+{m.crc_len})"
    if s.M == cfg.N:
        return base + "mother"
    return base + s.algorithm + (f"/x={cfg.x}" if s.algorithm == "symmetric" else "")


def cmd_design(cfg: ExperimentConfig, args) -> int:
    path = io.atomic_write_text(Path(args.out) / "mother.txt", io.format_mother(_mother(cfg)))
    print(path)
    return 0


def cmd_puncture(cfg: ExperimentConfig, args) -> int:
    mother = _mother(cfg)
    pattern = _pattern(cfg, mother)
    disjoint = check_symmetric_prefixes(pattern, cfg.x) if cfg.subset.algorithm == "symmetric" else None
    path = io.atomic_write_text(Path(args.out) / "pattern.txt", io.format_pattern(pattern, disjoint))
    print(path)
    return 0


def _policy(cfg: ExperimentConfig) -> TrialPolicy:
    p = cfg.policy
    return TrialPolicy(min_trials=p.min_trials, min_errors=p.min_errors, max_trials=p.max_trials)


def _decoder(cfg: ExperimentConfig) -> DecoderConfig:
    return DecoderConfig(cfg.decoder.L, cfg.decoder.llr_clip)


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    mother = _mother(cfg)
    if cfg.subset.M == cfg.N:
        code = CodeSetup.mother_code(mother)
    else:
        code = CodeSetup.subset(mother, _pattern(cfg, mother).subset_code().kept_positions, cfg.subset.algorithm)
    points = run_bler(code, _decoder(cfg), cfg.channel.snr, _policy(cfg), cfg.channel.seed, args.threads)
    text = io.format_curve(points, _code_desc(cfg), cfg.decoder.L, cfg.channel.seed, cfg.resolved())
    print(io.atomic_write_text(Path(args.out) / "curve.csv", text))
    return 0


def cmd_harq(cfg: ExperimentConfig, args) -> int:
    mother = _mother(cfg)
    extra = cfg.harq.extra_offsets
    plan = make_rv_plan(mother, cfg.subset.M, cfg.x, extra)
    dec = _decoder(cfg)
    curves = run_harq_experiment(plan, cfg.channel.snr, _policy(cfg), dec, cfg.channel.seed, True, args.threads)
    texts = {}
    for name, pts in curves.items():
        desc = f"({cfg.N}>={cfg.subset.M};{cfg.mother.K}+{cfg.mother.crc_len}){name}/x={cfg.x}"
        texts[f"{name}.csv"] = io.format_curve(pts, desc, cfg.decoder.L, cfg.channel.seed, cfg.resolved())
    if cfg.harq.sessions > 0:
        lines, summary = [], []
        for k, snr in enumerate(cfg.channel.snr):
            st = simulate_harq_sessions(plan, snr, cfg.harq.sessions, dec, cfg.channel.seed, k)
            summary.append(f"# ebn0_db={snr:g} sessions={st.sessions} decoded_after={list(st.decoded_after)} failed={st.failed}")
            if cfg.harq.trace:
                lines.extend(st.trace)
        texts["sessions.txt"] = "".join(f"{ln}\n" for ln in summary + lines)
    for name, text in texts.items():
        print(io.atomic_write_text(Path(args.out) / name, text))
    if extra:
        log.info("extra RV offsets %s (pairs with x give %s)", extra, [xor_offset(cfg.x, y) for y in extra])
    return 0


def equiv_suite(cfg: ExperimentConfig, seed: int):
    """Random ``(S, x)`` points with ``|S| >= N/2`` for every N and eps of the suite."""
    rng = np.random.default_rng(seed)
    for n in range(1, cfg.equiv.max_n + 1):
        N = 1 << n
        for eps in cfg.equiv.eps:
            for _ in range(cfg.equiv.points):
                size = int(rng.integers(N // 2, N + 1))
                s = rng.choice(np.arange(1, N + 1), size=size, replace=False)
                x = int(rng.integers(1, N + 1))
                yield check_equivalence_bec(s.tolist(), x, eps, N)


def cmd_equiv_check(cfg: ExperimentConfig, args) -> int:
    lines, failed = [], 0
    for rep in equiv_suite(cfg, cfg.channel.seed):
        lines.append(rep.line())
        failed += not rep.passed
    for ln in lines:
        print(ln)
    io.write_lines(Path(args.out) / "equiv.txt", lines)
    if failed:
        print(f"{failed} of {len(lines)} points failed", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "design": cmd_design,
    "puncture": cmd_puncture,
    "simulate": cmd_simulate,
    "harq": cmd_harq,
    "equiv-check": cmd_equiv_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat section.key=value file")
    common.add_argument("--seed", type=int, help="alias for --channel.seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")
    for key in config_keys():
        common.add_argument(f"--{key}", dest=f"cfg:{key}", metavar="VALUE")
    parser = argparse.ArgumentParser(prog="subset-polar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg:") and v is not None}
    if args.seed is not None:
        overrides["channel.seed"] = str(args.seed)
    try:
        cfg = load_config(args.config, overrides)
        cfg.validate(args.command)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, PolarDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
