"""Shared argument handling and CSV output for the experiment scripts."""
from __future__ import annotations

import argparse
import logging
from pathlib import Path

from subset_polar import io
from subset_polar.sim import DecoderConfig, TrialPolicy, snr_at_bler

# mother-code family per scale: (n, K, crc_len, eps of the mother, eps of the half-length code, list size)
SCALES = {
    "desk": dict(n=10, K=256, crc_len=16, eps=0.64, eps_half=0.32, L=8),
    "full": dict(n=12, K=1024, crc_len=16, eps=0.64, eps_half=0.32, L=32),
}


def parser(description: str, default_sweep: dict[str, str]) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--scale", choices=sorted(SCALES), default="desk")
    p.add_argument("--sweep", help="Eb/N0 values 'a,b,c' or 'lo:hi:step' (default depends on scale)")
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--max-trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="results")
    p.set_defaults(default_sweep=default_sweep)
    return p


def setup(args):
    from subset_polar.cli import _floats

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    scale = SCALES[args.scale]
    sweep = _floats(args.sweep or args.default_sweep[args.scale])
    policy = TrialPolicy(min_errors=args.min_errors, max_trials=args.max_trials)
    out = Path(args.out) / args.scale
    return scale, sweep, policy, DecoderConfig(scale["L"]), out


def save(out: Path, name: str, points, desc: str, L: int, seed: int, extra: dict | None = None) -> None:
    io.atomic_write_text(out / f"{name}.csv", io.format_curve(points, desc, L, seed, extra))
    print(f"{name:>12}: 1% BLER at {snr_at_bler(points):.3f} dB  ->  {out / (name + '.csv')}")
