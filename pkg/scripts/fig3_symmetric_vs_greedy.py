"""Symmetric greedy construction against the unconstrained adaptive greedy one."""
import sys

from _common import parser, save, setup

from subset_polar.construction import design_mother, puncture_greedy, puncture_symmetric
from subset_polar.sim import CodeSetup, run_bler


def main(argv=None):
    args = parser(__doc__, {"desk": "2.0:2.5:0.25", "full": "1.25:2.25:0.25"}).parse_args(argv)
    s, sweep, policy, dec, out = setup(args)
    mother = design_mother(s["n"], s["K"], s["crc_len"], s["eps"])
    M = mother.N // 2
    for name, pattern in (("greedy", puncture_greedy(mother, M)), ("symmetric", puncture_symmetric(mother, M, mother.N))):
        pts = run_bler(CodeSetup.subset(mother, pattern.subset_code().kept_positions), dec, sweep, policy,
                       args.seed, args.threads)
        save(out, f"fig3_{name}", pts, f"({mother.N}>={M};{s['K']}+{s['crc_len']}){name}", dec.L, args.seed)


if __name__ == "__main__":
    sys.exit(main())
