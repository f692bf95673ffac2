"""Adaptive greedy subset code against a code designed directly at its length."""
import sys

from _common import parser, save, setup

from subset_polar.construction import design_mother, puncture_greedy
from subset_polar.sim import CodeSetup, run_bler


def main(argv=None):
    args = parser(__doc__, {"desk": "1.5:2.75:0.25", "full": "1.0:2.25:0.25"}).parse_args(argv)
    s, sweep, policy, dec, out = setup(args)
    mother = design_mother(s["n"], s["K"], s["crc_len"], s["eps"])
    M = mother.N // 2
    pattern = puncture_greedy(mother, M)
    print(f"adaptive eps: {pattern.eps_initial} -> {pattern.eps_final:.3f}")
    subset = run_bler(CodeSetup.subset(mother, pattern.subset_code().kept_positions), dec, sweep, policy,
                      args.seed, args.threads)
    save(out, "fig2_subset", subset, f"({mother.N}>={M};{s['K']}+{s['crc_len']})greedy", dec.L, args.seed,
         {"eps_final": pattern.eps_final})
    direct = design_mother(s["n"] - 1, s["K"], s["crc_len"], s["eps_half"])
    save(out, "fig2_direct", run_bler(CodeSetup.mother_code(direct), dec, sweep, policy, args.seed, args.threads),
         f"({M};{s['K']}+{s['crc_len']})direct", dec.L, args.seed)


if __name__ == "__main__":
    sys.exit(main())
