"""Two redundancy versions of one symmetric subset code, alone and combined.

Curves: RV 0 alone, RV 1 alone, both combined, the mother code with matched
noise, and a code designed directly for half the mother length.
"""
import sys

from _common import parser, save, setup

from subset_polar.construction import design_mother
from subset_polar.harq import make_rv_plan
from subset_polar.sim import CodeSetup, run_bler, run_harq_experiment


def main(argv=None):
    args = parser(__doc__.splitlines()[0], {"desk": "1.0:3.0:0.25", "full": "0.25:2.25:0.25"}).parse_args(argv)
    s, sweep, policy, dec, out = setup(args)
    mother = design_mother(s["n"], s["K"], s["crc_len"], s["eps"])
    N = mother.N
    plan = make_rv_plan(mother, N // 2, N)
    curves = run_harq_experiment(plan, sweep, policy, dec, args.seed, threads=args.threads)
    direct = design_mother(s["n"] - 1, s["K"], s["crc_len"], s["eps_half"])
    curves["direct"] = run_bler(CodeSetup.mother_code(direct), dec, sweep, policy, args.seed, args.threads)
    for name, pts in curves.items():
        save(out, f"fig1_{name}", pts, f"({N}>={N // 2};{s['K']}+{s['crc_len']}){name}", dec.L, args.seed)


if __name__ == "__main__":
    sys.exit(main())
