"""Run all four figure experiments at the 4096-bit scale (many hours on one core)."""
import sys

import fig1_harq
import fig2_subset_vs_direct
import fig3_symmetric_vs_greedy
import fig4_construction_comparison


def main(argv=None):
    argv = ["--scale", "full", *(argv if argv is not None else sys.argv[1:])]
    for mod in (fig1_harq, fig2_subset_vs_direct, fig3_symmetric_vs_greedy, fig4_construction_comparison):
        mod.main(argv)


if __name__ == "__main__":
    sys.exit(main())
