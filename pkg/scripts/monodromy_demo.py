"""Branch permutation and eigenvector factors after k loops around one EP.

    python3 scripts/monodromy_demo.py                 # the 2x2 quarter-rotation pencil
    python3 scripts/monodromy_demo.py --dim 5 --seed 3 --ep-index 4
"""
import argparse

import numpy as np

from epscope.ep_local import local_report
from epscope.ep_locator import locate_eps
from epscope.matrix_model import PencilParams, build_pencil, sample_ensemble
from epscope.monodromy import loop_monodromy


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--ep-index", type=int, default=1)
    ap.add_argument("--gauge", default="analytic")
    args = ap.parse_args(argv)

    if args.seed is None:
        pencil = build_pencil(PencilParams([1.0, 2.0], [2.0, 1.0], [np.pi / 4]))
    else:
        pencil = sample_ensemble(args.dim, 1, np.pi, args.seed)[0]
    eps = list(locate_eps(pencil))
    ep = eps[args.ep_index]
    local = local_report(pencil, ep)
    print(f"EP {args.ep_index} of {len(eps)}: lambda_c = {ep.lambda_c:.6f}, "
          f"E_c = {ep.energy_c:.6f}, chirality {local.chirality_sign:+d}")
    for turns, direction in [(1, 1), (2, 1), (3, 1), (4, 1), (1, -1)]:
        rep = loop_monodromy(pencil, ep, turns=turns, direction=direction, all_eps=eps,
                             gauge=args.gauge)
        factors = " ".join(f"{z.real:+.3f}{z.imag:+.3f}i" for z in rep.phase_factors)
        print(f"turns {turns} dir {direction:+d}: permutation {rep.permutation.tolist()} "
              f"pair {rep.coalescing_pair} factors {factors}")


if __name__ == "__main__":
    main()
