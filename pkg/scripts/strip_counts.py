"""Strip counts of random saddle-free differentials against n = -6 + sum(m_p + 1)."""

import argparse
from collections import Counter

import numpy as np

from saddlescope.differentials import Inconclusive, QuadraticDifferential as Q
from saddlescope.differentials import critical_points, is_saddle_free, strip_decomposition

POLAR_TYPES = {
    (7,): (3, ()),
    (8,): (4, ()),
    (2, 4): (2, ((0, 2),)),
    (3, 3): (2, ((0, 3),)),
    (2, 2, 2): (2, ((0, 2), (1, 2))),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--per-type", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"seed: {args.seed}")
    for ptype, (deg, poles) in POLAR_TYPES.items():
        skipped = Counter()
        hits = []
        while len(hits) < args.per_type:
            num = tuple(complex(*rng.normal(size=2)) for _ in range(deg)) + (1.0,)
            phi = Q(num, poles, rng.uniform())
            try:
                free, _ = is_saddle_free(phi)
            except Inconclusive:
                skipped["inconclusive"] += 1
                continue
            if not free:
                skipped["saddle"] += 1
                continue
            n = critical_points(phi).hat_rank
            hits.append((len(strip_decomposition(phi, generic=False).strips), n))
        ok = all(s == n for s, n in hits)
        print(f"polar type {ptype}: n = {hits[0][1]}, strips {sorted({s for s, _ in hits})}, "
              f"{'all equal' if ok else 'MISMATCH'} over {len(hits)} samples, skipped {dict(skipped)}")


if __name__ == "__main__":
    main()
