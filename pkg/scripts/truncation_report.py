"""Accuracy of the truncated Taylor series for psi, by number of terms.

For each cell of the Fig. 1 grid the series with K = 1..5 terms is compared with
the exact fading average, and the Rayleigh J closed form is compared as well.
Prints the worst and median relative psi error per delay exponent.
"""
from __future__ import annotations

import argparse
import itertools

import numpy as np

from eee_urllc.effective_capacity import ClosedFormTerms, QoSConstraints, psi_lemma1, psi_stochastic, psi_theorem1
from eee_urllc.fbl_rate import LinkParams, db_to_linear


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--terms", type=int, default=5)
    ap.add_argument("--eps", type=float, default=1e-4)
    args = ap.parse_args()
    rows = {}
    for n, theta, rdb in itertools.product((50, 500), (1e-3, 1e-2, 0.1), range(-5, 21)):
        p = LinkParams(n, float(db_to_linear(rdb)), 1.0, args.eps)
        q = QoSConstraints(theta)
        exact = psi_stochastic(p, q).value
        errs = [abs(psi_lemma1(p, ClosedFormTerms.from_params(p, theta, k)) - exact) / exact
                for k in range(1, args.terms + 1)]
        errs.append(abs(psi_theorem1(p, q) - exact) / exact)
        rows.setdefault(theta, []).append(errs)
    labels = [f"K={k}" for k in range(1, args.terms + 1)] + ["J form"]
    print("theta    stat    " + "  ".join(f"{s:>9}" for s in labels))
    for theta, errs in sorted(rows.items()):
        e = np.array(errs)
        for stat, fn in (("max", np.max), ("median", np.median)):
            print(f"{theta:<8g} {stat:<7}" + "  ".join(f"{v:9.2e}" for v in fn(e, axis=0)))


if __name__ == "__main__":
    main()
