"""Certificate table for the null families of the Dirichlet and Neumann presets.

Covers ``k = 1..K`` (Dirichlet) and ``k = 0..K-1`` (Neumann) plus the
boundary-matrix determinants of all four presets.
"""

import argparse
import logging
import sys

from poincare_sie import certificates

logger = logging.getLogger("counterexamples")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, default=20, help="family size")
    parser.add_argument("--nodes", type=int, default=512)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    certs = certificates.dirichlet_null_family(args.k, args.nodes)
    certs += certificates.neumann_null_family(args.k - 1, args.nodes)
    certs += certificates.preset_determinants()
    for c in certs:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name:24s} {c.value:.3e} <= {c.tolerance:.1e}")
    failed = sum(not c.passed for c in certs)
    logger.info("%d/%d certificates passed", len(certs) - failed, len(certs))
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
