"""Lake-at-rest errors over the discontinuous bathymetry, orders 2/4/6."""

import sys

from dispersive_sw.cli import run_cli

if __name__ == "__main__":
    rc = 0
    for model in ("bbm_bbm", "svaerd_kalisch"):
        for order in (2, 4, 6):
            rc |= run_cli([
                "run", "--scenario", "lake_at_rest", "--model", model,
                "--order", str(order), "--check",
                "--output-dir", f"results/lake_at_rest/{model}_p{order}",
            ])
    sys.exit(rc)
