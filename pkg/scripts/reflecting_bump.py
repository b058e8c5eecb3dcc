"""Wall-bounded bump release: invariant series with and without relaxation."""

import sys

from dispersive_sw.cli import run_cli

if __name__ == "__main__":
    rc = 0
    for model in ("bbm_bbm", "svaerd_kalisch"):
        rc |= run_cli([
            "run", "--scenario", "reflecting_bump", "--model", model,
            "--n-nodes", "512", "--check",
            "--output-dir", f"results/reflecting_bump/{model}",
        ])
    sys.exit(rc)
