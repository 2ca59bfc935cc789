"""A small radial-postselection sweep through the command line.

Writes a CSV next to this script and prints the best cut.
"""

import json
import os
import sys

from cvqkd_psk import cli

here = os.path.dirname(os.path.abspath(__file__))
spec = {
    "base": {"L": 50, "alpha": 0.9, "xi": 0.01, "beta": 0.9, "n_cutoff": 8, "fw_max_iters": 20},
    "axes": [["delta_r", {"start": 0.0, "stop": 0.8, "step": 0.2}]],
    "summary": "delta_r",
}
path = os.path.join(here, "sweep_spec.json")
with open(path, "w") as fh:
    json.dump(spec, fh)
sys.exit(cli.main(["sweep", "--config", path, "--out", os.path.join(here, "sweep.csv"), "--workers", "1"]))
