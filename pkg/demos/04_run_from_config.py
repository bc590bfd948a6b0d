"""End-to-end: write a config file, run it through the CLI, inspect the output."""

import tempfile
from pathlib import Path

from nonlocal_fp.cli import main

CONFIG = """\
dim = 2
grid = 32 32
beta = 1.0
potential = coupled a=1.0 c=0.5
dt = 1e-3
t_final = 1.0
initial = gibbs-like
series_every = 50
snapshot_every = 500
checks = mass positivity phi_bound F_bound orbit_bounded
"""

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "demo.cfg").write_text(CONFIG)
    status = main(["run", str(tmp / "demo.cfg"), "--output-dir", str(tmp / "out")])
    print((tmp / "out" / "reports.csv").read_text())
    print("files:", sorted(p.name for p in (tmp / "out").iterdir()))
    main(["inspect", str(tmp / "out" / "snapshot_1000.fpk")])
    print("exit status", status)
