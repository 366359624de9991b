"""Dip-statistic fixtures from the `diptest` package.

Writes dip_critical.csv (the Hartigan critical-value table shipped with the
package) and dip_reference.csv (seeded samples with their reference dip).
"""
import csv
import os

import numpy as np
from diptest import dipstat
from diptest.consts import Consts

here = os.path.dirname(os.path.abspath(__file__))
fixtures = os.path.join(here, "..", "fixtures")

alphas = list(Consts._ALPHA)
col95 = alphas.index(0.95)
col99 = alphas.index(0.99)
with open(os.path.join(fixtures, "dip_critical.csv"), "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["n", "q95", "q99"])
    for n, row in zip(Consts._SAMPLE_SIZE, Consts._CRIT_VALS):
        w.writerow([int(n), repr(float(row[col95])), repr(float(row[col99]))])

rng = np.random.default_rng(20240611)
cases = []
for k in range(40):
    n = int(rng.integers(2, 120))
    kind = k % 4
    if kind == 0:
        x = rng.normal(size=n)
    elif kind == 1:
        x = np.concatenate([rng.normal(-2, 0.5, n // 2), rng.normal(2, 0.5, n - n // 2)])
    elif kind == 2:
        x = rng.integers(0, 6, size=n).astype(float)  # heavy ties
    else:
        x = rng.uniform(size=n)
    x = np.round(x, 6)
    cases.append((k, x))

with open(os.path.join(fixtures, "dip_reference.csv"), "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["case", "dip", "values"])
    for k, x in cases:
        w.writerow([k, repr(float(dipstat(x))), " ".join(repr(float(v)) for v in x)])
