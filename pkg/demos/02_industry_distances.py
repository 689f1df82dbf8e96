"""Train one network per industry and compare them on each other's data.

Builds a synthetic firm panel, fits a small network per industry for a
single year, and prints both distance matrices. Rows are acquirors,
columns targets; the diagonal is exactly 1 and the transfer distance never
exceeds the unadjusted one.

    python demos/02_industry_distances.py
"""

import numpy as np
import pandas as pd

from funcdist import synthetic
from funcdist.distance import year_distances
from funcdist.neural import NetworkArchitecture, TrainConfig
from funcdist.panel import add_derived, build_all_datasets

YEAR = 2010
INDUSTRIES = range(1, 7)

panel = add_derived(synthetic.firm_panel(INDUSTRIES, [YEAR], firms_per_industry=80, seed=3))
datasets, skipped = build_all_datasets(panel, "LogQ")
print(f"{len(datasets)} industry-years, {len(skipped)} skipped")

per_industry = {ind: ds for (_, ind), ds in datasets.items()}
matrix, weights = year_distances(per_industry, NetworkArchitecture(), TrainConfig(seed=11), YEAR)

for name, grid in (("d_U", matrix.d_U), ("d_TF", matrix.d_TF)):
    print(f"\n{name}")
    print(pd.DataFrame(grid, index=matrix.industries, columns=matrix.industries).round(3))

off = ~np.eye(len(matrix.industries), dtype=bool)
print(f"\nmean off-diagonal d_U {matrix.d_U[off].mean():.3f}, d_TF {matrix.d_TF[off].mean():.3f}")
asym = np.abs(matrix.d_U - matrix.d_U.T)[off].max()
print(f"largest |d_U(A,B) - d_U(B,A)|: {asym:.3f}")
