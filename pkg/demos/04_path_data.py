"""The path gamma(t) and the crossing lambda0, written out as CSV data."""
from fractions import Fraction
from pathlib import Path

import numpy as np

from qbirkhoff import convex

print("gamma(1)   =", convex.mw_path(Fraction(1)))
print("gamma(1/2) =", convex.mw_path(Fraction(1, 2)))
print(f"lambda0 = {convex.mw_lambda0():.5f} (crossing with y = x^2: {convex.mw_lambda0_intersection():.10f})")

out = Path("demo_output")
out.mkdir(exist_ok=True)
convex.write_csv(out / "path.csv", convex.PATH_HEADER, convex.path_export(np.linspace(0, 1, 101)))
convex.write_csv(out / "curves.csv", convex.CURVE_HEADER, convex.curve_export(np.linspace(0, 1, 41)))
print("wrote", *sorted(p.name for p in out.iterdir()))
