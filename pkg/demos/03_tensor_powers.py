"""Tensor squares and cubes of T_lambda = lambda W3+ + (1 - lambda) W3- as mixed-unitary channels."""
import numpy as np

from qbirkhoff import convex

for lam in (0.15, 0.2, 0.25, 1 / 3, 0.5):
    row = []
    for power in (2, 3):
        c = convex.certify_tensor_membership(lam, power)
        row.append(f"power {power}: {'yes' if c.verdict else 'no '} (min weight {c.min_weight:+.5f})")
    print(f"lambda={lam:.4f}  " + "  ".join(row))

print("p1 root      ", convex.p1_root())
roots = convex.coefficient_roots()
print("q1 roots     ", np.round(roots["q1"], 5))
print("q3 roots     ", np.round(roots["q3"], 5))

# the printed q3 closed form does not match the linear system; the corrected one does
dev = convex.printed_polynomial_crosscheck()
print(f"printed q3 deviation {dev['q3_printed']:.3g}, corrected {dev['q3_corrected']:.1e}")
