"""Werner-Holevo channels, their twirl, and the distance 2/n to the mixed-unitary channels."""
import numpy as np

from qbirkhoff import matcore, superop as so, twirl, werner

n = 3
wp, wm = werner.werner_plus(n), werner.werner_minus(n)
e11 = matcore.matrix_unit(n, 0, 0)
print("W3+(e11) =\n", wp(e11).real)          # (1 + e11)/4
print("W3-(e12) =\n", wm(matcore.matrix_unit(n, 0, 1)).real)  # -e21/2

# Choi matrices are multiples of the spectral projections of the flip
sym = werner.build_symmetry(n)
print("Choi(W3+) = p+/6:", np.allclose(so.jamiolkowski(wp), sym.p_plus / 6))

# twirling any channel lands on the segment between W+ and W-
u = matcore.haar_unitary(n, seed=1)
_, c = twirl.twirl_closed_form(so.ad(u))
print(f"F(ad(u)) = {c.c_plus:.4f} W+ + {c.c_minus:.4f} W-")

# the min-symmetric unitary puts weight exactly 1/n on W+
for n in (3, 5, 7):
    cert = werner.dist_mixed_unitary_wminus(n)
    print(f"n={n}: d_cb(W-, mixed unitary) = {cert.exact} = {cert.distance:.6f}")
