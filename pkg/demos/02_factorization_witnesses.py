"""Exact factorizations: the s - 2q witness on M3 and the Clifford witness for W5-."""
import numpy as np

from qbirkhoff import factorize as fz, matcore, superop as so, werner

f = fz.s_minus_2q_witness()
t = fz.channel_of(f)
target = (2 / 27) * werner.werner_plus(3) + (25 / 27) * werner.werner_minus(3)
print("s - 2q gives (2/27)W+ + (25/27)W-:", so.max_distance(t, target))

# the antisymmetric defect of s - 2q sits exactly on the 25/27 bound
b = fz.antisym_defect(f.u, 3)
print("||b||_2^2 =", matcore.norm2_sq(b), " 25/27 =", 25 / 27)

cert = fz.dist_factorizable_w3minus()
print(f"d_cb(W3-, factorizable) = {cert.exact} = {cert.distance:.12f}")

# five anticommuting self-adjoint unitaries in M4 and a zero-diagonal circulant
w5 = fz.w5_minus_witness()
print("Clifford witness gives W5-:", so.max_distance(fz.channel_of(w5), werner.werner_minus(5)))

# for n = 7 the block channel R twirls to W7-, and R (x) S4 is mixed-unitary
d4 = fz.wn_minus_degree4_certificate(7)
mu = d4.mixed_unitary_certificate()
print(f"n=7: {len(mu)} unitaries, residual", so.check_degree_k_certificate(d4.r, 4, mu))
print("twirl weights of the witnesses:", np.round(d4.twirl_coeffs.as_tuple(), 12))

# Haar samples never beat the defect inequalities
rep = fz.antisym_defect_stats(k=2, samples=1000, seed=0)
print("defect inequalities hold on 1000 samples:", rep.all_hold())
