"""Dev scratch: does q2c separate one-sided frequencies on a raw cosine?"""
import sys
sys.path.insert(0, "src")
import numpy as np
from wavegain.transform import q2c

N = 64
h_idx, w_idx = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")

for name, k1, k2 in [("0.75pi,0.05pi", 0.75 * np.pi, 0.05 * np.pi),
                     ("0.5pi,0", 0.5 * np.pi, 0.0),
                     ("0.35pi,0.35pi", 0.35 * np.pi, 0.35 * np.pi),
                     ("0.7pi,0.7pi", 0.7 * np.pi, 0.7 * np.pi)]:
    F = np.cos(k1 * h_idx + k2 * w_idx + 0.3)
    s1, s2 = q2c(F)
    e1 = float(np.sum(s1.re**2 + s1.im**2))
    e2 = float(np.sum(s2.re**2 + s2.im**2))
    print(f"{name}: sub1 {e1/(e1+e2):.3f} sub2 {e2/(e1+e2):.3f}")

# expected from the analytic model at (0.75pi, 0.05pi): ~0.11 / 0.89
