"""Dev scratch: orientation selectivity with in-band waves, various sizes."""
import sys
sys.path.insert(0, "src")
import numpy as np
from wavegain.transform import dtcwt_forward

def band_energy(p):
    return np.array([[float(np.sum(b.re[..., i, :, :] ** 2 + b.im[..., i, :, :] ** 2))
                      for i in range(6)] for b in p.highpass])

for N in (32, 64, 128):
    h_idx, w_idx = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    print(f"===== N={N} =====")
    cases = [
        # scale-2 diagonal: per-axis |w| ~ 0.35pi in (pi/4, pi/2)
        ("+45 s2", 0.35 * np.pi, 0.35 * np.pi),
        ("-45 s2", 0.35 * np.pi, -0.35 * np.pi),
        # scale-1 diagonal: per-axis ~0.7pi
        ("+45 s1", 0.7 * np.pi, 0.7 * np.pi),
        # scale-2 shallow: w1 ~ 0.4pi, w2 ~ 0.08pi
        ("h-high s2", 0.40 * np.pi, 0.08 * np.pi),
        ("w-high s2", 0.08 * np.pi, 0.40 * np.pi),
        # scale-1 axis-aligned
        ("h-high s1", 0.75 * np.pi, 0.05 * np.pi),
        ("mid s1 15-45", 0.7 * np.pi, 0.3 * np.pi),
    ]
    for name, k1, k2 in cases:
        x = np.cos(k1 * h_idx + k2 * w_idx + 0.7)[None]
        p = dtcwt_forward(x, 2)
        e = band_energy(p)
        tot = e.sum()
        with np.printoptions(precision=3, suppress=True):
            print(f"{name:12s} s1 {e[0] / tot} s2 {e[1] / tot}")
