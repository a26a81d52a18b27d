"""Dev scratch: one-sidedness of complex subband atoms + atom Gram."""
import sys
sys.path.insert(0, "src")
import numpy as np
from wavegain.transform import dtcwt_forward, dtcwt_inverse, zeros_like_pyramid

def atoms_for_scale(scale, S=33, levels=2, fsname="near_sym_a"):
    pad = S if S % (1 << levels) == 0 else ((S // (1 << levels)) + 1) * (1 << levels)
    x = np.zeros((1, pad, pad))
    c = S // 2
    x[0, c, c] = 1.0
    p = dtcwt_forward(x, levels, fsname)
    out = []
    for b in range(6):
        pair = []
        for part in ("re", "im"):
            pz = zeros_like_pyramid(p)
            if part == "re":
                pz.highpass[scale - 1].re[..., b, :, :] = p.highpass[scale - 1].re[..., b, :, :]
                pz.highpass[scale - 1].im[..., b, :, :] = p.highpass[scale - 1].im[..., b, :, :]
            else:
                pz.highpass[scale - 1].re[..., b, :, :] = -p.highpass[scale - 1].im[..., b, :, :]
                pz.highpass[scale - 1].im[..., b, :, :] = p.highpass[scale - 1].re[..., b, :, :]
            rec = dtcwt_inverse(pz)[0, :S, :S]
            pair.append(rec)
        out.append(pair)
    return out  # [band][re/im] arrays SxS

S = 33
for scale in (1, 2):
    at = atoms_for_scale(scale, S=S)
    print(f"== scale {scale}: one-sidedness of (re + j im) atom spectra ==")
    for b in range(6):
        z = at[b][0] + 1j * at[b][1]
        F = np.fft.fftshift(np.abs(np.fft.fft2(z, s=(128, 128))) ** 2)
        om1 = np.fft.fftshift(2 * np.pi * np.fft.fftfreq(128))
        W1, W2 = np.meshgrid(om1, om1, indexing="ij")
        top = F[W1 < 0].sum() / F.sum()   # which half dominates varies per band
        frac = max(top, 1 - top)
        # quadrature check: <re, im> / norms
        q = np.sum(at[b][0] * at[b][1]) / (
            np.linalg.norm(at[b][0]) * np.linalg.norm(at[b][1]))
        print(f" band {b}: one-sided {frac:.4f}  <re,im> {q:+.4f}")

print("== scale-2 atom Gram (12x12) ==")
at = atoms_for_scale(2, S=S)
A = np.array([at[b][p].ravel() for b in range(6) for p in (0, 1)])
A /= np.linalg.norm(A, axis=1, keepdims=True)
G = A @ A.T
d_eff = G.trace() ** 2 / np.sum(G * G)
with np.printoptions(precision=2, suppress=True):
    print(G)
print("effective dof from Gram:", d_eff)
