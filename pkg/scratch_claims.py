"""Dev scratch: measure spec-level selectivity/support numbers."""
import sys
sys.path.insert(0, "src")
import numpy as np
from wavegain.transform import dtcwt_forward, dtcwt_inverse, Pyramid, zeros_like_pyramid
from wavegain.core import ComplexPair

def band_energy(p):
    return np.array([[float(np.sum(b.re[..., i, :, :] ** 2 + b.im[..., i, :, :] ** 2))
                      for i in range(6)] for b in p.highpass])

print("== 45-deg sinusoid scan (N=32, J=2) ==")
N = 32
h_idx, w_idx = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
for ax in (0.25, 0.26, 0.28, 0.30, 0.32, 0.35):
    k = ax * np.pi
    x = np.cos(k * (h_idx + w_idx) + 0.4)[None]
    p = dtcwt_forward(x, 2)
    e = band_energy(p)
    frac = e[1, 1] / e.sum()
    print(f"per-axis {ax:.2f}pi radial {ax*np.sqrt(2):.3f}pi -> 45-slot frac {frac:.3f}")

print("== per-subband impulse responses, support boxes ==")
S = 33
x = np.zeros((1, S - 1, S - 1))  # 32x32, impulse at 16,16
x[0, 16, 16] = 1.0
p = dtcwt_forward(x, 2)
for j in (1, 2):
    pz = zeros_like_pyramid(p)
    pz.highpass[j - 1] = p.highpass[j - 1]
    rec = dtcwt_inverse(pz)
    tot = float(np.sum(rec ** 2))
    for half in (3, 5, 7, 8, 11):
        box = rec[0, 16 - half:16 + half + 1, 16 - half:16 + half + 1]
        print(f"scale {j}: box {2*half+1}x{2*half+1}: {np.sum(box**2)/tot:.5f}", end="  ")
    print()

print("== lowpass-only energy box (J=2) ==")
pz = zeros_like_pyramid(p)
pz.lowpass = p.lowpass
rec = dtcwt_inverse(pz)
tot = float(np.sum(rec**2))
for half in (7, 8, 11, 15):
    box = rec[0, 16 - half:16 + half + 1, 16 - half:16 + half + 1]
    print(f"box {2*half+1}: {np.sum(box**2)/tot:.5f}", end="  ")
print()

print("== fig-1c style: random g2 shapes, annulus energy ==")
rng = np.random.default_rng(7)
# atoms: response to each (band, re/im) unit gain at scale 2
S = 25
pad = 28  # next multiple of 4
x = np.zeros((1, pad, pad))
x[0, 12, 12] = 1.0
p = dtcwt_forward(x, 2)
atoms = []
for b in range(6):
    for part in ("re", "im"):
        pz = zeros_like_pyramid(p)
        plane = getattr(pz.highpass[1], part)
        src = getattr(p.highpass[1], part)
        # gain of 1 on band b: copy coefficients of band b only
        plane[..., b, :, :] = src[..., b, :, :]
        im = getattr(pz.highpass[1], "im") if part == "re" else None
        # complex gain 1: w = v; gain j: w = j*v -> re=-v.im, im=v.re
        if part == "im":
            pz.highpass[1].re[..., b, :, :] = -p.highpass[1].im[..., b, :, :]
            pz.highpass[1].im[..., b, :, :] = p.highpass[1].re[..., b, :, :]
            pz.highpass[1].re[..., b, :, :] *= 1.0
        rec = dtcwt_inverse(pz)[0, :S, :S]
        atoms.append(rec.ravel())
atoms = np.array(atoms)  # (12, S*S)

om = 2 * np.pi * np.fft.fftfreq(S)
W1, W2 = np.meshgrid(om, om, indexing="ij")
ring = (np.maximum(np.abs(W1), np.abs(W2)) > np.pi / 4) & \
       (np.maximum(np.abs(W1), np.abs(W2)) <= np.pi / 2)
fracs = []
for trial in range(512):
    g = rng.standard_normal(12)
    shape = (g @ atoms).reshape(S, S)
    F = np.abs(np.fft.fft2(shape)) ** 2
    fracs.append(float(F[ring].sum() / F.sum()))
fracs = np.array(fracs)
print(f"annulus frac: min {fracs.min():.4f} mean {fracs.mean():.4f} p1 {np.percentile(fracs,1):.4f}")

print("== corr-dof on the same shapes ==")
shapes = rng.standard_normal((512, 12)) @ atoms
shapes /= np.linalg.norm(shapes, axis=1, keepdims=True)
R = shapes @ shapes.T
iu = np.triu_indices(512, k=1)
rho = R[iu]
print("dof estimate 1/var:", 1.0 / np.var(rho))

print("== estimator self-test d=12 ==")
v = rng.standard_normal((512, 12))
v /= np.linalg.norm(v, axis=1, keepdims=True)
rho = (v @ v.T)[iu]
print("dof estimate:", 1.0 / np.var(rho))
