#!/usr/bin/env python3
"""Independent reference implementation of the four evaluation indexes.

Regenerates the random cube pairs used by the frozen metric tests (same
splitmix64 generator, same arithmetic) and prints PSNR / SSIM / SAM /
ERGAS for each case. The values printed here are frozen into
crates/star-core/tests/metrics_oracle.rs; any change to the metric
definitions must be re-derived with this script.

Conventions (must match crates/star-core/src/metrics.rs):
  PSNR  - per band 10*log10(1/max(MSE, 1e-12)), averaged over bands.
  SSIM  - inputs clamped to [0,1]; 11x11 Gaussian window, sigma 1.5,
          K1=0.01, K2=0.03, L=1; valid window positions only; averaged
          over positions then bands. Bands smaller than the window use
          one uniform full-band window.
  SAM   - mean angle between spectral vectors over pixels; zero-norm
          pixels skipped; dot^2 >= nu*nv short-circuits to 0 (or pi).
  ERGAS - 100*sqrt(mean_b((RMSE_b/mean_b)^2)); zero-mean bands skipped.

Usage: python3 scripts/metrics_oracle.py
"""

import json
import math

import numpy as np

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return (z ^ (z >> 31)) & MASK

    def next_f64(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def gen_cube(dims, seed, transform):
    n1, n2, n3 = dims
    rng = SplitMix64(seed)
    data = [transform(rng.next_f64()) for _ in range(n1 * n2 * n3)]
    # Storage order: index (i, j, k) at i + n1*j + n1*n2*k.
    return np.asarray(data).reshape(dims, order="F")


def gen_pair(case):
    if case == 8:
        dims = (6, 9, 4)  # below the SSIM window: uniform fallback
    elif case == 9:
        dims = (11, 11, 3)  # exactly one window position
    else:
        dims = (13, 17, 5)
    ref = gen_cube(dims, 1000 + case, lambda u: 0.05 + 0.9 * u)
    amp = 0.02 + 0.04 * case
    noise = gen_cube(dims, 2000 + case, lambda u: u - 0.5)
    hat = ref + amp * noise
    return hat, ref


def psnr(hat, ref):
    total = 0.0
    n3 = ref.shape[2]
    for b in range(n3):
        mse = float(np.mean((hat[:, :, b] - ref[:, :, b]) ** 2))
        total += 10.0 * math.log10(1.0 / max(mse, 1e-12))
    return total / n3


def gaussian_window():
    w = np.zeros((11, 11))
    for v in range(11):
        for u in range(11):
            du, dv = u - 5.0, v - 5.0
            w[u, v] = math.exp(-(du * du + dv * dv) / (2.0 * 1.5 * 1.5))
    return w / w.sum()


def ssim(hat, ref):
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    n1, n2, n3 = ref.shape
    x_all = np.clip(hat, 0.0, 1.0)
    y_all = np.clip(ref, 0.0, 1.0)
    total = 0.0
    if n1 < 11 or n2 < 11:
        for b in range(n3):
            x, y = x_all[:, :, b], y_all[:, :, b]
            mx, my = float(x.mean()), float(y.mean())
            vx = float(((x - mx) ** 2).mean())
            vy = float(((y - my) ** 2).mean())
            cov = float(((x - mx) * (y - my)).mean())
            total += ((2 * mx * my + c1) * (2 * cov + c2)) / (
                (mx * mx + my * my + c1) * (vx + vy + c2)
            )
        return total / n3
    w = gaussian_window()
    for b in range(n3):
        x, y = x_all[:, :, b], y_all[:, :, b]
        vals = []
        for bb in range(n2 - 10):
            for aa in range(n1 - 10):
                xw = x[aa : aa + 11, bb : bb + 11]
                yw = y[aa : aa + 11, bb : bb + 11]
                mx = float((w * xw).sum())
                my = float((w * yw).sum())
                sxx = float((w * xw * xw).sum())
                syy = float((w * yw * yw).sum())
                sxy = float((w * xw * yw).sum())
                vx, vy, cov = sxx - mx * mx, syy - my * my, sxy - mx * my
                vals.append(
                    ((2 * mx * my + c1) * (2 * cov + c2))
                    / ((mx * mx + my * my + c1) * (vx + vy + c2))
                )
        total += sum(vals) / len(vals)
    return total / n3


def sam(hat, ref):
    n1, n2, _ = ref.shape
    total, kept = 0.0, 0
    for j in range(n2):
        for i in range(n1):
            u, v = hat[i, j, :], ref[i, j, :]
            dot = float(np.dot(u, v))
            nu = float(np.dot(u, u))
            nv = float(np.dot(v, v))
            if nu == 0.0 or nv == 0.0:
                continue
            if dot * dot >= nu * nv:
                angle = 0.0 if dot >= 0.0 else math.pi
            else:
                angle = math.acos(max(-1.0, min(1.0, dot / math.sqrt(nu * nv))))
            total += angle
            kept += 1
    return total / kept


def ergas(hat, ref):
    n3 = ref.shape[2]
    acc, kept = 0.0, 0
    for b in range(n3):
        mean = float(ref[:, :, b].mean())
        if mean == 0.0:
            continue
        rmse = math.sqrt(float(np.mean((hat[:, :, b] - ref[:, :, b]) ** 2)))
        acc += (rmse / mean) ** 2
        kept += 1
    return 100.0 * math.sqrt(acc / kept)


def main():
    rows = []
    for case in range(10):
        hat, ref = gen_pair(case)
        rows.append(
            {
                "case": case,
                "psnr": psnr(hat, ref),
                "ssim": ssim(hat, ref),
                "sam": sam(hat, ref),
                "ergas": ergas(hat, ref),
            }
        )
    print(json.dumps(rows, indent=2))
    print("\n// frozen rows for metrics_oracle.rs:")
    for r in rows:
        print(
            f"    ({r['psnr']!r}, {r['ssim']!r}, {r['sam']!r}, {r['ergas']!r}),"
        )


if __name__ == "__main__":
    main()
