"""PSNR of lattice-aligned baselines vs centre-aligned resizes on corner-sampled inputs.

A centre-aligned 2x resize (Pillow here) treats LR pixel i as covering HR
pixels 2i..2i+1, while corner sampling puts it on HR pixel 2i.  The half-pixel
shift costs the resized baselines a few dB against the ground truth.

    python benchmarks/baseline_alignment.py [DIR]
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
from PIL import Image

from edibench.interp import MethodId, upscale
from edibench.metrics import psnr
from edibench.raster import downsample_dyadic, is_image_file, load_image, to_luminance


def _centre_aligned(lr: np.ndarray, resample) -> np.ndarray:
    im = Image.fromarray(lr.astype(np.float32))
    return np.asarray(im.resize((2 * lr.shape[1], 2 * lr.shape[0]), resample), dtype=np.float64)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    root = Path(argv[0] if argv else "data/natural")
    rows = {"centre bilinear": [], "centre bicubic": []}
    rows.update({f"lattice {m.value}": [] for m in MethodId})
    for p in sorted(q for q in root.iterdir() if is_image_file(q)):
        hr = to_luminance(load_image(p))
        lr = downsample_dyadic(hr)
        h, w = 2 * lr.height - 1, 2 * lr.width - 1
        ref = hr.data[:h, :w]
        rows["centre bilinear"].append(psnr(ref, _centre_aligned(lr.data, Image.BILINEAR)[:h, :w]))
        rows["centre bicubic"].append(psnr(ref, _centre_aligned(lr.data, Image.BICUBIC)[:h, :w]))
        for m in MethodId:
            rows[f"lattice {m.value}"].append(psnr(ref, upscale(lr, m).image.data[:h, :w]))
    for name, vals in rows.items():
        print(f"{name:18s} {np.mean(vals):8.3f} dB  (n={len(vals)})")


if __name__ == "__main__":
    main()
