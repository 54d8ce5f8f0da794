"""Compare the compiled and numpy kernel backends: speed and bitwise agreement.

    python benchmarks/bench_kernels.py [--size 256x384] [--repeats 3] [--image PATH]
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from edibench.interp import InterpConfig, MethodId, _upscale_array, available_backends
from edibench.raster import downsample_dyadic, load_image, to_luminance

EDIS = (MethodId.NEDI, MethodId.EGII, MethodId.ICBI, MethodId.DCCI)


def _median_time(fn, repeats):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", default="256x384", help="HxW of a random test plane")
    ap.add_argument("--image", help="use the LR version of this image instead")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)

    if args.image:
        lr = downsample_dyadic(to_luminance(load_image(args.image))).data
    else:
        h, w = (int(v) for v in args.size.lower().split("x"))
        lr = np.random.default_rng(0).uniform(0, 255, (h, w))
    backends = available_backends()
    cfg = InterpConfig()
    print(f"LR plane {lr.shape[0]}x{lr.shape[1]}, backends: {', '.join(backends)}")
    print(f"{'method':8s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup  identical")
    for m in (MethodId.BILINEAR, MethodId.BICUBIC) + EDIS:
        row, outs = [], []
        for b in backends:
            t, out = _median_time(lambda: _upscale_array(lr, m, 1, cfg, b), args.repeats)
            row.append(t)
            outs.append(out)
        same = all(np.array_equal(outs[0], o) for o in outs[1:])
        speed = (row[backends.index("numpy")] / row[backends.index("compiled")]) if len(row) > 1 else 1.0
        print(f"{m.value:8s}" + "".join(f"{t:12.4f}" for t in row) + f"  {speed:9.1f}x  {same}")


if __name__ == "__main__":
    main()
