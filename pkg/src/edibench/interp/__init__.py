"""Six 2x upscalers sharing one lattice fill: bilinear, bicubic, NEDI, EGII, ICBI, DCCI.

Every pass maps an ``h x w`` plane to ``2h x 2w``.  The natural
``(2h-1) x (2w-1)`` grid keeps the input on its even sites; the last row and
column are copies of their neighbours.

The edge-directed kernels come from a compiled module when it was built and
from a numpy implementation otherwise.  Set ``EDIBENCH_PURE_PYTHON=1`` to
force the numpy one.  ``BACKEND`` names the active choice.
"""
from __future__ import annotations

import enum
import os
import statistics
import time
from dataclasses import dataclass

import numpy as np

from ..raster import RasterImage
from . import _grid, _pykernels

__all__ = [
    "MethodId",
    "InterpConfig",
    "UpscaleResult",
    "BACKEND",
    "available_backends",
    "bilinear_pass",
    "bicubic_pass",
    "nedi_pass",
    "egii_pass",
    "icbi_pass",
    "dcci_pass",
    "upscale",
    "upscale_channels",
    "time_upscale",
]

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"numpy": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

BACKEND = "numpy" if (_ckernels is None or os.environ.get("EDIBENCH_PURE_PYTHON")) else "compiled"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _kernels(backend: str | None):
    name = BACKEND if backend is None else backend
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}") from None


class MethodId(enum.Enum):
    BILINEAR = "bilinear"
    BICUBIC = "bicubic"
    NEDI = "nedi"
    EGII = "egii"
    ICBI = "icbi"
    DCCI = "dcci"

    @classmethod
    def parse(cls, name: "str | MethodId") -> "MethodId":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {name!r} (expected one of: {names})") from None

    @property
    def is_edge_directed(self) -> bool:
        return self not in (MethodId.BILINEAR, MethodId.BICUBIC)

    def __str__(self):
        return self.value


ALL_METHODS = tuple(MethodId)
EDI_METHODS = tuple(m for m in MethodId if m.is_edge_directed)


@dataclass(frozen=True)
class InterpConfig:
    nedi_window: int = 8
    nedi_variance_threshold: float = 8.0
    nedi_condition_limit: float = 1e8
    icbi_max_iters: int = 20
    icbi_stop_delta: float = 0.2
    icbi_curvature_weight: float = 1.0
    icbi_fidelity_weight: float = 0.1
    dcci_threshold: float = 1.15
    dcci_exponent: int = 5
    egii_stats_window: int = 7

    def __post_init__(self):
        if self.nedi_window < 2:
            raise ValueError("nedi_window must be >= 2")
        if self.egii_stats_window < 3:
            raise ValueError("egii_stats_window must be >= 3")
        for name in ("nedi_variance_threshold", "nedi_condition_limit", "icbi_stop_delta", "dcci_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.icbi_max_iters < 0 or self.dcci_exponent < 0:
            raise ValueError("iteration counts and exponents must be >= 0")
        if self.icbi_curvature_weight < 0 or self.icbi_fidelity_weight < 0:
            raise ValueError("ICBI energy weights must be >= 0")


@dataclass(frozen=True)
class UpscaleResult:
    image: RasterImage
    elapsed_seconds: float


# ------------------------------------------------------------------ baselines

def _plane(img) -> np.ndarray:
    arr = img.data if isinstance(img, RasterImage) else np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("interpolation needs a single-channel image; convert with to_luminance first")
    if arr.shape[0] < 4 or arr.shape[1] < 4:
        raise ValueError(f"input must be at least 4x4, got {arr.shape[1]}x{arr.shape[0]}")
    return arr


def _extend(nat: np.ndarray) -> np.ndarray:
    return np.pad(nat, ((0, 1), (0, 1)), mode="edge")


def _bilinear(lr: np.ndarray) -> np.ndarray:
    h, w = lr.shape
    g = np.empty((2 * h - 1, 2 * w - 1))
    g[::2, ::2] = lr
    g[::2, 1::2] = (lr[:, :-1] + lr[:, 1:]) * 0.5
    g[1::2, ::2] = (lr[:-1, :] + lr[1:, :]) * 0.5
    g[1::2, 1::2] = (lr[:-1, :-1] + lr[:-1, 1:] + lr[1:, :-1] + lr[1:, 1:]) * 0.25
    return _extend(g)


def _half_cubic(p: np.ndarray, axis: int) -> np.ndarray:
    """Midpoints between samples 2..n-3 of an axis padded by 2 on both ends."""
    n = p.shape[axis]

    def s(k):
        return np.take(p, np.arange(k, n - 3 + k), axis=axis)

    return _pykernels._cubic(s(0), s(1), s(2), s(3))


def _bicubic(lr: np.ndarray) -> np.ndarray:
    # separable Keys kernel (a = -0.5): rows first, then columns
    h, w = lr.shape
    rows = np.empty((h, 2 * w - 1))
    rows[:, ::2] = lr
    rows[:, 1::2] = _half_cubic(np.pad(lr, ((0, 0), (2, 2)), mode="edge"), 1)[:, 1:-1]
    g = np.empty((2 * h - 1, 2 * w - 1))
    g[::2] = rows
    g[1::2] = _half_cubic(np.pad(rows, ((2, 2), (0, 0)), mode="edge"), 0)[1:-1]
    return _extend(g)


def bilinear_pass(lr: RasterImage) -> RasterImage:
    """One 2x bilinear pass (replicate boundary)."""
    return RasterImage(_bilinear(_plane(lr)))


def bicubic_pass(lr: RasterImage) -> RasterImage:
    """One 2x separable cubic-convolution pass, a = -0.5, replicate boundary."""
    return RasterImage(_bicubic(_plane(lr)))


# ------------------------------------------------------------ edge-directed

def _edi(lr: np.ndarray, pad: int, run_step) -> np.ndarray:
    h, w = lr.shape
    g = _grid.new_grid(_grid.pad_lr(lr, pad))
    run_step(g, _grid.DIAG)
    run_step(g, _grid.CARD)
    return _grid.finish(g, pad, h, w)


def _nedi(lr, cfg, backend=None):
    k = _kernels(backend)
    pad = max(4, cfg.nedi_window // 2 + 1)
    return _edi(lr, pad, lambda g, f: k.nedi_step(
        g, f, cfg.nedi_window, float(cfg.nedi_variance_threshold), float(cfg.nedi_condition_limit)))


def _egii(lr, cfg, backend=None):
    k = _kernels(backend)
    pad = max(4, cfg.egii_stats_window // 4 + 2)
    return _edi(lr, pad, lambda g, f: k.egii_step(g, f, cfg.egii_stats_window))


def _dcci(lr, cfg, backend=None):
    k = _kernels(backend)
    return _edi(lr, 4, lambda g, f: k.dcci_step(g, f, float(cfg.dcci_threshold), cfg.dcci_exponent))


def _icbi(lr, cfg, backend=None, traces=None):
    k = _kernels(backend)

    def step(g, f):
        trace = k.icbi_step(g, f, cfg.icbi_max_iters, float(cfg.icbi_stop_delta),
                            float(cfg.icbi_curvature_weight), float(cfg.icbi_fidelity_weight))
        if traces is not None:
            traces.append(list(trace))

    return _edi(lr, 4, step)


def nedi_pass(lr: RasterImage, cfg: InterpConfig = InterpConfig(), *, backend: str | None = None) -> RasterImage:
    """One 2x NEDI pass: per-site least-squares weights from the LR covariance."""
    return RasterImage(_nedi(_plane(lr), cfg, backend))


def egii_pass(lr: RasterImage, cfg: InterpConfig = InterpConfig(), *, backend: str | None = None) -> RasterImage:
    """One 2x EGII pass: variance-weighted fusion of two directional cubic estimates."""
    return RasterImage(_egii(_plane(lr), cfg, backend))


def icbi_pass(lr: RasterImage, cfg: InterpConfig = InterpConfig(), *, backend: str | None = None,
              return_trace: bool = False):
    """One 2x ICBI pass.

    With ``return_trace`` the result is ``(image, [diag_trace, card_trace])``
    where each trace lists the refinement energy before the first sweep and
    after every sweep.
    """
    traces: list[list[float]] = []
    out = RasterImage(_icbi(_plane(lr), cfg, backend, traces))
    return (out, traces) if return_trace else out


def dcci_pass(lr: RasterImage, cfg: InterpConfig = InterpConfig(), *, backend: str | None = None) -> RasterImage:
    """One 2x DCCI pass: directional cubic along the weaker-gradient diagonal, or a blend."""
    return RasterImage(_dcci(_plane(lr), cfg, backend))


_PASSES = {
    MethodId.BILINEAR: lambda a, cfg, b: _bilinear(a),
    MethodId.BICUBIC: lambda a, cfg, b: _bicubic(a),
    MethodId.NEDI: _nedi,
    MethodId.EGII: _egii,
    MethodId.ICBI: _icbi,
    MethodId.DCCI: _dcci,
}


def _upscale_array(arr: np.ndarray, method: MethodId, n: int, cfg: InterpConfig, backend=None) -> np.ndarray:
    fn = _PASSES[method]
    for _ in range(n):
        arr = fn(arr, cfg, backend)
    return arr


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"factor exponent n must be an integer >= 1, got {n!r}")
    return int(n)


def upscale(lr: RasterImage, method, n: int = 1, cfg: InterpConfig = InterpConfig(), *,
            backend: str | None = None) -> UpscaleResult:
    """Enlarge by ``2**n`` by applying the chosen 2x pass ``n`` times."""
    method = MethodId.parse(method)
    n = _check_n(n)
    arr = _plane(lr)
    t0 = time.perf_counter()
    out = _upscale_array(arr, method, n, cfg, backend)
    elapsed = time.perf_counter() - t0
    return UpscaleResult(RasterImage(out), elapsed)


def upscale_channels(img: RasterImage, method, n: int = 1, cfg: InterpConfig = InterpConfig()) -> RasterImage:
    """Per-channel upscaling for colour montages (gray input works too)."""
    method = MethodId.parse(method)
    n = _check_n(n)
    if img.channels == 1:
        return upscale(img, method, n, cfg).image
    planes = [_upscale_array(_plane(img.data[:, :, c]), method, n, cfg) for c in range(3)]
    return RasterImage(np.stack(planes, axis=2))


def time_upscale(lr: RasterImage, method, n: int = 1, cfg: InterpConfig = InterpConfig(), *,
                 repeats: int = 3) -> UpscaleResult:
    """Median wall-clock of ``repeats`` back-to-back runs of :func:`upscale`.

    The caller is responsible for keeping the machine otherwise idle.
    """
    runs = [upscale(lr, method, n, cfg) for _ in range(repeats)]
    return UpscaleResult(runs[-1].image, statistics.median(r.elapsed_seconds for r in runs))
