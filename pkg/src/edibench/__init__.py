"""Edge-directed interpolation methods and an image-quality benchmark harness."""
from .interp import (
    BACKEND,
    InterpConfig,
    MethodId,
    UpscaleResult,
    time_upscale,
    upscale,
)
from .raster import PixelRect, RasterImage, load_image, save_image

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "InterpConfig",
    "MethodId",
    "PixelRect",
    "RasterImage",
    "UpscaleResult",
    "load_image",
    "save_image",
    "time_upscale",
    "upscale",
]


def samples_dir():
    """Directory holding the three small bundled test images."""
    from importlib.resources import files

    return files("edibench") / "samples"
