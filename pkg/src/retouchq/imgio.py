"""Image file I/O: reads PNG/JPEG, writes 8-bit PNG.

Internal processing uses real-valued [0, 1] arrays; files are 8-bit.
"""

from pathlib import Path

import numpy as np
from PIL import Image

READABLE_SUFFIXES = {".png", ".jpg", ".jpeg"}


def read_image(path) -> np.ndarray:
    """Load an image file as a float32 (H, W, 3) array in [0, 1]."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float32) / 255.0
    return np.ascontiguousarray(arr)


def write_image(path, img: np.ndarray) -> None:
    """Write a float32 [0, 1] image as an 8-bit PNG."""
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    data = np.round(arr * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")


def list_images(directory) -> list[Path]:
    """Readable image files in a directory, sorted by name."""
    root = Path(directory)
    return sorted(p for p in root.iterdir() if p.suffix.lower() in READABLE_SUFFIXES)
