"""Color-histogram baseline extractor.

A non-neural stand-in for a learned feature extractor: per-channel intensity
histograms, concatenated and max-normalized. Lets the full sampling pipeline
run on still images with no ML runtime.
"""

from __future__ import annotations

import numpy as np

from .core import FeatureVector, max_normalize
from .errors import MalformedInputError


def histogram_features(image_path, bins_per_channel: int = 32) -> FeatureVector:
    """Concatenated RGB intensity histograms; dim = 3 * bins_per_channel."""
    if bins_per_channel < 1:
        raise MalformedInputError(
            f"bins_per_channel must be >= 1, got {bins_per_channel}"
        )
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(image_path) as img:
            rgb = np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise MalformedInputError(f"cannot decode image {image_path}: {e}") from e

    hists = [
        np.histogram(rgb[..., c], bins=bins_per_channel, range=(0, 256))[0]
        for c in range(3)
    ]
    return max_normalize(np.concatenate(hists).astype(np.float64))
