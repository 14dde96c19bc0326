#!/usr/bin/env python3
"""Semantic feature-stream extractor.

Decodes a video file or an image directory, runs a detection transformer's
CNN backbone plus encoder over every sampled frame, average-pools the encoder
output to one 256-wide vector, clamps negative activations to zero,
max-normalizes, and writes the JSON-lines stream format understood by the
sampling toolkit:

    {"dim": 256, "fps": <real>}
    {"frame_index": <int>, "timestamp_s": <real>, "features": [<256 reals>]}
    ...

Usage:

    extract.py --source dive.mp4 --stride 5 --output dive.jsonl
    extract.py --source frames/ --stride 1 --fps 25 --output frames.jsonl

By default the model weights are the published pretrained checkpoint
(downloaded or taken from the local cache); ``--weights random`` builds the
same architecture with seeded random initialization, which keeps the output
contract (shape, range, determinism) intact without any network access.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp", ".tif", ".tiff"}

# ImageNet statistics used by the detection transformer's preprocessing
MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)

DEFAULT_MODEL = "facebook/detr-resnet-50"


class ExtractError(Exception):
    pass


def build_model(weights: str, model_id: str, seed: int, device: str):
    import torch
    from transformers import DetrConfig, DetrModel, ResNetConfig

    if weights == "pretrained":
        try:
            model = DetrModel.from_pretrained(model_id)
        except Exception as e:
            raise ExtractError(
                f"could not obtain pretrained weights for {model_id!r}: {e}; "
                "pass --weights random to run the same architecture untrained"
            ) from e
    else:
        config = DetrConfig(
            use_timm_backbone=False,
            use_pretrained_backbone=False,
            backbone_config=ResNetConfig(out_features=["stage4"]),
        )
        torch.manual_seed(seed)
        model = DetrModel(config)
    return model.to(device).eval()


def preprocess(rgb: np.ndarray, max_size: int):
    """HxWx3 uint8 -> 1x3xhxw float tensor, longest side capped at max_size."""
    import torch

    h, w = rgb.shape[:2]
    longest = max(h, w)
    if longest > max_size:
        scale = max_size / longest
        new_w, new_h = max(1, round(w * scale)), max(1, round(h * scale))
        from PIL import Image

        rgb = np.asarray(
            Image.fromarray(rgb).resize((new_w, new_h), Image.BILINEAR)
        )
    x = (rgb.astype(np.float32) / 255.0 - MEAN) / STD
    return torch.from_numpy(np.ascontiguousarray(x.transpose(2, 0, 1)))[None]


def embed_frame(model, rgb: np.ndarray, max_size: int) -> np.ndarray:
    """One frame -> non-negative max-normalized vector of width d_model."""
    import torch

    pixels = preprocess(rgb, max_size)
    with torch.no_grad():
        out = model(
            pixel_values=pixels,
            pixel_mask=torch.ones(
                (1,) + pixels.shape[-2:], dtype=torch.long, device=pixels.device
            ),
        )
    # (1, m*n, d_model): average over the spatial positions
    pooled = out.encoder_last_hidden_state[0].mean(dim=0).cpu().numpy().astype(np.float64)
    pooled = np.maximum(pooled, 0.0)
    peak = pooled.max()
    if peak > 0.0:
        pooled /= peak
    return pooled


def iter_image_dir(source: Path, stride: int, fps: float):
    from PIL import Image, UnidentifiedImageError

    paths = sorted(
        p for p in source.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not paths:
        raise ExtractError(f"no decodable images found in {source}")
    for index, path in enumerate(paths):
        if index % stride:
            continue
        try:
            with Image.open(path) as img:
                rgb = np.asarray(img.convert("RGB"))
        except (UnidentifiedImageError, OSError) as e:
            raise ExtractError(f"cannot decode image {path}: {e}") from e
        yield index, index / fps, rgb


def iter_video(source: Path, stride: int, fps_override):
    import cv2

    cap = cv2.VideoCapture(str(source))
    if not cap.isOpened():
        raise ExtractError(f"cannot open video {source}")
    fps = fps_override or cap.get(cv2.CAP_PROP_FPS)
    if not fps or fps <= 0:
        raise ExtractError(
            f"video {source} does not declare a frame rate; pass --fps"
        )

    def frames():
        index = 0
        while True:
            ok, bgr = cap.read()
            if not ok:
                break
            if index % stride == 0:
                yield index, index / fps, bgr[:, :, ::-1]
            index += 1
        cap.release()

    return fps, frames()


def run(args) -> int:
    source = Path(args.source)
    if not source.exists():
        raise ExtractError(f"source {source} does not exist")
    if source.is_dir():
        fps = args.fps or 30.0
        frames = iter_image_dir(source, args.stride, fps)
    else:
        fps, frames = iter_video(source, args.stride, args.fps)

    model = build_model(args.weights, args.model, args.seed, args.device)
    dim = model.config.d_model

    count = 0
    with open(args.output, "w", encoding="utf-8") as out:
        out.write(json.dumps({"dim": dim, "fps": fps}, sort_keys=True) + "\n")
        for index, timestamp, rgb in frames:
            vector = embed_frame(model, rgb, args.max_size)
            record = {
                "frame_index": index,
                "timestamp_s": float(np.float32(timestamp)),
                "features": [float(v) for v in vector.astype(np.float32)],
            }
            out.write(json.dumps(record, sort_keys=True) + "\n")
            count += 1
    print(f"extract: wrote {count} records (dim={dim}, fps={fps})", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Extract a semantic feature stream")
    parser.add_argument("--source", required=True, help="video file or image directory")
    parser.add_argument("--stride", type=int, default=1,
                        help="keep every Nth frame (default 1)")
    parser.add_argument("--output", required=True, help="JSON-lines stream to write")
    parser.add_argument("--weights", choices=("pretrained", "random"),
                        default="pretrained")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help=f"pretrained model id (default {DEFAULT_MODEL})")
    parser.add_argument("--seed", type=int, default=0,
                        help="initialization seed for --weights random")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-size", type=int, default=800,
                        help="cap the longest image side before inference")
    parser.add_argument("--fps", type=float,
                        help="frame rate for image directories or to override the video's")
    args = parser.parse_args(argv)
    if args.stride < 1:
        parser.error("--stride must be >= 1")
    try:
        return run(args)
    except ExtractError as e:
        print(f"extract: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
