"""Feature-stream file I/O.

Two formats carry the same data:

* Binary (default): little-endian, fixed layout. Header: magic ``ONIS``
  (4 bytes), format version u32 (= 1), dim u32, fps f32. Each record:
  frame_index u64, timestamp-present u8, timestamp f32 (only when present),
  then dim float32 feature values. No record count is stored; streams are
  readable to the end without knowing their length in advance.
* JSON lines (debug / interchange): a header line ``{"dim": ..., "fps": ...}``
  optionally carrying ``record_count_hint``, then one record object per line:
  ``{"frame_index": ..., "timestamp_s": ..., "features": [...]}`` with
  ``timestamp_s`` omitted when absent.

Values are computed in float64 but stored as float32 in both formats, so
converting between formats preserves values exactly and re-writing a file
that was just read reproduces it byte for byte.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, Sequence, Tuple

import numpy as np

from .core import FeatureVector, FrameRecord, StreamHeader
from .errors import (
    BadMagicError,
    FormatVersionError,
    MalformedInputError,
    NonMonotoneIndexError,
    StreamFormatError,
    TruncatedStreamError,
)

MAGIC = b"ONIS"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sII f")
_REC_FIXED = struct.Struct("<QB")
_TS = struct.Struct("<f")


@dataclass(frozen=True)
class StreamFile:
    """A fully materialized stream: header plus records."""

    header: StreamHeader
    records: Tuple[FrameRecord, ...]

    def __post_init__(self):
        last = -1
        for r in self.records:
            if r.features.dim != self.header.dim:
                raise MalformedInputError(
                    f"record {r.frame_index} has dim {r.features.dim}, "
                    f"header declares {self.header.dim}"
                )
            if r.frame_index <= last:
                raise NonMonotoneIndexError(
                    f"frame_index {r.frame_index} follows {last}; "
                    "indices must be strictly increasing"
                )
            last = r.frame_index


def _f32(values: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=np.float64).astype("<f4")


# -- binary format --------------------------------------------------------------


def write_stream(path, stream: StreamFile) -> None:
    """Write the binary format."""
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, stream.header.dim, stream.header.fps))
        for r in stream.records:
            f.write(_REC_FIXED.pack(r.frame_index, 1 if r.timestamp_s is not None else 0))
            if r.timestamp_s is not None:
                f.write(_TS.pack(r.timestamp_s))
            f.write(_f32(r.features.values).tobytes())


def _read_exact(f: IO[bytes], n: int, what: str) -> bytes:
    start = f.tell()
    data = f.read(n)
    if len(data) != n:
        raise TruncatedStreamError(
            f"stream truncated at byte {start}: needed {n} bytes for {what}, "
            f"got {len(data)}",
            offset=start,
        )
    return data


def _read_binary_header(f: IO[bytes]) -> StreamHeader:
    raw = _read_exact(f, _HEADER.size, "header")
    magic, version, dim, fps = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise BadMagicError(
            f"bad magic {magic!r}; not a binary feature-stream file"
        )
    if version != FORMAT_VERSION:
        raise FormatVersionError(
            f"unsupported stream format version {version}; this reader handles "
            f"version {FORMAT_VERSION}"
        )
    try:
        return StreamHeader(dim=dim, fps=fps)
    except MalformedInputError as e:
        raise StreamFormatError(f"invalid header: {e}") from e


def _iter_binary_records(f: IO[bytes], dim: int) -> Iterator[FrameRecord]:
    feat_bytes = 4 * dim
    last = -1
    while True:
        start = f.tell()
        fixed = f.read(_REC_FIXED.size)
        if not fixed:
            return
        if len(fixed) != _REC_FIXED.size:
            raise TruncatedStreamError(
                f"stream truncated at byte {start}: needed {_REC_FIXED.size} bytes "
                f"for record prefix, got {len(fixed)}",
                offset=start,
            )
        frame_index, ts_flag = _REC_FIXED.unpack(fixed)
        if ts_flag not in (0, 1):
            raise StreamFormatError(
                f"corrupt timestamp flag {ts_flag} in record starting at byte {start}"
            )
        timestamp = None
        if ts_flag:
            timestamp = _TS.unpack(_read_exact(f, _TS.size, "timestamp"))[0]
        raw = _read_exact(f, feat_bytes, f"{dim} feature values")
        if frame_index <= last:
            raise NonMonotoneIndexError(
                f"frame_index {frame_index} follows {last} in record starting "
                f"at byte {start}; indices must be strictly increasing"
            )
        last = frame_index
        features = FeatureVector.of(np.frombuffer(raw, dtype="<f4").astype(np.float64))
        yield FrameRecord(frame_index, features, timestamp)


# -- JSON-lines format -----------------------------------------------------------


def write_stream_jsonl(path, stream: StreamFile) -> None:
    """Write the JSON-lines format. Feature values are quantized to float32
    so both formats carry identical data."""
    with open(path, "w", encoding="utf-8") as f:
        header = {"dim": stream.header.dim, "fps": stream.header.fps}
        if stream.header.record_count_hint is not None:
            header["record_count_hint"] = stream.header.record_count_hint
        f.write(json.dumps(header, sort_keys=True) + "\n")
        for r in stream.records:
            obj = {"frame_index": r.frame_index}
            if r.timestamp_s is not None:
                obj["timestamp_s"] = float(np.float32(r.timestamp_s))
            obj["features"] = [float(v) for v in _f32(r.features.values)]
            f.write(json.dumps(obj, sort_keys=True) + "\n")


def _parse_jsonl_line(line: str, lineno: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise StreamFormatError(f"malformed JSON at line {lineno}: {e}") from e
    if not isinstance(obj, dict):
        raise StreamFormatError(f"line {lineno} is not a JSON object")
    return obj


def _read_jsonl_header(f: IO[str]) -> StreamHeader:
    first = f.readline()
    if not first.strip():
        raise StreamFormatError("empty file; expected a JSON-lines header")
    obj = _parse_jsonl_line(first, 1)
    if "dim" not in obj or "fps" not in obj:
        raise StreamFormatError("header line must carry 'dim' and 'fps'")
    try:
        return StreamHeader(
            dim=int(obj["dim"]),
            fps=float(obj["fps"]),
            record_count_hint=(
                int(obj["record_count_hint"]) if "record_count_hint" in obj else None
            ),
        )
    except MalformedInputError as e:
        raise StreamFormatError(f"invalid header: {e}") from e


def _iter_jsonl_records(f: IO[str], dim: int) -> Iterator[FrameRecord]:
    last = -1
    for lineno, line in enumerate(f, start=2):
        if not line.strip():
            continue
        obj = _parse_jsonl_line(line, lineno)
        try:
            frame_index = int(obj["frame_index"])
            features = obj["features"]
        except KeyError as e:
            raise StreamFormatError(f"line {lineno} is missing {e}") from None
        if len(features) != dim:
            raise StreamFormatError(
                f"line {lineno}: expected {dim} feature values, got {len(features)}"
            )
        if frame_index <= last:
            raise NonMonotoneIndexError(
                f"frame_index {frame_index} follows {last} at line {lineno}; "
                "indices must be strictly increasing"
            )
        last = frame_index
        ts = obj.get("timestamp_s")
        yield FrameRecord(
            frame_index,
            FeatureVector.of(np.asarray(features, dtype=np.float64)),
            None if ts is None else float(ts),
        )


# -- format-agnostic entry points -------------------------------------------------


def detect_format(path) -> str:
    """'jsonl' when the first non-whitespace byte opens a JSON object,
    'binary' otherwise (binary parsing then validates the magic)."""
    with open(path, "rb") as f:
        head = f.read(64)
    return "jsonl" if head.lstrip()[:1] == b"{" else "binary"


def open_stream(path) -> Tuple[StreamHeader, Iterator[FrameRecord]]:
    """Header plus a lazy record iterator; auto-detects the format.

    The iterator holds the file open until exhausted; memory stays bounded
    by one record regardless of stream length.
    """
    path = Path(path)
    if detect_format(path) == "binary":

        def gen_binary() -> Iterator[FrameRecord]:
            with open(path, "rb") as f:
                f.seek(_HEADER.size)
                yield from _iter_binary_records(f, header.dim)

        with open(path, "rb") as f:
            header = _read_binary_header(f)
        return header, gen_binary()

    def gen_jsonl() -> Iterator[FrameRecord]:
        with open(path, "r", encoding="utf-8") as f:
            f.readline()
            yield from _iter_jsonl_records(f, header.dim)

    with open(path, "r", encoding="utf-8") as f:
        header = _read_jsonl_header(f)
    return header, gen_jsonl()


def read_stream(path) -> StreamFile:
    """Materialize a whole stream file (either format) into memory."""
    header, records = open_stream(path)
    return StreamFile(header=header, records=tuple(records))


def write(path, stream: StreamFile, fmt: str = "binary") -> None:
    if fmt == "binary":
        write_stream(path, stream)
    elif fmt == "jsonl":
        write_stream_jsonl(path, stream)
    else:
        raise MalformedInputError(f"unknown stream format {fmt!r}")
