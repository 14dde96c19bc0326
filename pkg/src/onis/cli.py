"""Command-line entry point.

Subcommands: ``sample`` (run the online sampler over a stream file),
``evaluate`` (score samples with SRUM), ``gen`` (synthetic streams),
``inspect`` (dump a stream file), ``convert`` (binary <-> JSON lines).

Exit codes: 0 success, 1 usage error, 2 malformed input file, 3 internal
invariant violation. Diagnostics go to stderr; results go to files or
stdout. ``ONIS_LOG={error|info|debug}`` controls verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .distances import DistanceKind
from .errors import InvariantError, MalformedInputError, OnisError
from .featstream import StreamFile, open_stream, read_stream, write
from .sampler import OnlineSampler, SamplerConfig
from .srum import LabelMap, SrumParams, human_benchmark, percent_of_human, srum
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger("onis")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MALFORMED = 2
EXIT_INTERNAL = 3

_DISTANCE_CHOICES = ("symmetric-kl", "euclidean", "cosine")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def _configure_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("ONIS_LOG", "error").strip().lower(), logging.ERROR
    )
    logging.basicConfig(
        level=level, stream=sys.stderr, format="onis: %(levelname)s: %(message)s"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="onis", description="Online informative sampling toolkit")
    parser.add_argument("--version", action="version", version=f"onis {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run the online sampler over a stream file")
    p.add_argument("--input", required=True, help="stream file (binary or JSON lines)")
    p.add_argument("--k", type=int, default=6, help="sample size (default 6)")
    p.add_argument("--distance", choices=_DISTANCE_CHOICES, default="symmetric-kl")
    p.add_argument("--kl-epsilon", type=float, default=1e-10,
                   help="smoothing epsilon for symmetric-kl (default 1e-10)")
    p.add_argument("--output", required=True, help="sample JSON to write")
    p.add_argument("--trace", help="optional per-record CSV trace")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("evaluate", help="score an automated sample with SRUM")
    p.add_argument("--auto", required=True, help="automated sample JSON")
    p.add_argument("--human", required=True, action="append",
                   help="human sample JSON (repeatable)")
    p.add_argument("--labels", required=True, help="frame-to-labels JSON map")
    p.add_argument("--alpha", type=float, default=0.75,
                   help="semantic score weight in [0,1] (default 0.75)")
    p.add_argument("--fps", type=float,
                   help="override the fps recorded in the sample files")
    p.add_argument("--report", help="optional detailed report JSON to write")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("gen", help="generate a synthetic clustered stream")
    p.add_argument("--spec", required=True, help="synthetic spec JSON")
    p.add_argument("--output", required=True,
                   help="stream file to write (.jsonl selects JSON lines)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("inspect", help="print a stream file's header and records")
    p.add_argument("stream", help="stream file (binary or JSON lines)")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("convert", help="convert between stream formats")
    p.add_argument("--to", required=True, choices=("binary", "jsonl"), dest="target")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_convert)

    return parser


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _cmd_sample(args) -> int:
    config = SamplerConfig(
        k=args.k,
        distance=DistanceKind.from_cli_name(args.distance, epsilon=args.kl_epsilon),
    )
    header, records = open_stream(args.input)
    sampler = OnlineSampler(config)

    trace_file = None
    trace_writer = None
    if args.trace:
        trace_file = open(args.trace, "w", encoding="utf-8", newline="")
        trace_writer = csv.writer(trace_file)
        trace_writer.writerow(
            ["frame_index", "surprise", "threshold", "admitted", "evicted_frame_index"]
        )
    try:
        n = 0
        for record in records:
            outcome = sampler.observe(record)
            n += 1
            if trace_writer is not None:
                trace_writer.writerow(
                    [
                        record.frame_index,
                        _fmt_float(outcome.surprise),
                        _fmt_float(outcome.threshold),
                        "true" if outcome.admitted else "false",
                        "" if outcome.evicted_frame_index is None
                        else outcome.evicted_frame_index,
                    ]
                )
    finally:
        if trace_file is not None:
            trace_file.close()

    sample = sampler.finalize()
    log.info("sampled %d of %d records", len(sample), n)
    payload = {"frames": [r.frame_index for r in sample], "fps": header.fps}
    Path(args.output).write_text(
        json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8"
    )
    return EXIT_OK


def _load_sample(path) -> tuple[list[int], float]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"sample file {path} is not valid JSON: {e}") from e
    if not isinstance(obj, dict) or "frames" not in obj or "fps" not in obj:
        raise MalformedInputError(
            f"sample file {path} must be an object with 'frames' and 'fps'"
        )
    frames = [int(f) for f in obj["frames"]]
    return frames, float(obj["fps"])


def _cmd_evaluate(args) -> int:
    auto_frames, auto_fps = _load_sample(args.auto)
    humans = [_load_sample(p) for p in args.human]
    if args.fps is not None:
        fps = args.fps
    else:
        fps_values = {auto_fps} | {f for _, f in humans}
        if len(fps_values) > 1:
            raise MalformedInputError(
                f"sample files disagree on fps ({sorted(fps_values)}); "
                "pass --fps to override"
            )
        fps = auto_fps
    labels = LabelMap.from_json_file(args.labels)
    params = SrumParams(srum_alpha=args.alpha, fps=fps)

    reports = [srum(auto_frames, frames, labels, params) for frames, _ in humans]
    average = sum(r.score for r in reports) / len(reports)
    benchmark = None
    percent = None
    if len(humans) >= 2:
        benchmark = human_benchmark([frames for frames, _ in humans], labels, params)
        if benchmark > 0.0:
            percent = percent_of_human(average, benchmark)

    print(f"SRUM evaluation  alpha={params.srum_alpha}  fps={params.fps}")
    for path, report in zip(args.human, reports):
        print(f"  vs {path}: {report.score:.6f}")
    print(f"  average: {average:.6f}")
    if benchmark is not None:
        print(f"  human benchmark (leave-one-out): {benchmark:.6f}")
    if percent is not None:
        print(f"  percent of human: {percent:.1f}%")

    if args.report:
        payload = {
            "alpha": params.srum_alpha,
            "fps": params.fps,
            "auto": str(args.auto),
            "per_human_sample": [
                {
                    "sample": str(path),
                    "score": report.score,
                    "per_human_frame": [
                        {
                            "human_frame": m.human_frame,
                            "auto_frame": m.auto_frame,
                            "score": m.score,
                        }
                        for m in report.per_human_frame
                    ],
                }
                for path, report in zip(args.human, reports)
            ],
            "average": average,
            "human_benchmark": benchmark,
            "percent_of_human": percent,
        }
        Path(args.report).write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        obj = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"spec file {args.spec} is not valid JSON: {e}") from e
    spec = SyntheticSpec.from_mapping(obj)
    stream = generate_synthetic(spec)
    fmt = "jsonl" if str(args.output).endswith(".jsonl") else "binary"
    write(args.output, stream, fmt)
    log.info("wrote %d records to %s (%s)", len(stream.records), args.output, fmt)
    return EXIT_OK


def _cmd_inspect(args) -> int:
    header, records = open_stream(args.stream)
    hint = header.record_count_hint
    print(f"dim={header.dim} fps={header.fps}"
          + (f" record_count_hint={hint}" if hint is not None else ""))
    n = 0
    for r in records:
        v = r.features.values
        ts = "-" if r.timestamp_s is None else f"{r.timestamp_s:.3f}"
        print(
            f"frame {r.frame_index}  t={ts}  "
            f"min={v.min():.4f} max={v.max():.4f} mean={v.mean():.4f}"
        )
        n += 1
    print(f"{n} records")
    return EXIT_OK


def _cmd_convert(args) -> int:
    stream = read_stream(args.input)
    write(args.output, stream, args.target)
    return EXIT_OK


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"onis: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    try:
        return args.func(args)
    except _UsageError as e:
        print(f"onis: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"onis: error: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except MalformedInputError as e:
        print(f"onis: error: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except InvariantError as e:
        print(f"onis: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except OnisError as e:
        print(f"onis: error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
