"""Command line entry point for one-shot edits.

    dragwarp --spec edit.json --out result.png [--backend pixel|toy-latent]
             [--diag diagnostics.json] [--seed N]

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as dio
from .pipeline import edit
from .validation import InvalidRequestError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dragwarp", description="Apply one drag edit from a spec file.")
    parser.add_argument("--spec", required=True, help="path to the JSON drag spec")
    parser.add_argument("--out", required=True, help="output image path (.png or .ppm)")
    parser.add_argument("--backend", choices=["pixel", "toy-latent"], help="override spec backend")
    parser.add_argument("--diag", help="optional diagnostics JSON output path")
    parser.add_argument("--seed", type=int, help="override spec seed")
    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    spec_path = Path(args.spec)
    try:
        text = spec_path.read_text()
    except OSError as exc:
        print(f"validation error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        doc = dio.parse_drag_spec(text)
    except dio.SpecError as exc:
        for path, message in exc.errors:
            print(f"validation error: {path}: {message}", file=sys.stderr)
        return EXIT_VALIDATION

    config = doc.config
    if args.backend:
        config = config.replace(backend=args.backend)
    if args.seed is not None:
        config = config.replace(seed=args.seed)

    base = spec_path.parent
    try:
        image = doc.load_image_array(base)
        mask = doc.load_mask_bitmap(base)
    except (OSError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        outcome = edit(image, mask, doc.drag_set(), config)
    except InvalidRequestError as exc:
        for issue in exc.issues:
            print(f"validation error: {issue}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, KeyError) as exc:
        # Geometry or mask construction failures surface as validation too.
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    try:
        dio.save_image(args.out, outcome.image)
        if args.diag:
            dio.write_diagnostics(args.diag, outcome)
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    print(f"wrote {args.out}")
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
