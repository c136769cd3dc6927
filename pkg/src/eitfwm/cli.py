"""Command line: ``eitfwm run``, ``eitfwm list-presets`` and ``eitfwm show-preset``.

Exit status is 0 on success, 2 when the spec (or a value derived from it)
is invalid and 3 when a solver fails.  Failures print one JSON object on
stderr, and also write ``error.json`` when ``--out`` was given.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import load_spec
from .exceptions import EitFwmError, SolverError, SpecValidationError
from .io import write_json
from .presets import list_presets, load_preset, preset_text

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _error_payload(exc: BaseException, category: str) -> dict:
    payload = {"status": "error", "category": category, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, SpecValidationError):
        payload["issues"] = [{"field": f, "message": m} for f, m in exc.issues]
    return payload


def _fail(exc: BaseException, category: str, code: int, out: Optional[str]) -> int:
    payload = _error_payload(exc, category)
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    if out:
        try:
            write_json(Path(out) / "error.json", payload)
        except OSError:
            pass
    return code


def _cmd_run(args) -> int:
    from .runner import run_experiment

    try:
        if (args.spec is None) == (args.preset is None):
            raise SpecValidationError([("arguments", "give exactly one of --spec or --preset")])
        if args.preset is not None:
            try:
                spec = load_preset(args.preset)
            except KeyError as exc:
                raise SpecValidationError([("preset", exc.args[0])]) from None
        else:
            spec = load_spec(args.spec)
    except SpecValidationError as exc:
        return _fail(exc, "validation", EXIT_VALIDATION, args.out)

    out = args.out or spec.output_dir or str(Path("eitfwm_out") / spec.options.name)
    log = (lambda msg: None) if args.quiet else (lambda msg: print(msg, file=sys.stderr, flush=True))
    try:
        outcome = run_experiment(spec, out, dump=args.dump, log=log)
    except SolverError as exc:
        return _fail(exc, "solver", EXIT_SOLVER, out)
    except (EitFwmError, ValueError) as exc:
        return _fail(exc, "validation", EXIT_VALIDATION, out)
    except OSError as exc:
        return _fail(exc, "io", EXIT_VALIDATION, None)
    if not args.quiet:
        print(f"{len(outcome.files)} files written to {outcome.out_dir} (manifest: {outcome.manifest.name})")
    return EXIT_OK


def _cmd_list(args) -> int:
    rows = list_presets()
    width = max(len(n) for n, _ in rows)
    for name, desc in rows:
        print(f"{name:<{width}}  {desc}")
    return EXIT_OK


def _cmd_show(args) -> int:
    try:
        sys.stdout.write(preset_text(args.name))
    except KeyError as exc:
        return _fail(SpecValidationError([("preset", exc.args[0])]), "validation", EXIT_VALIDATION, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eitfwm", description="Signal and Stokes pulses under EIT and four-wave mixing.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment spec or preset")
    run.add_argument("--spec", help="path to an INI experiment spec")
    run.add_argument("--preset", help="name of a built-in preset (see list-presets)")
    run.add_argument("--out", help="output directory (default: spec output_dir or eitfwm_out/<name>)")
    run.add_argument("--dump", action="store_true", help="also write full space-time fields")
    run.add_argument("--quiet", action="store_true", help="no progress output")
    run.set_defaults(func=_cmd_run)
    lp = sub.add_parser("list-presets", help="list built-in presets")
    lp.set_defaults(func=_cmd_list)
    sp = sub.add_parser("show-preset", help="print a preset's spec text")
    sp.add_argument("name")
    sp.set_defaults(func=_cmd_show)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
