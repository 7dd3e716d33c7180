"""Command-line entry point.

    fourierlaplace --case JKTVI
    fourierlaplace --case JKTII --param b=2 --param t=3 --format structured
    fourierlaplace --file connection.json --truncation 16,32
    fourierlaplace --mode verify
    fourierlaplace --mode properties --seed 7

Exit codes: 0 ok, 2 verification failure, 3 parse error, 4 unsupported germ,
5 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .catalog import build_case, case_names, get_case, verify_case
from .driver import TransformReport, fourier_transform
from .errors import ConsistencyFailure, ConstraintViolation, FLError, ParseError, UnsupportedGermShape
from .germ import GlobalConnection
from .scalar import parse_scalar, set_zero_test_seed

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_PARSE = 3
EXIT_UNSUPPORTED = 4
EXIT_CONSISTENCY = 5

MIN_TRUNCATION = (8, 16)
DEFAULT_TRUNCATION = (12, 24)


@dataclass
class RunConfig:
    case: Optional[str] = None
    file: Optional[str] = None
    params: Dict[str, str] = field(default_factory=dict)
    truncation: Tuple[int, int] = DEFAULT_TRUNCATION
    seed: int = 0
    mode: str = "transform"
    format: str = "text"

    def transform_options(self) -> dict:
        n, m = self.truncation
        # inverses of the scalar operators start at ŵ-order 1 or 2; N counts known orders past that
        return dict(terms=n, order=n + 2, space_bound=m)


def parse_truncation(text: str) -> Tuple[int, int]:
    try:
        n, m = (int(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"truncation must look like N,M, got {text!r}") from None
    if n < MIN_TRUNCATION[0] or m < MIN_TRUNCATION[1]:
        raise ParseError(f"truncation {n},{m} is below the minimum {MIN_TRUNCATION[0]},{MIN_TRUNCATION[1]}")
    return n, m


def parse_params(items: Sequence[str]) -> Dict[str, str]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name.isidentifier() or not value.strip():
            raise ParseError(f"parameter binding must look like name=value, got {item!r}")
        if name in out:
            raise ParseError(f"parameter {name} bound twice")
        out[name] = value.strip()
    return out


def load_connection(cfg: RunConfig) -> GlobalConnection:
    if cfg.case and cfg.file:
        raise ParseError("give either --case or --file, not both")
    if cfg.case:
        return build_case(cfg.case, cfg.params)
    if not cfg.file:
        raise ParseError("transform mode needs --case or --file")
    try:
        text = Path(cfg.file).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {cfg.file}: {exc.strerror}") from None
    G = GlobalConnection.loads(text)
    if cfg.params:
        values = {k: parse_scalar(v) for k, v in cfg.params.items()}
        G = G.map_scalars(lambda s: s.substitute(values))
    return G


def _failing_checks(report: Optional[TransformReport]) -> List[str]:
    if report is None:
        return []
    return [c.name for c in report.checks if not c.ok]


def run_transform(cfg: RunConfig) -> Tuple[int, str]:
    G = load_connection(cfg)
    report = fourier_transform(G, **cfg.transform_options())
    return EXIT_OK, report.dumps() if cfg.format == "structured" else report.summary()


def run_verify(cfg: RunConfig) -> Tuple[int, str]:
    if cfg.file:
        raise ParseError("verify mode works on catalog cases only")
    names = [get_case(cfg.case).name] if cfg.case else case_names()
    if cfg.params and not cfg.case:
        raise ParseError("parameter bindings in verify mode need a single --case")
    results = [verify_case(n, cfg.params or None, **cfg.transform_options()) for n in names]
    status = EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY
    if cfg.format == "structured":
        doc = [{"case": r.name, "ok": r.ok, "diffs": list(r.diffs)} for r in results]
        return status, json.dumps(doc, indent=2, ensure_ascii=False)
    return status, "\n".join(str(r) for r in results)


def run_properties(cfg: RunConfig) -> Tuple[int, str]:
    from .properties import run_properties as run_all
    checks = run_all(cfg.seed)
    status = EXIT_OK if all(c.ok for c in checks) else EXIT_VERIFY
    if cfg.format == "structured":
        doc = {"seed": cfg.seed, "suites": [c.to_dict() for c in checks]}
        return status, json.dumps(doc, indent=2, ensure_ascii=False)
    lines = [f"{c.name}: {'PASS' if c.ok else 'FAIL'} ({c.details})" for c in checks]
    return status, "\n".join(lines)


MODES = {"transform": run_transform, "verify": run_verify, "properties": run_properties}


def run(cfg: RunConfig) -> Tuple[int, str]:
    """Execute one configuration; returns the exit status and the text to emit."""
    set_zero_test_seed(cfg.seed)
    try:
        return MODES[cfg.mode](cfg)
    except (ParseError, ConstraintViolation) as exc:
        return EXIT_PARSE, f"error: {exc}"
    except UnsupportedGermShape as exc:
        return EXIT_UNSUPPORTED, f"unsupported germ: {exc}"
    except ConsistencyFailure as exc:
        report = getattr(exc, "report", None)
        msg = f"consistency failure: {exc}"
        failing = _failing_checks(report)
        if failing:
            msg += "\nfailing checks: " + ", ".join(failing)
        if report is not None:
            msg += "\n" + (report.dumps() if cfg.format == "structured" else report.summary())
        return EXIT_CONSISTENCY, msg
    except FLError as exc:
        return EXIT_CONSISTENCY, f"internal error ({type(exc).__name__}): {exc}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fourierlaplace",
                                description="Formal Fourier-Laplace transform of meromorphic connections on P^1.")
    p.add_argument("--case", help=f"catalog case ({', '.join(case_names())})")
    p.add_argument("--file", help="JSON connection description")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                   help="bind a parameter (repeatable)")
    p.add_argument("--truncation", default=f"{DEFAULT_TRUNCATION[0]},{DEFAULT_TRUNCATION[1]}", metavar="N,M",
                   help="series order N and operator space order M (minimum 8,16)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=sorted(MODES), default="transform")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=["text", "structured"], default="text")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(case=args.case, file=args.file, params=parse_params(args.param),
                        truncation=parse_truncation(args.truncation), seed=args.seed,
                        mode=args.mode, format=args.format)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    status, text = run(cfg)
    stream_err = status in (EXIT_PARSE, EXIT_UNSUPPORTED)
    if args.out and not stream_err:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text, file=sys.stderr if stream_err else sys.stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())
