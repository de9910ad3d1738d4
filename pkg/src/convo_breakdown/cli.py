"""Command-line front end: generate, detect, report, compare, model-check.

Exit codes: 0 success, 1 breakdown found (only with ``--fail-on-breakdown``),
2 usage or configuration error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import (
    FORMATS,
    STATS_HEADER,
    aggregate_patterns,
    attribution_counts,
    compare_iterations,
    render_report,
    render_stats_row,
    stats_to_dict,
)
from .detectors import DetectorConfig, flagged_counts, parse_findings, run_detectors, serialize_findings
from .dialogue import CorpusReadError, IntentLabel, TranscriptError, dumps_canonical, load_corpus, write_corpus
from .interaction import MODEL_ENV_VAR, ModelError, default_model_text, load_model
from .simulation.config import ConfigError, parse_profile, profile_source
from .simulation.runner import generate_corpus

EXIT_OK = 0
EXIT_BREAKDOWN = 1
EXIT_USAGE = 2
EXIT_IO = 3

MANIFEST_NAME = "manifest.json"
BUILTIN_MODEL = "builtin:default_model.json"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    """What a ``generate`` run read and wrote, enough to reproduce and verify it."""

    command: str
    seed: int
    n: int
    tool_version: str = __version__
    config_digests: list[tuple[str, str]] = field(default_factory=list)
    inputs: list[str] = field(default_factory=list)
    outputs: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "n": self.n,
            "tool_version": self.tool_version,
            "config_digests": [{"name": k, "sha256": v} for k, v in self.config_digests],
            "inputs": list(self.inputs),
            "outputs": [{"path": k, "sha256": v} for k, v in self.outputs],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RunManifest":
        return cls(
            command=obj["command"],
            seed=obj["seed"],
            n=obj["n"],
            tool_version=obj["tool_version"],
            config_digests=[(c["name"], c["sha256"]) for c in obj["config_digests"]],
            inputs=list(obj["inputs"]),
            outputs=[(o["path"], o["sha256"]) for o in obj["outputs"]],
        )


def _read_source(name: str) -> str:
    """Text behind a manifest input: ``builtin:...`` resources or a file path."""
    if name == BUILTIN_MODEL:
        return default_model_text()
    if name.startswith("builtin:"):
        return profile_source(name[len("builtin:"):].removesuffix(".cfg"))[0]
    return Path(name).read_text(encoding="utf-8")


def verify_manifest(directory: str | Path) -> list[str]:
    """Recompute every digest a manifest references; return the mismatches."""
    directory = Path(directory)
    manifest = RunManifest.from_dict(json.loads((directory / MANIFEST_NAME).read_text(encoding="utf-8")))
    problems = []
    for name, digest in manifest.config_digests:
        try:
            actual = sha256_text(_read_source(name))
        except (OSError, ConfigError) as exc:
            problems.append(f"{name}: unreadable ({exc})")
            continue
        if actual != digest:
            problems.append(f"{name}: digest mismatch")
    for rel, digest in manifest.outputs:
        p = directory / rel
        if not p.is_file():
            problems.append(f"{rel}: missing")
        elif sha256_file(p) != digest:
            problems.append(f"{rel}: digest mismatch")
    return problems


# --- shared helpers ---

def _model_source(path: str | None) -> tuple[str, str]:
    path = path or os.environ.get(MODEL_ENV_VAR)
    if not path:
        return default_model_text(), BUILTIN_MODEL
    try:
        return Path(path).read_text(encoding="utf-8"), path
    except OSError as exc:
        raise CliError(f"cannot read model {path!r}: {exc.strerror}") from None


def _load_model(path: str | None):
    text, label = _model_source(path)
    try:
        return load_model(text), text, label
    except ModelError as exc:
        raise CliError(f"invalid model {label}: {exc}") from None


def _load_corpus(path: str):
    if not Path(path).exists():
        raise CliError(f"corpus not found: {path}")
    try:
        return load_corpus(path)
    except CorpusReadError as exc:
        raise CliError(f"cannot read transcript {exc.path}: {exc.cause}") from None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror}", EXIT_IO) from None


# --- commands ---

def cmd_generate(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise CliError(f"--n must be >= 1, got {args.n}")
    try:
        profile_text, profile_label = profile_source(args.profile)
        profile = parse_profile(profile_text, Path(args.profile).stem)
    except ConfigError as exc:
        raise CliError(f"invalid profile: {exc}") from None
    model, model_text, model_label = _load_model(args.model)

    corpus = generate_corpus(
        args.n, profile.defects, profile.simulator, model, args.seed,
        workers=args.workers, iteration=profile.iteration,
    )
    out = Path(args.out)
    try:
        written = write_corpus(out, corpus)
        manifest = RunManifest(
            command="generate",
            seed=args.seed,
            n=args.n,
            config_digests=[(profile_label, sha256_text(profile_text)), (model_label, sha256_text(model_text))],
            inputs=[profile_label, model_label],
            outputs=[(p.name, sha256_file(p)) for p in written],
        )
        (out / MANIFEST_NAME).write_text(dumps_canonical(manifest.to_dict()), encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write corpus to {out}: {exc.strerror}", EXIT_IO) from None
    print(f"wrote {len(written)} dialogues to {out}")
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    try:
        cfg = DetectorConfig(dod_window=args.window, text_similarity_threshold=args.similarity_threshold)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    model, _, _ = _load_model(args.model)
    corpus = _load_corpus(args.input)
    findings = run_detectors(corpus, model, cfg, workers=args.workers)
    counts = flagged_counts(findings)
    summary = " ".join(f"{det.value}={n}" for det, n in counts.items())
    if args.out:
        _emit(serialize_findings(findings), args.out)
        print(summary)
    else:
        # findings own stdout; the human summary goes to stderr
        sys.stdout.write(serialize_findings(findings))
        print(summary, file=sys.stderr)
    if args.fail_on_breakdown and any(counts.values()):
        return EXIT_BREAKDOWN
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    try:
        findings = parse_findings(Path(args.findings).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read findings {args.findings}: {exc.strerror}") from None
    except TranscriptError as exc:
        raise CliError(f"invalid findings {args.findings}: {exc}") from None
    summaries = aggregate_patterns(findings)
    attributions = attribution_counts(findings) if args.attribution else None
    _emit(render_report(summaries, attributions, fmt=args.format), args.out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    cur = _load_corpus(args.cur)
    if not cur:
        raise CliError(f"corpus is empty: {args.cur}")
    prev = _load_corpus(args.prev) if args.prev else []
    stats = compare_iterations(prev, cur)
    if args.format == "structured":
        _emit(dumps_canonical({"label": args.label, "first_iteration": not args.prev, "stats": stats_to_dict(stats)}), args.out)
    else:
        _emit(f"{STATS_HEADER}\n{render_stats_row(args.label, stats, first_iteration=not args.prev)}\n", args.out)
    return EXIT_OK


def cmd_model_check(args: argparse.Namespace) -> int:
    model, _, label = _load_model(args.model)
    print(f"{label}: {model.name} {model.version}, {len(model.nodes)} nodes, {len(model.edges)} edges")
    if args.path is not None:
        try:
            path = [IntentLabel.parse(x.strip()) for x in args.path.split(",") if x.strip()]
        except ValueError as exc:
            raise CliError(f"bad --path: {exc}") from None
        print(model.is_valid_path(path))
    return EXIT_OK


# --- parser ---

def _workers(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convo-breakdown",
        description="Detect and summarize breakdowns in recommender dialogues.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    model_help = f"interaction model JSON (default: ${MODEL_ENV_VAR} or the bundled model)"

    p = sub.add_parser("generate", help="simulate a corpus of conversations")
    p.add_argument("--n", type=int, default=100, help="number of dialogues (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", default="iteration-1", help="preset name (iteration-1..6) or .cfg path")
    p.add_argument("--model", help=model_help)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=_workers, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="run the three detectors over a corpus")
    p.add_argument("--in", dest="input", required=True, help="corpus directory or document")
    p.add_argument("--model", help=model_help)
    p.add_argument("--window", type=int, default=3, help="repetition window for dialogue of the deaf")
    p.add_argument("--similarity-threshold", type=float, default=0.9)
    p.add_argument("--out", help="findings file (default: stdout)")
    p.add_argument("--workers", type=_workers, default=1)
    p.add_argument("--fail-on-breakdown", action="store_true", help="exit 1 if anything is flagged")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("report", help="render pattern summaries from findings")
    p.add_argument("--findings", required=True)
    p.add_argument("--format", choices=FORMATS, default="table-text")
    p.add_argument("--attribution", action="store_true", help="append CRS/US attribution counts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compare", help="conversational path statistics against a previous iteration")
    p.add_argument("--prev", help="previous iteration corpus (omit for the first iteration)")
    p.add_argument("--cur", required=True)
    p.add_argument("--label", default="Current")
    p.add_argument("--format", choices=("table-text", "structured"), default="table-text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("model-check", help="validate an interaction model, optionally test a path")
    p.add_argument("--model", help=model_help)
    p.add_argument("--path", help="comma-separated intent labels")
    p.set_defaults(func=cmd_model_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
