"""Command line entry point: ``sagecs <subcommand>``.

Exit codes: 0 success, 1 validation error, 2 usage or I/O error.
Logs go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .audio import AudioFormatError
from .corpus import (
    CtmParseError,
    LanguageTag,
    ManifestError,
    build_utterances,
    read_audio_index,
    read_ctm,
)
from .sampler import InfeasibleBudgetError, emit_mixture, plan_mixture, read_budgets
from .scoring import corpus_stats, format_report, score_files
from .splicer import SpliceConfig, eligible_for_splicing, generate_dataset
from .textnorm import load_acronym_table, normalize

log = logging.getLogger("sagecs")

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


def _load_utterances(index_path, ctm_paths):
    index = read_audio_index(index_path)
    alignments = []
    for p in ctm_paths:
        try:
            alignments.extend(read_ctm(p))
        except CtmParseError as exc:
            raise CtmParseError(exc.lineno, f"{p}: {exc}") from None
    return build_utterances(alignments, index)


def cmd_validate(args) -> int:
    utts, errors = _load_utterances(args.audio_index, args.ctm)
    report = {
        "valid_utterances": len(utts),
        "rejected_utterances": len(errors),
        "errors": [
            {"utterance_id": e.utterance_id, "reason": e.reason, "word_indices": list(e.word_indices)}
            for e in errors
        ],
    }
    json.dump(report, sys.stdout, ensure_ascii=False, indent=2)
    sys.stdout.write("\n")
    return EXIT_INVALID if errors else EXIT_OK


def cmd_normalize(args) -> int:
    acronyms = load_acronym_table(args.acronyms) if args.acronyms else None
    src = open(args.input, encoding="utf-8") if args.input else sys.stdin
    dst = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for lineno, line in enumerate(src, 1):
            result = normalize(line.rstrip("\n"), args.lang, acronyms)
            for flag in result.flags:
                log.warning("line %d: %s %r", lineno, flag.reason, flag.token)
            dst.write(str(result) + "\n")
    finally:
        if args.input:
            src.close()
        if args.output:
            dst.close()
    return EXIT_OK


SPLICE_OPTIONS = {f.name for f in fields(SpliceConfig)}


def _splice_config(args) -> tuple[SpliceConfig, dict]:
    file_cfg = {}
    if args.config:
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(file_cfg, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
    merged = {}
    run = {}
    for key in SPLICE_OPTIONS | {"seed", "hours", "workers"}:
        flag = getattr(args, key, None)
        value = flag if flag is not None else file_cfg.get(key)
        if value is None:
            continue
        (merged if key in SPLICE_OPTIONS else run)[key] = value
    unknown = set(file_cfg) - SPLICE_OPTIONS - {"seed", "hours", "workers"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SpliceConfig(**merged), run


def cmd_splice(args) -> int:
    config, run = _splice_config(args)
    seed = int(run.get("seed", 0))
    hours = run.get("hours")
    if hours is None:
        raise ValueError("--hours is required (flag or config file)")
    workers = int(run.get("workers", 1))
    utts, errors = _load_utterances(args.audio_index, args.ctm)
    for e in errors:
        log.warning("skipping %s: %s", e.utterance_id, e.reason)
    pools = {LanguageTag.ARABIC: [], LanguageTag.ENGLISH: []}
    skipped = 0
    for u in utts:
        if eligible_for_splicing(u):
            pools[u.language].append(u)
        else:
            skipped += 1
    if skipped:
        log.warning("%d utterance(s) with unnormalized or flagged words excluded", skipped)
    records = generate_dataset(
        pools[LanguageTag.ARABIC], pools[LanguageTag.ENGLISH], float(hours), config, seed,
        args.out_dir, workers=workers,
    )
    log.info("wrote %d utterances to %s", len(records), args.out_dir)
    return EXIT_OK


def cmd_mix(args) -> int:
    plan = plan_mixture(read_budgets(args.budgets), args.seed)
    emit_mixture(plan, args.output)
    for name, sel in plan.pools.items():
        log.info("%s: %d utterances, %.4f h (budget %.4f h)", name, len(sel.utterance_ids),
                 sel.achieved_hours, sel.budget_hours)
    return EXIT_OK


def cmd_wer(args) -> int:
    report = score_files(args.ref, args.hyp)
    payload = report.to_dict() if args.dissect else {"overall": report.overall.to_dict()}
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.dissect:
        print(format_report(report))
    else:
        print(json.dumps(payload["overall"]))
    return EXIT_OK


def cmd_stats(args) -> int:
    json.dump(corpus_stats(args.manifest).to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sagecs", description="Spliced code-switched speech corpus tools.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check CTM alignments against an audio index")
    s.add_argument("--audio-index", required=True)
    s.add_argument("--ctm", required=True, action="append")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("normalize", help="normalize transcripts, one per line")
    s.add_argument("--lang", choices=["ar", "en"])
    s.add_argument("--input")
    s.add_argument("--output")
    s.add_argument("--acronyms", help="TSV of acronym<TAB>expansion")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("splice", help="generate spliced code-switched audio")
    s.add_argument("--audio-index", required=True)
    s.add_argument("--ctm", required=True, action="append")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--config", help="JSON file; flags override it")
    s.add_argument("--hours", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--direction-prob", dest="direction_prob", type=float)
    s.add_argument("--xfade-ms", dest="xfade_ms", type=float)
    s.add_argument("--min-span", dest="min_span", type=int)
    s.add_argument("--max-span", dest="max_span", type=int)
    s.add_argument("--gain-min", dest="gain_min", type=float)
    s.add_argument("--gain-max", dest="gain_max", type=float)
    s.add_argument("--volume-mode", dest="volume_mode", choices=["match_base", "peak"])
    s.set_defaults(func=cmd_splice)

    s = sub.add_parser("mix", help="compose an hour-budgeted training mixture")
    s.add_argument("--budgets", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_mix)

    s = sub.add_parser("wer", help="score hypotheses against a reference manifest")
    s.add_argument("--ref", required=True)
    s.add_argument("--hyp", required=True)
    s.add_argument("--dissect", action="store_true", help="break down by Ar / En / CS utterances")
    s.add_argument("--json", help="also write the report as JSON")
    s.set_defaults(func=cmd_wer)

    s = sub.add_parser("stats", help="corpus statistics for a manifest")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleBudgetError, ManifestError, CtmParseError, AudioFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
