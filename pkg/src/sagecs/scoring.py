"""Word error rate with S/D/I breakdown, dissected by utterance category."""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import ManifestRecord, read_manifest
from .textnorm import TokenClass, classify_token

SUB, INS, DEL, MATCH = "S", "I", "D", "="


@dataclass(frozen=True)
class WerReport:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_words: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        if self.ref_words == 0:
            return float("nan")
        return self.errors / self.ref_words

    def __add__(self, other: "WerReport") -> "WerReport":
        return WerReport(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_words + other.ref_words,
        )

    def to_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "ref_words": self.ref_words,
            "errors": self.errors,
            "wer": None if self.ref_words == 0 else self.wer,
        }


def edit_table(ref: Sequence[str], hyp: Sequence[str]) -> list[list[int]]:
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        row, prev = d[i], d[i - 1]
        row[0] = i
        r = ref[i - 1]
        for j in range(1, m + 1):
            cost = prev[j - 1] + (r != hyp[j - 1])
            if prev[j] + 1 < cost:
                cost = prev[j] + 1
            if row[j - 1] + 1 < cost:
                cost = row[j - 1] + 1
            row[j] = cost
    return d


def align(ref: Sequence[str], hyp: Sequence[str]) -> list[tuple[str, str | None, str | None]]:
    """Minimal-cost alignment as ``(op, ref_word, hyp_word)`` triples.

    Ties on the backtrace prefer match, then substitution, then insertion,
    then deletion.
    """
    d = edit_table(ref, hyp)
    i, j = len(ref), len(hyp)
    ops = []
    while i or j:
        here = d[i][j]
        if i and j and d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]) == here:
            ops.append((MATCH if ref[i - 1] == hyp[j - 1] else SUB, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif j and d[i][j - 1] + 1 == here:
            ops.append((INS, None, hyp[j - 1]))
            j -= 1
        else:
            ops.append((DEL, ref[i - 1], None))
            i -= 1
    ops.reverse()
    return ops


def wer(ref_tokens: Sequence[str], hyp_tokens: Sequence[str]) -> WerReport:
    if not ref_tokens:
        raise ValueError("reference must contain at least one word")
    counts = Counter(op for op, _, _ in align(ref_tokens, hyp_tokens))
    return WerReport(counts[SUB], counts[DEL], counts[INS], len(ref_tokens))


class UtteranceCategory(str, enum.Enum):
    AR_ONLY = "ar_only"
    EN_ONLY = "en_only"
    CS = "cs"


def classify_utterance(ref_tokens: Sequence[str]) -> UtteranceCategory:
    if not ref_tokens:
        raise ValueError("cannot classify an empty utterance")
    classes = set()
    for tok in ref_tokens:
        cls = classify_token(tok)
        if cls is TokenClass.OTHER:
            raise ValueError(f"reference token {tok!r} is neither Arabic nor Latin")
        classes.add(cls)
    if classes == {TokenClass.ARABIC}:
        return UtteranceCategory.AR_ONLY
    if classes == {TokenClass.LATIN}:
        return UtteranceCategory.EN_ONLY
    return UtteranceCategory.CS


@dataclass
class CategoryWerReport:
    overall: WerReport = field(default_factory=WerReport)
    categories: dict[UtteranceCategory, WerReport] = field(default_factory=dict)
    utterances: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {
            "overall": self.overall.to_dict(),
            "categories": {
                c.value: {**r.to_dict(), "utterances": self.utterances[c]}
                for c, r in sorted(self.categories.items(), key=lambda kv: _ORDER.index(kv[0]))
            },
        }

    def short(self) -> str:
        """``Ar / En / CS`` percentages; missing categories show as ``-``."""
        cells = []
        for c in _ORDER:
            r = self.categories.get(c)
            cells.append("-" if r is None else f"{100 * r.wer:.1f}")
        return " / ".join(cells)


_ORDER = [UtteranceCategory.AR_ONLY, UtteranceCategory.EN_ONLY, UtteranceCategory.CS]


def category_wer(pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> CategoryWerReport:
    """Micro-averaged WER per utterance category plus overall.

    Error and reference-word counts are pooled within each category, so the
    overall counts are exactly the sum of the per-category counts.
    """
    report = CategoryWerReport()
    for ref, hyp in pairs:
        cat = classify_utterance(ref)
        r = wer(ref, hyp)
        report.categories[cat] = report.categories.get(cat, WerReport()) + r
        report.utterances[cat] += 1
        report.overall = report.overall + r
    return report


def format_report(report: CategoryWerReport) -> str:
    rows = [("category", "utts", "ref_words", "sub", "del", "ins", "wer%")]
    for cat in _ORDER:
        r = report.categories.get(cat)
        if r is not None:
            rows.append((cat.value, report.utterances[cat], r.ref_words, r.substitutions,
                         r.deletions, r.insertions, f"{100 * r.wer:.2f}"))
    o = report.overall
    rows.append(("overall", sum(report.utterances.values()), o.ref_words, o.substitutions,
                 o.deletions, o.insertions, "-" if o.ref_words == 0 else f"{100 * o.wer:.2f}"))
    cols = list(zip(*[[str(c) for c in row] for row in rows]))
    widths = [max(len(c) for c in col) for col in cols]
    lines = []
    for row in rows:
        cells = [str(c) for c in row]
        padded = [cells[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        lines.append("  ".join(padded))
    return "\n".join(lines)


def read_hypotheses(path) -> dict[str, list[str]]:
    """Load ``{utterance_id, transcript}`` JSONL lines."""
    hyps = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                uid, text = d["utterance_id"], d["transcript"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad hypothesis line: {exc}") from None
            if uid in hyps:
                raise ValueError(f"{path}: line {lineno}: duplicate utterance_id {uid}")
            hyps[uid] = text.split() if isinstance(text, str) else list(text)
    return hyps


def score_files(ref_manifest, hyp_path) -> CategoryWerReport:
    """Join a reference manifest and a hypothesis file on utterance id and score.

    A reference without a hypothesis is scored against an empty hypothesis.
    """
    refs = read_manifest(ref_manifest)
    hyps = read_hypotheses(hyp_path)
    unknown = set(hyps) - {r.utterance_id for r in refs}
    if unknown:
        raise ValueError(f"hypotheses for unknown utterance ids: {sorted(unknown)[:5]}")
    return category_wer((r.transcript, hyps.get(r.utterance_id, [])) for r in refs if r.transcript)


@dataclass
class CorpusStats:
    hours: float
    utterances: int
    tokens: int
    arabic_token_pct: float
    english_token_pct: float
    categories: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "hours": self.hours,
            "utterances": self.utterances,
            "tokens": self.tokens,
            "arabic_token_pct": self.arabic_token_pct,
            "english_token_pct": self.english_token_pct,
            "categories": self.categories,
        }


def corpus_stats(manifest: Iterable[ManifestRecord] | str | Path) -> CorpusStats:
    if isinstance(manifest, (str, Path)):
        manifest = read_manifest(manifest)
    seconds = 0.0
    n_utts = 0
    token_classes: Counter = Counter()
    cats: Counter = Counter()
    for rec in manifest:
        n_utts += 1
        seconds += rec.duration_s
        for tok in rec.transcript:
            token_classes[classify_token(tok)] += 1
        if rec.transcript:
            cats[classify_utterance(rec.transcript).value] += 1
    n_tokens = sum(token_classes.values())

    def pct(cls):
        return 100.0 * token_classes[cls] / n_tokens if n_tokens else 0.0

    return CorpusStats(
        hours=seconds / 3600,
        utterances=n_utts,
        tokens=n_tokens,
        arabic_token_pct=pct(TokenClass.ARABIC),
        english_token_pct=pct(TokenClass.LATIN),
        categories={c.value: cats[c.value] for c in _ORDER},
    )
