"""Corpus artifacts: CTM word alignments, audio indexes and JSONL manifests."""

from __future__ import annotations

import enum
import io
import json
import math
import os
import tempfile
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .textnorm import TokenClass, classify_token

HEADER_KEY = "_header"
# slack for float noise in CTM times (1/60 of a sample at 16 kHz)
TIME_EPS = 1e-6


class LanguageTag(str, enum.Enum):
    ARABIC = "ar"
    ENGLISH = "en"
    CODE_SWITCHED = "cs"

    @classmethod
    def parse(cls, value) -> "LanguageTag":
        if isinstance(value, cls):
            return value
        aliases = {"arabic": "ar", "english": "en", "code_switched": "cs"}
        try:
            return cls(aliases.get(value, value))
        except ValueError:
            raise ValueError(f"unknown language tag {value!r}") from None


class CtmParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ManifestError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)
        self.lineno = lineno


@dataclass(frozen=True)
class WordAlignment:
    word: str
    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.word or any(c.isspace() for c in self.word):
            raise ValueError(f"invalid word {self.word!r}")
        if not (0 <= self.start_s < self.end_s):
            raise ValueError(f"invalid word times [{self.start_s}, {self.end_s}) for {self.word!r}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class AlignedUtterance:
    utterance_id: str
    audio_path: str
    language: LanguageTag
    duration_s: float
    words: tuple[WordAlignment, ...]
    speaker_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "language", LanguageTag.parse(self.language))
        object.__setattr__(self, "words", tuple(self.words))
        problem = alignment_problem(self.words, self.duration_s)
        if problem is not None:
            raise ValueError(f"{self.utterance_id}: {problem[0]}")
        if self.language is LanguageTag.CODE_SWITCHED:
            raise ValueError(f"{self.utterance_id}: source utterances must be ar or en")

    @property
    def tokens(self) -> list[str]:
        return [w.word for w in self.words]


def alignment_problem(words, duration_s: float) -> tuple[str, tuple[int, ...]] | None:
    """Return ``(reason, word_indices)`` for the first invariant violation, else None."""
    if not words:
        return "no aligned words", ()
    if not duration_s > 0:
        return f"non-positive duration {duration_s}", ()
    for i in range(len(words) - 1):
        if words[i].end_s > words[i + 1].start_s + TIME_EPS:
            return f"words {i} and {i + 1} overlap or are out of order", (i, i + 1)
    if words[-1].end_s > duration_s + TIME_EPS:
        return (
            f"alignment end {words[-1].end_s} exceeds audio duration {duration_s}",
            (len(words) - 1,),
        )
    return None


@dataclass(frozen=True)
class AudioIndexEntry:
    utterance_id: str
    audio_path: str
    language: LanguageTag
    duration_s: float
    speaker_id: str | None = None


@dataclass(frozen=True)
class UtteranceError:
    utterance_id: str
    reason: str
    word_indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class SpliceProvenance:
    base_id: str
    fragment_id: str
    fragment_word_range: tuple[int, int]
    insertion_word_index: int
    gain: float
    xfade_samples: int
    clip_count: int
    seed_index: int

    def to_dict(self) -> dict:
        return {
            "base_id": self.base_id,
            "fragment_id": self.fragment_id,
            "fragment_word_range": list(self.fragment_word_range),
            "insertion_word_index": self.insertion_word_index,
            "gain": self.gain,
            "xfade_samples": self.xfade_samples,
            "clip_count": self.clip_count,
            "seed_index": self.seed_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpliceProvenance":
        i, j = d["fragment_word_range"]
        return cls(
            base_id=d["base_id"],
            fragment_id=d["fragment_id"],
            fragment_word_range=(int(i), int(j)),
            insertion_word_index=int(d["insertion_word_index"]),
            gain=float(d["gain"]),
            xfade_samples=int(d["xfade_samples"]),
            clip_count=int(d["clip_count"]),
            seed_index=int(d["seed_index"]),
        )


@dataclass(frozen=True)
class ManifestRecord:
    utterance_id: str
    audio_path: str
    duration_s: float
    transcript: tuple[str, ...]
    language: LanguageTag
    provenance: SpliceProvenance | None = None
    pool: str | None = None
    extra: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "language", LanguageTag.parse(self.language))
        if isinstance(self.transcript, str):
            object.__setattr__(self, "transcript", tuple(self.transcript.split()))
        else:
            object.__setattr__(self, "transcript", tuple(self.transcript))
        if not self.utterance_id:
            raise ValueError("empty utterance_id")
        if not (isinstance(self.duration_s, (int, float)) and math.isfinite(self.duration_s) and self.duration_s > 0):
            raise ValueError(f"{self.utterance_id}: duration_s must be > 0, got {self.duration_s!r}")
        for tok in self.transcript:
            if classify_token(tok) not in (TokenClass.ARABIC, TokenClass.LATIN):
                raise ValueError(f"{self.utterance_id}: token {tok!r} is not normalized text")

    def to_dict(self) -> dict:
        d = {
            "utterance_id": self.utterance_id,
            "audio_path": self.audio_path,
            "duration_s": self.duration_s,
            "transcript": " ".join(self.transcript),
            "language": self.language.value,
        }
        if self.provenance is not None:
            d["provenance"] = self.provenance.to_dict()
        if self.pool is not None:
            d["pool"] = self.pool
        d.update(self.extra)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestRecord":
        required = ("utterance_id", "audio_path", "duration_s", "transcript", "language")
        missing = [k for k in required if k not in d]
        if missing:
            raise ValueError(f"missing required fields: {', '.join(missing)}")
        known = set(required) | {"provenance", "pool"}
        prov = d.get("provenance")
        return cls(
            utterance_id=d["utterance_id"],
            audio_path=d["audio_path"],
            duration_s=d["duration_s"],
            transcript=d["transcript"],
            language=d["language"],
            provenance=SpliceProvenance.from_dict(prov) if prov is not None else None,
            pool=d.get("pool"),
            extra={k: v for k, v in d.items() if k not in known},
        )


def _lines(source) -> Iterable[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def parse_ctm(source) -> list[tuple[str, WordAlignment]]:
    """Parse CTM lines ``<utt_id> <channel> <start> <dur> <word> [<conf>]``.

    ``source`` is a string or any iterable of lines (an open file works).
    Blank lines and ``#`` comments are skipped.
    """
    out = []
    for lineno, line in enumerate(_lines(source), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (5, 6):
            raise CtmParseError(lineno, f"expected 5 fields, got {len(fields)}")
        utt_id, _channel, start, dur, word = fields[:5]
        try:
            start_s, dur_s = float(start), float(dur)
        except ValueError:
            raise CtmParseError(lineno, f"non-numeric time in {line!r}") from None
        if not (math.isfinite(start_s) and math.isfinite(dur_s)):
            raise CtmParseError(lineno, "non-finite time")
        if dur_s <= 0:
            raise CtmParseError(lineno, f"non-positive duration {dur_s}")
        if start_s < 0:
            raise CtmParseError(lineno, f"negative start time {start_s}")
        out.append((utt_id, WordAlignment(word, start_s, start_s + dur_s)))
    return out


def read_ctm(path) -> list[tuple[str, WordAlignment]]:
    with open(path, encoding="utf-8") as f:
        return parse_ctm(f)


def format_ctm(alignments: Iterable[tuple[str, WordAlignment]], channel: str = "1") -> str:
    return "".join(
        f"{utt} {channel} {w.start_s:.6f} {w.end_s - w.start_s:.6f} {w.word}\n" for utt, w in alignments
    )


def write_ctm(alignments, path, channel: str = "1") -> None:
    _atomic_write_text(path, format_ctm(alignments, channel))


def read_audio_index(path) -> dict[str, AudioIndexEntry]:
    """Load the JSONL sidecar describing each source audio file.

    Relative ``audio_path`` values are resolved against the index's directory.
    """
    path = Path(path)
    index = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                entry = AudioIndexEntry(
                    utterance_id=d["utterance_id"],
                    audio_path=str(path.parent / d["audio_path"]),
                    language=LanguageTag.parse(d["language"]),
                    duration_s=float(d["duration_s"]),
                    speaker_id=d.get("speaker_id"),
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ManifestError(f"{path}: bad audio index entry: {exc}", lineno) from None
            if entry.language is LanguageTag.CODE_SWITCHED:
                raise ManifestError(f"{path}: audio index language must be ar or en", lineno)
            if entry.utterance_id in index:
                raise ManifestError(f"{path}: duplicate utterance_id {entry.utterance_id}", lineno)
            index[entry.utterance_id] = entry
    return index


def build_utterances(
    alignments: Iterable[tuple[str, WordAlignment]],
    audio_index: dict[str, AudioIndexEntry],
) -> tuple[list[AlignedUtterance], list[UtteranceError]]:
    """Group alignments by utterance and validate each group.

    Bad utterances are reported in the second list and skipped; they never
    abort the whole ingest. Output order follows first appearance in
    ``alignments``.
    """
    grouped: dict[str, list[WordAlignment]] = defaultdict(list)
    for utt_id, w in alignments:
        grouped[utt_id].append(w)

    utterances, errors = [], []
    for utt_id, words in grouped.items():
        entry = audio_index.get(utt_id)
        if entry is None:
            errors.append(UtteranceError(utt_id, "missing from audio index"))
            continue
        problem = alignment_problem(words, entry.duration_s)
        if problem is not None:
            errors.append(UtteranceError(utt_id, *problem))
            continue
        utterances.append(
            AlignedUtterance(
                utterance_id=utt_id,
                audio_path=entry.audio_path,
                language=entry.language,
                duration_s=entry.duration_s,
                words=tuple(words),
                speaker_id=entry.speaker_id,
            )
        )
    return utterances, errors


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_record(record: ManifestRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False)


def write_manifest(records: Iterable[ManifestRecord], path, header: dict | None = None) -> None:
    """Write records as JSONL, atomically (temp file then rename).

    An optional ``header`` is stored as a first ``{"_header": ...}`` line;
    :func:`read_manifest` skips it.
    """
    lines = []
    if header is not None:
        lines.append(json.dumps({HEADER_KEY: header}, ensure_ascii=False, sort_keys=True))
    lines.extend(dumps_record(r) for r in records)
    _atomic_write_text(path, "".join(line + "\n" for line in lines))


def _parse_manifest_lines(path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}: malformed JSON ({exc.msg})", lineno) from None
            if not isinstance(d, dict):
                raise ManifestError(f"{path}: expected a JSON object", lineno)
            yield lineno, d


def read_manifest_header(path) -> dict | None:
    for _, d in _parse_manifest_lines(path):
        return d[HEADER_KEY] if set(d) == {HEADER_KEY} else None
    return None


def read_manifest(path) -> list[ManifestRecord]:
    records = []
    seen: dict[str, int] = {}
    dupes = []
    for lineno, d in _parse_manifest_lines(path):
        if set(d) == {HEADER_KEY}:
            if records:
                raise ManifestError(f"{path}: header must be the first line", lineno)
            continue
        try:
            rec = ManifestRecord.from_dict(d)
        except (ValueError, TypeError, KeyError) as exc:
            raise ManifestError(f"{path}: {exc}", lineno) from None
        if rec.utterance_id in seen:
            dupes.append(rec.utterance_id)
        seen[rec.utterance_id] = lineno
        records.append(rec)
    if dupes:
        raise ManifestError(f"{path}: duplicate utterance_id(s): {', '.join(sorted(set(dupes)))}")
    return records
