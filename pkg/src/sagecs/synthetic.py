"""Synthetic aligned corpora for tests, demos and benchmarks.

Each "word" is a short tone burst (or a constant-level block) separated by
silences, so word boundaries are known exactly and written out as CTM.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .audio import SAMPLE_RATE, AudioBuffer, write_wav
from .corpus import AlignedUtterance, LanguageTag, WordAlignment, format_ctm

ARABIC_VOCAB = (
    "كانت ليلى ابنة فاضل الصبية كتاب مدرسة بيت قلم سيارة ماء شمس قمر طريق باب "
    "مدينة يوم ليلة صديق عمل سؤال جواب أخ أم إبن مساء صباح شاي قهوة طاولة سماء"
).split()
ENGLISH_VOCAB = (
    "the students he regularly visits to hold clinics and seminars for book school "
    "house pen car water sun moon road door city day night friend work question answer "
    "don't it's coffee tea table sky meeting"
).split()


def _word_signal(rng: np.random.Generator, n: int, style: str, level: float) -> np.ndarray:
    if style == "constant":
        return np.full(n, level)
    t = np.arange(n) / SAMPLE_RATE
    f0 = rng.uniform(90, 260)
    sig = np.zeros(n)
    for h in range(1, 5):
        sig += rng.uniform(0.2, 1.0) / h * np.sin(2 * np.pi * f0 * h * t + rng.uniform(0, 2 * np.pi))
    sig += 0.05 * rng.standard_normal(n)
    envelope = np.hanning(n) ** 0.5 if n > 2 else np.ones(n)
    sig *= envelope
    peak = np.max(np.abs(sig))
    return sig * (level / peak) if peak > 0 else sig


def make_utterance(
    rng: np.random.Generator,
    utterance_id: str,
    language: LanguageTag,
    n_words: int,
    audio_path: str = "",
    style: str = "speech",
    level: float | None = None,
    word_s: tuple[float, float] = (0.15, 0.45),
    gap_s: tuple[float, float] = (0.0, 0.15),
    edge_s: tuple[float, float] = (0.05, 0.3),
) -> tuple[AlignedUtterance, AudioBuffer]:
    """One synthetic utterance of ``n_words`` bursts with exact alignments.

    ``style`` is ``"speech"`` (enveloped harmonic bursts plus a little noise)
    or ``"constant"`` (each word is a flat block at ``level``).
    """
    vocab = ARABIC_VOCAB if language is LanguageTag.ARABIC else ENGLISH_VOCAB
    if level is None:
        level = float(rng.uniform(0.05, 0.6))
    pieces, words = [], []
    pos = int(rng.uniform(*edge_s) * SAMPLE_RATE)
    pieces.append(np.zeros(pos))
    for k in range(n_words):
        if k:
            gap = int(rng.uniform(*gap_s) * SAMPLE_RATE)
            pieces.append(np.zeros(gap))
            pos += gap
        n = max(int(rng.uniform(*word_s) * SAMPLE_RATE), 32)
        pieces.append(_word_signal(rng, n, style, level))
        words.append(WordAlignment(vocab[int(rng.integers(len(vocab)))], pos / SAMPLE_RATE, (pos + n) / SAMPLE_RATE))
        pos += n
    tail = int(rng.uniform(*edge_s) * SAMPLE_RATE)
    pieces.append(np.zeros(tail))
    samples = np.clip(np.concatenate(pieces), -1.0, 32767 / 32768)
    audio = AudioBuffer(samples)
    utt = AlignedUtterance(utterance_id, audio_path, language, len(audio) / SAMPLE_RATE, tuple(words))
    return utt, audio


def make_pool(
    language: LanguageTag,
    count: int,
    seed: int,
    n_words: tuple[int, int] = (2, 9),
    style: str = "speech",
    **kwargs,
) -> list[tuple[AlignedUtterance, AudioBuffer]]:
    rng = np.random.default_rng([seed, 0 if language is LanguageTag.ARABIC else 1])
    prefix = language.value
    return [
        make_utterance(rng, f"{prefix}{i:05d}", language, int(rng.integers(n_words[0], n_words[1] + 1)),
                       style=style, **kwargs)
        for i in range(count)
    ]


def write_corpus(out_dir, items: list[tuple[AlignedUtterance, AudioBuffer]]) -> list[AlignedUtterance]:
    """Write WAVs, ``audio_index.jsonl`` and ``alignments.ctm`` under ``out_dir``.

    Returns the utterances with ``audio_path`` pointing at the written files.
    """
    out_dir = Path(out_dir)
    (out_dir / "wavs").mkdir(parents=True, exist_ok=True)
    written, index_lines, ctm = [], [], []
    for utt, audio in items:
        rel = f"wavs/{utt.utterance_id}.wav"
        write_wav(audio, out_dir / rel)
        index_lines.append(json.dumps({
            "utterance_id": utt.utterance_id, "audio_path": rel, "language": utt.language.value,
            "duration_s": utt.duration_s, "speaker_id": None,
        }, ensure_ascii=False))
        ctm.extend((utt.utterance_id, w) for w in utt.words)
        written.append(AlignedUtterance(
            utt.utterance_id, str(out_dir / rel), utt.language, utt.duration_s, utt.words, utt.speaker_id
        ))
    (out_dir / "audio_index.jsonl").write_text("\n".join(index_lines) + "\n", encoding="utf-8")
    (out_dir / "alignments.ctm").write_text(format_ctm(ctm), encoding="utf-8")
    return written
