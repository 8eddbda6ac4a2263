"""Alignment-guided audio splicing of code-switched utterances.

A 2-4 word fragment is cut from an utterance in one language and inserted
into a base utterance of the other language: at the start, at the end, or
in the middle of an inter-word gap. The fragment is gain-matched to the
base speech level and each junction is smoothed with a linear crossfade.
Base audio is never rescaled, so everything farther than one crossfade
from a junction is bit-identical to the source.

Every output ``k`` is a pure function of ``(pools, config, master_seed, k)``
so generation can be spread over any number of worker processes.
"""

from __future__ import annotations

import functools
import logging
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .audio import (
    SAMPLE_RATE,
    AudioBuffer,
    apply_gain,
    crossfade_concat,
    read_wav,
    seconds_to_samples,
    speech_rms,
    write_wav,
)
from .corpus import (
    AlignedUtterance,
    LanguageTag,
    ManifestRecord,
    SpliceProvenance,
    write_manifest,
)
from .textnorm import normalize

log = logging.getLogger(__name__)

MAX_XFADE_MS = 50.0


class SilentAudioError(ValueError):
    """The fragment (or base speech region) has zero speech RMS."""


@dataclass(frozen=True)
class SpliceConfig:
    direction_prob: float = 0.5  # probability of an Arabic base
    xfade_ms: float = 10.0
    min_span: int = 2
    max_span: int = 4
    gain_min: float = 0.1
    gain_max: float = 10.0
    volume_mode: str = "match_base"  # or "peak"
    peak_level: float = 0.9
    max_attempts: int = 100

    def __post_init__(self):
        if not 0.0 <= self.direction_prob <= 1.0:
            raise ValueError("direction_prob must be in [0, 1]")
        if not 0.0 <= self.xfade_ms <= MAX_XFADE_MS:
            raise ValueError(f"xfade_ms must be in [0, {MAX_XFADE_MS}]")
        if not 2 <= self.min_span <= self.max_span <= 4:
            raise ValueError("span range must satisfy 2 <= min_span <= max_span <= 4")
        if not 0 < self.gain_min <= self.gain_max:
            raise ValueError("gain clamp must satisfy 0 < gain_min <= gain_max")
        if self.volume_mode not in ("match_base", "peak"):
            raise ValueError(f"unknown volume_mode {self.volume_mode!r}")
        if not 0 < self.peak_level < 1:
            raise ValueError("peak_level must be in (0, 1)")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    @property
    def xfade_samples(self) -> int:
        return int(round(self.xfade_ms * SAMPLE_RATE / 1000))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FragmentSpan:
    source_id: str
    start_word: int
    end_word: int
    start_sample: int
    end_sample: int

    @property
    def word_range(self) -> tuple[int, int]:
        return (self.start_word, self.end_word)

    @property
    def n_words(self) -> int:
        return self.end_word - self.start_word

    @property
    def n_samples(self) -> int:
        return self.end_sample - self.start_sample

    @classmethod
    def from_words(cls, utt: AlignedUtterance, i: int, j: int) -> "FragmentSpan":
        if not (0 <= i < j <= len(utt.words)) or not 2 <= j - i <= 4:
            raise ValueError(f"invalid fragment word range [{i}, {j}) for {utt.utterance_id}")
        return cls(
            utt.utterance_id,
            i,
            j,
            seconds_to_samples(utt.words[i].start_s),
            seconds_to_samples(utt.words[j - 1].end_s),
        )


@dataclass(frozen=True)
class InsertionPoint:
    word_index: int
    time_sample: int


@dataclass(frozen=True)
class SpliceSpec:
    base_id: str
    fragment: FragmentSpan
    insertion: InsertionPoint
    gain: float
    xfade: int
    seed_path: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class SpliceResult:
    audio: AudioBuffer
    transcript: tuple[str, ...]
    provenance: SpliceProvenance
    spec: SpliceSpec
    n_junctions: int
    # sample offsets of each junction's crossfade region [start, stop) in the output
    junctions: tuple[tuple[int, int], ...]
    language: LanguageTag = LanguageTag.CODE_SWITCHED


def n_samples_of(utt: AlignedUtterance) -> int:
    return seconds_to_samples(utt.duration_s)


def select_fragment(
    utt: AlignedUtterance, rng: np.random.Generator, min_span: int = 2, max_span: int = 4
) -> FragmentSpan:
    """Pick a contiguous span of 2-4 words.

    The length is drawn uniformly over the feasible lengths, then the start
    uniformly over the valid positions for that length.
    """
    n = len(utt.words)
    lengths = [k for k in range(min_span, max_span + 1) if k <= n]
    if not lengths:
        raise ValueError(f"{utt.utterance_id} has {n} word(s); need at least {min_span}")
    length = lengths[int(rng.integers(len(lengths)))]
    start = int(rng.integers(n - length + 1))
    return FragmentSpan.from_words(utt, start, start + length)


def insertion_time(base: AlignedUtterance, word_index: int, n_samples: int | None = None) -> int:
    n = len(base.words)
    if not 0 <= word_index <= n:
        raise ValueError(f"insertion index {word_index} outside [0, {n}]")
    if word_index == 0:
        return 0
    if word_index == n:
        return n_samples_of(base) if n_samples is None else n_samples
    gap_start = base.words[word_index - 1].end_s
    gap_end = base.words[word_index].start_s
    return seconds_to_samples((gap_start + gap_end) / 2)


def select_insertion_point(
    base: AlignedUtterance, rng: np.random.Generator, n_samples: int | None = None
) -> InsertionPoint:
    """Uniform over the ``n + 1`` word boundaries of the base (start and end included)."""
    if not base.words:
        raise ValueError(f"{base.utterance_id} has no words")
    k = int(rng.integers(len(base.words) + 1))
    return InsertionPoint(k, insertion_time(base, k, n_samples))


def compose_transcript(base_tokens: Sequence[str], fragment_tokens: Sequence[str], word_index: int) -> list[str]:
    if not 0 <= word_index <= len(base_tokens):
        raise IndexError(f"insertion index {word_index} outside [0, {len(base_tokens)}]")
    return [*base_tokens[:word_index], *fragment_tokens, *base_tokens[word_index:]]


def base_speech_range(base: AlignedUtterance) -> tuple[int, int]:
    return seconds_to_samples(base.words[0].start_s), seconds_to_samples(base.words[-1].end_s)


def compute_gain(
    base: AlignedUtterance,
    base_audio: AudioBuffer,
    fragment_audio: AudioBuffer,
    fragment: FragmentSpan,
    gain_min: float = 0.1,
    gain_max: float = 10.0,
) -> float:
    """Ratio of base speech RMS to fragment speech RMS, clamped to ``[gain_min, gain_max]``."""
    lo, hi = base_speech_range(base)
    hi = min(hi, len(base_audio))
    base_level = speech_rms(base_audio, lo, hi) if hi > lo else 0.0
    if base_level == 0.0:
        raise SilentAudioError(f"base {base.utterance_id} has a silent speech region")
    frag_level = speech_rms(fragment_audio, fragment.start_sample, fragment.end_sample)
    if frag_level == 0.0:
        raise SilentAudioError(f"fragment {fragment.source_id}{list(fragment.word_range)} is silent")
    return float(min(max(base_level / frag_level, gain_min), gain_max))


def feasible_xfade(requested: int, base_len: int, fragment_len: int, time_sample: int) -> int:
    limit = fragment_len // 2
    if 0 < time_sample < base_len:
        limit = min(limit, time_sample, base_len - time_sample)
    else:
        limit = min(limit, base_len)
    return max(0, min(requested, limit))


def splice(
    base: AlignedUtterance,
    base_audio: AudioBuffer,
    fragment_source: AlignedUtterance,
    fragment_audio: AudioBuffer,
    spec: SpliceSpec,
    volume_mode: str = "match_base",
    peak_level: float = 0.9,
) -> SpliceResult:
    """Assemble one spliced utterance exactly as described by ``spec``.

    Output length is ``len(base) + len(fragment) - n_junctions * xfade``,
    with two junctions for a mid-sentence insertion and one at either end.
    """
    if base.language == fragment_source.language:
        raise ValueError("base and fragment must come from different languages")
    if spec.base_id != base.utterance_id or spec.fragment.source_id != fragment_source.utterance_id:
        raise ValueError("spec does not match the given utterances")
    frag = spec.fragment
    if not 0 <= frag.start_sample < frag.end_sample <= len(fragment_audio):
        raise ValueError(f"fragment samples [{frag.start_sample}, {frag.end_sample}) outside source audio")
    L = len(base_audio)
    t = spec.insertion.time_sample
    if not 0 <= t <= L:
        raise ValueError(f"insertion sample {t} outside base audio of length {L}")
    x = spec.xfade
    if x < 0 or 2 * x > frag.n_samples:
        raise ValueError(f"xfade {x} exceeds half the fragment length {frag.n_samples}")
    if 0 < t < L and x > min(t, L - t):
        raise ValueError(f"xfade {x} exceeds base segment around insertion sample {t}")
    if x > L:
        raise ValueError(f"xfade {x} exceeds base length {L}")

    gained, clips = apply_gain(fragment_audio.slice(frag.start_sample, frag.end_sample), spec.gain)
    F = len(gained)
    if t == 0:
        audio = crossfade_concat(gained, base_audio, x)
        junctions = ((F - x, F),)
    elif t == L:
        audio = crossfade_concat(base_audio, gained, x)
        junctions = ((L - x, L),)
    else:
        head = crossfade_concat(base_audio.slice(0, t), gained, x)
        audio = crossfade_concat(head, base_audio.slice(t, L), x)
        junctions = ((t - x, t), (t + F - 2 * x, t + F - x))

    if volume_mode == "peak":
        peak = float(np.max(np.abs(audio.samples))) if len(audio) else 0.0
        if peak > 0:
            audio, more = apply_gain(audio, peak_level / peak)
            clips += more
    elif volume_mode != "match_base":
        raise ValueError(f"unknown volume_mode {volume_mode!r}")

    transcript = compose_transcript(
        base.tokens, fragment_source.tokens[frag.start_word : frag.end_word], spec.insertion.word_index
    )
    provenance = SpliceProvenance(
        base_id=base.utterance_id,
        fragment_id=fragment_source.utterance_id,
        fragment_word_range=frag.word_range,
        insertion_word_index=spec.insertion.word_index,
        gain=spec.gain,
        xfade_samples=x,
        clip_count=clips,
        seed_index=spec.seed_path[1],
    )
    return SpliceResult(audio, tuple(transcript), provenance, spec, len(junctions), junctions)


def plan_splice(
    base: AlignedUtterance,
    base_audio: AudioBuffer,
    fragment_source: AlignedUtterance,
    fragment_audio: AudioBuffer,
    rng: np.random.Generator,
    config: SpliceConfig = SpliceConfig(),
    seed_path: tuple[int, int] = (0, 0),
) -> SpliceSpec:
    """Draw fragment span and insertion point, then derive gain and crossfade."""
    frag = select_fragment(fragment_source, rng, config.min_span, config.max_span)
    point = select_insertion_point(base, rng, len(base_audio))
    gain = compute_gain(base, base_audio, fragment_audio, frag, config.gain_min, config.gain_max)
    xfade = feasible_xfade(config.xfade_samples, len(base_audio), frag.n_samples, point.time_sample)
    if xfade < config.xfade_samples:
        log.debug(
            "crossfade shortened to %d samples for base %s at index %d",
            xfade, base.utterance_id, point.word_index,
        )
    return SpliceSpec(base.utterance_id, frag, point, gain, xfade, seed_path)


# ---------------------------------------------------------------------------
# dataset generation


def output_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for output ``index``, derived by hashing both integers."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


def eligible_for_splicing(utt: AlignedUtterance) -> bool:
    """True when every aligned word is already a normalized token with no flags."""
    for word in utt.tokens:
        result = normalize(word)
        if result.flagged or result.texts != [word]:
            return False
    return True


@functools.lru_cache(maxsize=512)
def _cached_wav(path: str) -> AudioBuffer:
    return read_wav(path)


def load_source_audio(utt: AlignedUtterance) -> AudioBuffer:
    return _cached_wav(utt.audio_path)


AudioLoader = Callable[[AlignedUtterance], AudioBuffer]


@dataclass(frozen=True)
class _Pools:
    arabic_bases: tuple[AlignedUtterance, ...]
    english_bases: tuple[AlignedUtterance, ...]
    arabic_fragments: tuple[AlignedUtterance, ...]
    english_fragments: tuple[AlignedUtterance, ...]


def _split_pools(ar_pool, en_pool, config: SpliceConfig) -> _Pools:
    for name, pool, lang in (("Arabic", ar_pool, LanguageTag.ARABIC), ("English", en_pool, LanguageTag.ENGLISH)):
        if not pool:
            raise ValueError(f"{name} pool is empty")
        bad = [u.utterance_id for u in pool if u.language is not lang]
        if bad:
            raise ValueError(f"{name} pool contains utterances of another language: {bad[:5]}")
    pools = _Pools(
        tuple(ar_pool),
        tuple(en_pool),
        tuple(u for u in ar_pool if len(u.words) >= config.min_span),
        tuple(u for u in en_pool if len(u.words) >= config.min_span),
    )
    if not pools.arabic_fragments or not pools.english_fragments:
        raise ValueError(f"each pool needs utterances with at least {config.min_span} words for fragments")
    return pools


def generate_one(
    index: int,
    pools: _Pools,
    config: SpliceConfig,
    master_seed: int,
    load_audio: AudioLoader = load_source_audio,
) -> SpliceResult:
    """Generate output ``index``; depends only on its arguments."""
    rng = output_rng(master_seed, index)
    arabic_base = rng.random() < config.direction_prob
    bases = pools.arabic_bases if arabic_base else pools.english_bases
    fragments = pools.english_fragments if arabic_base else pools.arabic_fragments
    last_error = None
    for _ in range(config.max_attempts):
        base = bases[int(rng.integers(len(bases)))]
        source = fragments[int(rng.integers(len(fragments)))]
        base_audio, frag_audio = load_audio(base), load_audio(source)
        try:
            spec = plan_splice(base, base_audio, source, frag_audio, rng, config, (master_seed, index))
        except SilentAudioError as exc:
            last_error = exc
            continue
        return splice(base, base_audio, source, frag_audio, spec, config.volume_mode, config.peak_level)
    raise RuntimeError(f"output {index}: no usable base/fragment after {config.max_attempts} draws: {last_error}")


def output_id(master_seed: int, index: int) -> str:
    return f"sage-{master_seed}-{index:07d}"


def _write_output(
    index: int, pools: _Pools, config: SpliceConfig, master_seed: int, out_dir: Path, load_audio: AudioLoader
) -> ManifestRecord:
    result = generate_one(index, pools, config, master_seed, load_audio)
    uid = output_id(master_seed, index)
    rel = Path("wavs") / f"{uid}.wav"
    write_wav(result.audio, out_dir / rel)
    return ManifestRecord(
        utterance_id=uid,
        audio_path=rel.as_posix(),
        duration_s=result.audio.duration_s,
        transcript=result.transcript,
        language=LanguageTag.CODE_SWITCHED,
        provenance=result.provenance,
    )


_worker_state: dict = {}


def _init_worker(pools, config, master_seed, out_dir, load_audio):
    _worker_state.update(pools=pools, config=config, seed=master_seed, out_dir=out_dir, load_audio=load_audio)


def _worker_task(index: int) -> ManifestRecord:
    s = _worker_state
    return _write_output(index, s["pools"], s["config"], s["seed"], s["out_dir"], s["load_audio"])


def generate_dataset(
    ar_pool: Sequence[AlignedUtterance],
    en_pool: Sequence[AlignedUtterance],
    target_hours: float,
    config: SpliceConfig,
    master_seed: int,
    out_dir,
    workers: int = 1,
    load_audio: AudioLoader = load_source_audio,
    manifest_name: str = "manifest.jsonl",
) -> list[ManifestRecord]:
    """Splice outputs ``0, 1, 2, ...`` until their total duration reaches ``target_hours``.

    WAVs go to ``out_dir/wavs/`` and the manifest to ``out_dir/manifest_name``
    (audio paths in it are relative to ``out_dir``). The set of outputs and
    every byte written are independent of ``workers``.
    """
    if not target_hours > 0:
        raise ValueError("target_hours must be positive")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    pools = _split_pools(ar_pool, en_pool, config)
    out_dir = Path(out_dir)
    (out_dir / "wavs").mkdir(parents=True, exist_ok=True)
    target_s = target_hours * 3600

    records: list[ManifestRecord] = []
    total = 0.0
    next_index = 0

    def consume(batch_records):
        nonlocal total
        for rec in batch_records:
            if total >= target_s:
                os.unlink(out_dir / rec.audio_path)
                continue
            records.append(rec)
            total += rec.duration_s

    if workers == 1:
        while total < target_s:
            consume([_write_output(next_index, pools, config, master_seed, out_dir, load_audio)])
            next_index += 1
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(
            workers, mp_context=ctx, initializer=_init_worker,
            initargs=(pools, config, master_seed, out_dir, load_audio),
        ) as ex:
            batch = workers * 16
            while total < target_s:
                indices = range(next_index, next_index + batch)
                consume(ex.map(_worker_task, indices, chunksize=4))
                next_index += batch

    header = {"generator": "sage", "master_seed": master_seed, "target_hours": target_hours, **config.to_dict()}
    write_manifest(records, out_dir / manifest_name, header=header)
    log.info("generated %d utterances, %.3f h", len(records), total / 3600)
    return records
