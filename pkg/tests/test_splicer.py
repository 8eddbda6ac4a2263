from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import utterance
from oracles import splice_regions, within_sigma
from sagecs.audio import AudioBuffer, quantize, read_wav, speech_rms
from sagecs.corpus import LanguageTag, read_manifest, read_manifest_header
from sagecs.scoring import UtteranceCategory, classify_utterance
from sagecs.splicer import (
    FragmentSpan,
    InsertionPoint,
    SilentAudioError,
    SpliceConfig,
    SpliceSpec,
    _split_pools,
    compose_transcript,
    compute_gain,
    eligible_for_splicing,
    feasible_xfade,
    generate_dataset,
    generate_one,
    output_rng,
    plan_splice,
    select_fragment,
    select_insertion_point,
    splice,
)
from sagecs.synthetic import make_utterance

AR, EN = LanguageTag.ARABIC, LanguageTag.ENGLISH


def ten_words(lang=EN, uid="ten"):
    return utterance([(f"w{chr(97 + i)}", 0.1 * i, 0.1 * i + 0.08) for i in range(10)], 1.2, lang, uid)


def test_two_word_fragment_is_forced(rng):
    u = utterance([("a", 0.0, 0.5), ("b", 0.5, 1.0)], 1.0, EN)
    for _ in range(20):
        span = select_fragment(u, rng)
        assert span.word_range == (0, 2)
        assert (span.start_sample, span.end_sample) == (0, 16000)


def test_fragment_needs_two_words(rng):
    with pytest.raises(ValueError):
        select_fragment(utterance([("a", 0.0, 0.5)], 1.0, EN), rng)


def test_fragment_determinism():
    u = ten_words()
    a = [select_fragment(u, output_rng(3, k)) for k in range(50)]
    b = [select_fragment(u, output_rng(3, k)) for k in range(50)]
    assert a == b
    assert len(set(a)) > 5


def test_fragment_distribution():
    u, n, draws = ten_words(), 10, 10_000
    rng = np.random.default_rng(99)
    counts = Counter(select_fragment(u, rng).word_range for _ in range(draws))
    for length in (2, 3, 4):
        starts = n - length + 1
        for s in range(starts):
            assert within_sigma(counts[(s, s + length)], draws, 1 / 3 / starts), (length, s)
    assert sum(counts.values()) == draws
    assert all(2 <= j - i <= 4 for i, j in counts)


def test_fragment_span_samples():
    u = utterance([("a", 0.1, 0.3), ("b", 0.35, 0.6), ("c", 0.7, 0.9)], 1.0, EN)
    span = FragmentSpan.from_words(u, 1, 3)
    assert (span.start_sample, span.end_sample) == (5600, 14400)
    with pytest.raises(ValueError):
        FragmentSpan.from_words(u, 0, 1)


def test_insertion_examples(rng):
    one = utterance([("a", 0.2, 0.5)], 1.0)
    assert {select_insertion_point(one, rng).word_index for _ in range(100)} == {0, 1}
    base = utterance([("a", 0.0, 0.5), ("b", 0.7, 1.0)], 1.0)
    points = {p.word_index: p.time_sample for p in (select_insertion_point(base, rng) for _ in range(200))}
    assert points == {0: 0, 1: 9600, 2: 16000}


def test_insertion_uniform():
    base = ten_words(AR)
    rng = np.random.default_rng(5)
    counts = Counter(select_insertion_point(base, rng).word_index for _ in range(11_000))
    assert set(counts) == set(range(11))
    assert all(within_sigma(counts[k], 11_000, 1 / 11) for k in range(11))


def test_insertion_zero_gap_uses_boundary(rng):
    base = utterance([("a", 0.1, 0.5), ("b", 0.5, 0.9)], 1.0)
    for _ in range(50):
        p = select_insertion_point(base, rng)
        if p.word_index == 1:
            assert p.time_sample == 8000


def test_compose_examples():
    assert compose_transcript(["w0", "w1", "w2"], ["f0", "f1"], 1) == ["w0", "f0", "f1", "w1", "w2"]
    assert compose_transcript(["w0", "w1", "w2"], ["f0", "f1"], 0) == ["f0", "f1", "w0", "w1", "w2"]
    assert compose_transcript(["w0", "w1", "w2"], ["f0", "f1"], 3) == ["w0", "w1", "w2", "f0", "f1"]
    with pytest.raises(IndexError):
        compose_transcript(["w0"], ["f0"], 2)


def test_compose_figure_example():
    base = "كانت ليلى ابنة فاضل الصبية".split()
    source = "he regularly visits to hold clinics and seminars for the students".split()
    fragment = source[source.index("the"):]
    assert fragment == ["the", "students"]
    out = compose_transcript(base, fragment, 4)
    assert " ".join(out) == "كانت ليلى ابنة فاضل the students الصبية"
    assert classify_utterance(out) is UtteranceCategory.CS


# -- splice mechanics ---------------------------------------------------------


def _fixture(base_level=0.5, frag_level=0.25):
    base = utterance([("كتاب", 0.1, 0.4), ("بيت", 0.6, 0.9)], 1.0, AR, "base")
    base_audio = AudioBuffer(np.r_[np.zeros(1600), np.full(4800, base_level), np.zeros(3200),
                                   np.full(4800, base_level), np.zeros(1600)])
    frag = utterance([("the", 0.0, 0.25), ("students", 0.25, 0.5)], 0.75, EN, "frag")
    frag_audio = AudioBuffer(np.r_[np.full(8000, frag_level), np.zeros(4000)])
    return base, base_audio, frag, frag_audio


def _spec(base, frag, index, time, gain=1.0, xfade=160):
    return SpliceSpec(base.utterance_id, FragmentSpan.from_words(frag, 0, 2), InsertionPoint(index, time), gain, xfade)


@pytest.mark.parametrize("index, time, expected", [(1, 8000, 23680), (2, 16000, 23840), (0, 0, 23840)])
def test_splice_lengths(index, time, expected):
    base, ba, frag, fa = _fixture()
    out = splice(base, ba, frag, fa, _spec(base, frag, index, time))
    assert len(out.audio) == expected
    assert out.n_junctions == (2 if index == 1 else 1)


def test_splice_transcript_and_label():
    base, ba, frag, fa = _fixture()
    out = splice(base, ba, frag, fa, _spec(base, frag, 1, 8000))
    assert out.transcript == ("كتاب", "the", "students", "بيت")
    assert out.language is LanguageTag.CODE_SWITCHED
    assert out.provenance.fragment_word_range == (0, 2)
    assert out.provenance.xfade_samples == 160


def test_constant_gain_matches_base():
    base, ba, frag, fa = _fixture(0.5, 0.25)
    gain = compute_gain(base, ba, fa, FragmentSpan.from_words(frag, 0, 2))
    assert gain == pytest.approx(2.0)
    out = splice(base, ba, frag, fa, _spec(base, frag, 1, 8000, gain))
    region = out.audio.samples[8000:8000 + 8000 - 320]
    assert abs(np.sqrt(np.mean(region ** 2)) - 0.5) < 1e-3


def test_gain_clamp():
    base, ba, frag, fa = _fixture(0.9, 0.01)
    span = FragmentSpan.from_words(frag, 0, 2)
    assert compute_gain(base, ba, fa, span, 0.1, 10.0) == 10.0
    base, ba, frag, fa = _fixture(0.001, 0.9)
    assert compute_gain(base, ba, fa, span, 0.1, 10.0) == 0.1


def test_silent_fragment_rejected():
    base, ba, frag, _ = _fixture()
    with pytest.raises(SilentAudioError):
        compute_gain(base, ba, AudioBuffer(np.zeros(12000)), FragmentSpan.from_words(frag, 0, 2))


def test_same_language_rejected():
    base, ba, _, fa = _fixture()
    same = utterance([("كتاب", 0.0, 0.25), ("بيت", 0.25, 0.5)], 0.75, AR, "frag")
    with pytest.raises(ValueError, match="different languages"):
        splice(base, ba, same, fa, _spec(base, same, 1, 8000))


@pytest.mark.parametrize("xfade, time", [(4001, 8000), (200, 100), (200, 15900)])
def test_xfade_preconditions(xfade, time):
    base, ba, frag, fa = _fixture()
    with pytest.raises(ValueError):
        splice(base, ba, frag, fa, _spec(base, frag, 1, time, xfade=xfade))


def test_feasible_xfade():
    assert feasible_xfade(160, 16000, 8000, 8000) == 160
    assert feasible_xfade(160, 16000, 200, 8000) == 100
    assert feasible_xfade(160, 16000, 8000, 50) == 50
    assert feasible_xfade(160, 16000, 8000, 0) == 160


def test_gained_fragment_samples_preserved():
    base, ba, frag, fa = _fixture(0.5, 0.25)
    out = splice(base, ba, frag, fa, _spec(base, frag, 1, 8000, gain=1.5))
    # fragment interior lands at [t + x, t + F - 2x) shifted by -x
    inner = out.audio.samples[8000:8000 + 8000 - 320]
    assert np.all(inner == 0.375)


def test_peak_mode():
    base, ba, frag, fa = _fixture()
    out = splice(base, ba, frag, fa, _spec(base, frag, 1, 8000, 2.0), volume_mode="peak", peak_level=0.8)
    assert np.max(np.abs(out.audio.samples)) == pytest.approx(0.8)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 50))
def test_length_and_base_preservation(seed, xfade_ms):
    rng = np.random.default_rng(seed)
    base, ba = make_utterance(rng, "b", AR, int(rng.integers(1, 7)))
    frag, fa = make_utterance(rng, "f", EN, int(rng.integers(2, 7)))
    spec = plan_splice(base, ba, frag, fa, rng, SpliceConfig(xfade_ms=xfade_ms))
    out = splice(base, ba, frag, fa, spec)
    L, F, x, t = len(ba), spec.fragment.n_samples, spec.xfade, spec.insertion.time_sample
    assert len(out.audio) == L + F - out.n_junctions * x
    q_out, q_base = quantize(out.audio.samples), quantize(ba.samples)
    pairs, _ = splice_regions(L, F, x, t)
    for out_sl, base_sl in pairs:
        assert np.array_equal(q_out[out_sl], q_base[base_sl])
    assert len(out.transcript) == len(base.words) + spec.fragment.n_words


# -- dataset generation -------------------------------------------------------


def test_generate_stopping_rule(small_corpus, tmp_path):
    _, ar, en = small_corpus
    recs = generate_dataset(ar, en, 0.01, SpliceConfig(), 3, tmp_path)
    total = sum(r.duration_s for r in recs)
    longest = max(r.duration_s for r in recs)
    assert 36.0 <= total < 36.0 + longest
    assert sum(r.duration_s for r in recs[:-1]) < 36.0
    assert read_manifest(tmp_path / "manifest.jsonl") == recs
    wavs = sorted(p.name for p in (tmp_path / "wavs").iterdir())
    assert wavs == sorted(f"{r.utterance_id}.wav" for r in recs)
    for r in recs:
        assert len(read_wav(tmp_path / r.audio_path)) == round(r.duration_s * 16000)
        assert r.language is LanguageTag.CODE_SWITCHED
        assert classify_utterance(r.transcript) is UtteranceCategory.CS


def test_generate_header_excludes_workers(small_corpus, tmp_path):
    _, ar, en = small_corpus
    generate_dataset(ar, en, 0.002, SpliceConfig(xfade_ms=5), 8, tmp_path)
    header = read_manifest_header(tmp_path / "manifest.jsonl")
    assert header["master_seed"] == 8 and header["xfade_ms"] == 5
    assert "workers" not in header


def test_generate_parallel_identical(small_corpus, tmp_path):
    _, ar, en = small_corpus
    generate_dataset(ar, en, 0.02, SpliceConfig(), 21, tmp_path / "w1", workers=1)
    generate_dataset(ar, en, 0.02, SpliceConfig(), 21, tmp_path / "w3", workers=3)
    m1 = (tmp_path / "w1" / "manifest.jsonl").read_bytes()
    assert m1 == (tmp_path / "w3" / "manifest.jsonl").read_bytes()
    names = sorted(p.name for p in (tmp_path / "w1" / "wavs").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "w3" / "wavs").iterdir())
    for name in names:
        assert (tmp_path / "w1" / "wavs" / name).read_bytes() == (tmp_path / "w3" / "wavs" / name).read_bytes()


def test_generate_one_is_order_independent(memory_pools):
    ar, en, load = memory_pools
    pools = _split_pools(ar, en, SpliceConfig())
    forward = [generate_one(k, pools, SpliceConfig(), 4, load) for k in range(20)]
    backward = [generate_one(k, pools, SpliceConfig(), 4, load) for k in reversed(range(20))][::-1]
    for a, b in zip(forward, backward):
        assert a.audio == b.audio and a.provenance == b.provenance


def test_direction_probability(memory_pools):
    ar, en, load = memory_pools
    for p in (0.0, 1.0):
        pools = _split_pools(ar, en, SpliceConfig(direction_prob=p))
        bases = {generate_one(k, pools, SpliceConfig(direction_prob=p), 1, load).provenance.base_id[:2]
                 for k in range(30)}
        assert bases == {"ar" if p == 1.0 else "en"}


def test_direction_balance(memory_pools):
    ar, en, load = memory_pools
    cfg = SpliceConfig()
    pools = _split_pools(ar, en, cfg)
    n = 2000
    ar_base = sum(generate_one(k, pools, cfg, 17, load).provenance.base_id.startswith("ar") for k in range(n))
    assert within_sigma(ar_base, n, 0.5)


def test_generate_rejects_bad_pools(memory_pools, tmp_path):
    ar, en, load = memory_pools
    with pytest.raises(ValueError, match="empty"):
        generate_dataset([], en, 0.01, SpliceConfig(), 1, tmp_path, load_audio=load)
    with pytest.raises(ValueError, match="another language"):
        generate_dataset(en, en, 0.01, SpliceConfig(), 1, tmp_path, load_audio=load)
    one_word = [u for u in ar if len(u.words) == 1] or [utterance([("كتاب", 0.1, 0.3)], 0.5, AR, "x")]
    with pytest.raises(ValueError, match="at least 2 words"):
        generate_dataset(one_word, en, 0.01, SpliceConfig(), 1, tmp_path, load_audio=load)


def test_silent_fragments_are_redrawn(memory_pools):
    ar, en, load = memory_pools
    silent_ids = {u.utterance_id for u in en[:25]}

    def loader(u):
        audio = load(u)
        return AudioBuffer(np.zeros(len(audio))) if u.utterance_id in silent_ids else audio

    cfg = SpliceConfig(direction_prob=1.0)
    pools = _split_pools(ar, en, cfg)
    for k in range(30):
        out = generate_one(k, pools, cfg, 2, loader)
        assert out.provenance.fragment_id not in silent_ids


def test_config_validation():
    for bad in ({"direction_prob": 1.5}, {"xfade_ms": 51}, {"min_span": 1}, {"max_span": 5},
                {"gain_min": 0}, {"volume_mode": "loud"}):
        with pytest.raises(ValueError):
            SpliceConfig(**bad)
    assert SpliceConfig().xfade_samples == 160


def test_eligibility():
    assert eligible_for_splicing(utterance([("كتاب", 0.1, 0.3), ("book", 0.4, 0.6)], 1.0, AR))
    assert not eligible_for_splicing(utterance([("Book", 0.1, 0.3)], 1.0, EN))
    assert not eligible_for_splicing(utterance([("42", 0.1, 0.3)], 1.0, EN))


def test_speech_like_gain_match(memory_pools):
    ar, en, load = memory_pools
    rng = np.random.default_rng(0)
    checked = 0
    for k in range(50):
        base, frag = ar[k % len(ar)], en[(k * 7) % len(en)]
        if len(frag.words) < 2:
            continue
        spec = plan_splice(base, load(base), frag, load(frag), rng)
        out = splice(base, load(base), frag, load(frag), spec)
        if out.provenance.clip_count or spec.gain in (0.1, 10.0):
            continue
        _, frag_sl = splice_regions(len(load(base)), spec.fragment.n_samples, spec.xfade, spec.insertion.time_sample)
        region = AudioBuffer(out.audio.samples[frag_sl])
        lo, hi = int(round(base.words[0].start_s * 16000)), int(round(base.words[-1].end_s * 16000))
        assert speech_rms(region) == pytest.approx(speech_rms(load(base), lo, hi), rel=0.10)
        checked += 1
    assert checked > 30
