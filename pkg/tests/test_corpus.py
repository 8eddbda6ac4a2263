import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagecs.corpus import (
    AudioIndexEntry,
    CtmParseError,
    LanguageTag,
    ManifestError,
    ManifestRecord,
    SpliceProvenance,
    WordAlignment,
    build_utterances,
    format_ctm,
    parse_ctm,
    read_audio_index,
    read_manifest,
    read_manifest_header,
    write_manifest,
)


def entry(uid, duration=1.2, lang=LanguageTag.ENGLISH):
    return AudioIndexEntry(uid, f"{uid}.wav", lang, duration)


def test_parse_single_line():
    [(utt, w)] = parse_ctm("utt1 1 0.25 0.40 hello")
    assert utt == "utt1"
    assert w.word == "hello" and w.start_s == 0.25 and w.end_s == pytest.approx(0.65)


def test_comments_and_blank_lines():
    text = "# header\n\nutt1 1 0.0 0.5 a\n  # indented comment\nutt1 1 0.5 0.5 b\n"
    assert [w.word for _, w in parse_ctm(text)] == ["a", "b"]


def test_empty_stream():
    assert parse_ctm("") == []
    assert parse_ctm([]) == []


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("utt1 1 0.25 -0.1 hello", "non-positive duration"),
        ("utt1 1 0.25 0 hello", "non-positive duration"),
        ("utt1 1 0.25 hello", "expected 5 fields"),
        ("utt1 1 abc 0.3 hello", "non-numeric"),
        ("utt1 1 0.1 0.2 hello 0.9 extra", "expected 5 fields"),
        ("utt1 1 -0.1 0.2 hello", "negative start"),
        ("utt1 1 nan 0.2 hello", "non-finite"),
    ],
)
def test_malformed_lines(line, fragment):
    with pytest.raises(CtmParseError, match=fragment) as exc:
        parse_ctm("utt0 1 0 1 ok\n" + line)
    assert exc.value.lineno == 2


def test_confidence_column_accepted():
    [(_, w)] = parse_ctm("u 1 0.1 0.2 word 0.93")
    assert w.word == "word"


def test_three_lines_two_utterances():
    text = "a 1 0.0 0.5 x\nb 1 0.0 0.4 y\na 1 0.5 0.3 z\n"
    alignments = parse_ctm(text)
    assert len(alignments) == len(text.strip().splitlines()) == 3
    utts, errors = build_utterances(alignments, {"a": entry("a"), "b": entry("b")})
    assert not errors
    assert [u.utterance_id for u in utts] == ["a", "b"]
    assert [w.word for w in utts[0].words] == ["x", "z"]


def test_build_examples():
    ok = [("u", WordAlignment("a", 0.0, 0.5)), ("u", WordAlignment("b", 0.5, 1.0))]
    utts, errors = build_utterances(ok, {"u": entry("u")})
    assert len(utts) == 1 and not errors

    overlap = [("u", WordAlignment("a", 0.0, 0.6)), ("u", WordAlignment("b", 0.5, 1.0))]
    utts, errors = build_utterances(overlap, {"u": entry("u")})
    assert not utts and errors[0].word_indices == (0, 1)

    too_long = [("u", WordAlignment("a", 0.0, 0.5)), ("u", WordAlignment("b", 0.6, 1.3))]
    utts, errors = build_utterances(too_long, {"u": entry("u", 1.2)})
    assert not utts and "exceeds audio" in errors[0].reason


def test_missing_index_entry_is_per_utterance():
    al = [("u", WordAlignment("a", 0.0, 0.5)), ("v", WordAlignment("b", 0.0, 0.5))]
    utts, errors = build_utterances(al, {"u": entry("u")})
    assert [u.utterance_id for u in utts] == ["u"]
    assert errors[0].utterance_id == "v" and "missing" in errors[0].reason


words_st = st.lists(
    st.tuples(st.sampled_from(["a", "b", "كتاب"]), st.floats(0, 5), st.floats(0.01, 1)),
    min_size=1, max_size=6,
)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["u", "v", "w"]), words_st), max_size=4), st.floats(0.1, 8))
def test_build_never_emits_invalid_utterances(groups, duration):
    alignments = [(uid, WordAlignment(w, s, s + d)) for uid, ws in groups for w, s, d in ws]
    index = {uid: entry(uid, duration) for uid in ("u", "v")}
    utts, errors = build_utterances(alignments, index)
    for u in utts:
        ws = u.words
        assert ws and all(ws[i].end_s <= ws[i + 1].start_s + 1e-6 for i in range(len(ws) - 1))
        assert ws[-1].end_s <= u.duration_s + 1e-6
    assert len(utts) + len(errors) == len({uid for uid, _ in alignments})


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["u1", "u2"]), st.sampled_from(["hi", "ok", "سلام"]),
                          st.floats(0, 100), st.floats(0.001, 10)), max_size=20))
def test_ctm_round_trip(rows):
    al = [(u, WordAlignment(w, round(s, 6), round(s, 6) + round(d, 6) + 1e-6)) for u, w, s, d in rows]
    back = parse_ctm(format_ctm(al))
    assert len(back) == len(al)
    for (u0, w0), (u1, w1) in zip(al, back):
        assert u0 == u1 and w0.word == w1.word
        assert w1.start_s == pytest.approx(w0.start_s, abs=1e-3)
        assert w1.end_s == pytest.approx(w0.end_s, abs=1e-3)


def _records():
    prov = SpliceProvenance("b1", "f1", (1, 3), 2, 1.2345678901234567, 160, 0, 7)
    return [
        ManifestRecord("a", "wavs/a.wav", 1.5, ("hello", "world"), LanguageTag.ENGLISH),
        ManifestRecord("b", "wavs/b.wav", 2.0625, ("كتاب",), LanguageTag.ARABIC, pool="Ar"),
        ManifestRecord("c", "wavs/c.wav", 3.1, ("كتاب", "the", "book"), LanguageTag.CODE_SWITCHED, prov,
                       extra={"speaker_id": "s1"}),
    ]


def test_manifest_round_trip(tmp_path):
    p = tmp_path / "m.jsonl"
    write_manifest(_records(), p)
    assert read_manifest(p) == _records()
    assert read_manifest_header(p) is None


def test_manifest_header_skipped(tmp_path):
    p = tmp_path / "m.jsonl"
    write_manifest(_records(), p, header={"seed": 3})
    assert read_manifest(p) == _records()
    assert read_manifest_header(p) == {"seed": 3}


def test_manifest_wire_format(tmp_path):
    p = tmp_path / "m.jsonl"
    write_manifest(_records()[2:], p)
    d = json.loads(p.read_text(encoding="utf-8"))
    assert d["transcript"] == "كتاب the book"
    assert d["language"] == "cs"
    assert set(d["provenance"]) == {
        "base_id", "fragment_id", "fragment_word_range", "insertion_word_index",
        "gain", "xfade_samples", "clip_count", "seed_index",
    }


def test_manifest_large_order_preserved(tmp_path):
    recs = [ManifestRecord(f"u{i:05d}", f"{i}.wav", 1 + i % 7, ("w",), "en") for i in range(10_000)]
    p = tmp_path / "big.jsonl"
    write_manifest(recs, p)
    back = read_manifest(p)
    assert len(back) == 10_000
    assert [r.utterance_id for r in back] == [r.utterance_id for r in recs]


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("{}", "missing required fields"),
        ("{not json", "malformed JSON"),
        ('{"utterance_id": "x", "audio_path": "a", "duration_s": 0, "transcript": "a", "language": "en"}',
         "duration_s"),
        ('{"utterance_id": "x", "audio_path": "a", "duration_s": 1, "transcript": "a1", "language": "en"}',
         "not normalized"),
        ('{"utterance_id": "x", "audio_path": "a", "duration_s": 1, "transcript": "a", "language": "fr"}',
         "unknown language"),
    ],
)
def test_manifest_bad_lines(tmp_path, line, fragment):
    p = tmp_path / "bad.jsonl"
    good = '{"utterance_id": "ok", "audio_path": "a", "duration_s": 1, "transcript": "a", "language": "en"}'
    p.write_text(good + "\n" + line + "\n", encoding="utf-8")
    with pytest.raises(ManifestError, match=fragment) as exc:
        read_manifest(p)
    assert exc.value.lineno == 2


def test_manifest_duplicates(tmp_path):
    p = tmp_path / "dup.jsonl"
    r = ManifestRecord("x", "a", 1.0, ("a",), "en")
    write_manifest([r, r, ManifestRecord("y", "a", 1.0, (), "en"), ManifestRecord("y", "a", 1.0, (), "en")], p)
    with pytest.raises(ManifestError, match="duplicate utterance_id.*x, y"):
        read_manifest(p)


def test_write_is_atomic(tmp_path, monkeypatch):
    p = tmp_path / "m.jsonl"
    write_manifest(_records(), p)
    before = p.read_bytes()

    class Boom(Exception):
        pass

    def bad_records():
        yield _records()[0]
        raise Boom

    with pytest.raises(Boom):
        write_manifest(bad_records(), p)
    assert p.read_bytes() == before
    assert [f.name for f in tmp_path.iterdir()] == ["m.jsonl"]


def test_audio_index(tmp_path):
    p = tmp_path / "idx.jsonl"
    p.write_text(
        '{"utterance_id": "a", "audio_path": "w/a.wav", "language": "ar", "duration_s": 2.5}\n'
        '{"utterance_id": "b", "audio_path": "w/b.wav", "language": "en", "duration_s": 1, "speaker_id": "s"}\n',
        encoding="utf-8",
    )
    idx = read_audio_index(p)
    assert idx["a"].language is LanguageTag.ARABIC
    assert idx["a"].audio_path == str(tmp_path / "w/a.wav")
    assert idx["b"].speaker_id == "s"


def test_audio_index_rejects_cs(tmp_path):
    p = tmp_path / "idx.jsonl"
    p.write_text('{"utterance_id": "a", "audio_path": "a.wav", "language": "cs", "duration_s": 2}\n')
    with pytest.raises(ManifestError):
        read_audio_index(p)
