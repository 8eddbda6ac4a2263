"""English and Arabic transcript normalization.

English is folded onto ``a-z`` plus the apostrophe; Arabic is stripped of
diacritics and tatweel, presentation forms are mapped back to their base
letters, and only the 36-letter set below survives. Anything else splits
tokens. Input that cannot be verbalized (Arabic numerals, unmapped symbols,
letters from other scripts) is reported as a :class:`Flag` so callers can
exclude the utterance.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

LATIN_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz'")

ARABIC_BASE_LETTERS = frozenset(
    "ابتثجحخدذرزسشص"
    "ضطظعغفقكلمنهوي"
)
# ta marbuta, alif maqsura
ARABIC_MODIFIED_LETTERS = frozenset("ةى")
# hamza, alif hamza above, alif hamza below, alif madda, waw hamza, ya hamza
ARABIC_HAMZA_FORMS = frozenset("ءأإآؤئ")
ARABIC_CHARS = ARABIC_BASE_LETTERS | ARABIC_MODIFIED_LETTERS | ARABIC_HAMZA_FORMS

TATWEEL = "ـ"


def _codepoints(*ranges: tuple[int, int]) -> frozenset[str]:
    return frozenset(chr(c) for lo, hi in ranges for c in range(lo, hi + 1))


# Harakat, tanwin, shadda and sukun, plus superscript alef.
CORE_DIACRITICS = _codepoints((0x064B, 0x0652), (0x0670, 0x0670))
# Remaining Arabic-block combining marks (Quranic annotation, madda/hamza marks
# left over after composition). Dropped so they never split a word.
EXTENDED_DIACRITICS = _codepoints(
    (0x0610, 0x061A), (0x0653, 0x065F), (0x06D6, 0x06DC), (0x06DF, 0x06E4),
    (0x06E7, 0x06E8), (0x06EA, 0x06ED), (0x08D3, 0x08E1), (0x08E3, 0x08FF),
)
DEFAULT_STRIP = CORE_DIACRITICS | EXTENDED_DIACRITICS | {TATWEEL}

_APOSTROPHES = {"'", "’", "‘", "ʼ", "ʹ", "`", "´"}

EN_SYMBOLS = {"%": "percent", "&": "and", "+": "plus", "=": "equals", "@": "at", "°": "degrees"}

_ONES = (
    "zero one two three four five six seven eight nine ten eleven twelve thirteen "
    "fourteen fifteen sixteen seventeen eighteen nineteen"
).split()
_TENS = "_ _ twenty thirty forty fifty sixty seventy eighty ninety".split()
_SCALES = ((10**6, "million"), (10**3, "thousand"))

_NUMBER = re.compile(r"(?<![\w.,])(\d{1,3}(?:,\d{3})+|\d+)(?:\.(\d+))?(?![\w])")


class Script(str, enum.Enum):
    ARABIC = "arabic"
    LATIN = "latin"


class TokenClass(str, enum.Enum):
    ARABIC = "arabic"
    LATIN = "latin"
    MIXED = "mixed"
    OTHER = "other"


@dataclass(frozen=True)
class NormalizedToken:
    text: str
    script: Script

    def __post_init__(self):
        allowed = ARABIC_CHARS if self.script is Script.ARABIC else LATIN_CHARS
        if not self.text or any(c not in allowed for c in self.text):
            raise ValueError(f"{self.text!r} is not a valid {self.script.value} token")

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class Flag:
    token: str
    reason: str


@dataclass
class NormalizationResult:
    tokens: list[NormalizedToken] = field(default_factory=list)
    flags: list[Flag] = field(default_factory=list)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def __str__(self):
        return " ".join(self.texts)


def classify_token(token: str) -> TokenClass:
    if not token:
        raise ValueError("cannot classify an empty token")
    has_ar = has_lat = False
    for c in token:
        if c in ARABIC_CHARS:
            has_ar = True
        elif c in LATIN_CHARS:
            has_lat = True
        else:
            return TokenClass.OTHER
    if has_ar and has_lat:
        return TokenClass.MIXED
    return TokenClass.ARABIC if has_ar else TokenClass.LATIN


def verbalize_number_en(n: int) -> list[NormalizedToken]:
    """English cardinal words for ``0 <= n < 10**9``.

    >>> [t.text for t in verbalize_number_en(1200)]
    ['one', 'thousand', 'two', 'hundred']
    """
    if isinstance(n, bool) or not isinstance(n, int) or not 0 <= n < 10**9:
        raise ValueError(f"cannot verbalize {n!r}: need an integer in [0, 1e9)")
    return [NormalizedToken(w, Script.LATIN) for w in _cardinal(n)]


def _below_thousand(n: int) -> list[str]:
    words = []
    if n >= 100:
        words += [_ONES[n // 100], "hundred"]
        n %= 100
    if n >= 20:
        words.append(_TENS[n // 10])
        n %= 10
        if n:
            words.append(_ONES[n])
    elif n:
        words.append(_ONES[n])
    return words


def _cardinal(n: int) -> list[str]:
    if n == 0:
        return ["zero"]
    words = []
    for scale, name in _SCALES:
        if n >= scale:
            words += _below_thousand(n // scale) + [name]
            n %= scale
    return words + _below_thousand(n)


def _spell_number(integer: str, fraction: str | None) -> list[str] | None:
    digits = integer.replace(",", "")
    if len(digits) > 1 and digits.startswith("0"):
        words = [_ONES[int(d)] for d in digits]
    elif int(digits) < 10**9:
        words = _cardinal(int(digits))
    else:
        return None
    if fraction:
        words += ["point"] + [_ONES[int(d)] for d in fraction]
    return words


def load_acronym_table(path) -> dict[str, str]:
    """Read a two-column ``acronym<TAB>expansion`` UTF-8 file."""
    table = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip():
            raise ValueError(f"{path}:{lineno}: expected 'acronym<TAB>expansion'")
        table[parts[0].strip()] = parts[1].strip()
    return table


def _expand_acronyms(text: str, acronyms: dict[str, str]) -> str:
    out = []
    for chunk in re.split(r"(\s+)", text):
        core = chunk.strip(".,;:!?\"()[]{}")
        if core and core in acronyms:
            chunk = chunk.replace(core, " " + acronyms[core] + " ", 1)
        out.append(chunk)
    return "".join(out)


def _latin_fold(c: str) -> str | None:
    if c in _APOSTROPHES:
        return "'"
    if c.isascii():
        low = c.lower()
        return low if low in LATIN_CHARS else None
    folded = "".join(
        ch for ch in unicodedata.normalize("NFKD", c.casefold()) if not unicodedata.combining(ch)
    )
    if folded and all("a" <= ch <= "z" for ch in folded):
        return folded
    return None


def _is_presentation_form(c: str) -> bool:
    o = ord(c)
    return 0xFB50 <= o <= 0xFDFF or 0xFE70 <= o <= 0xFEFC


def _canonical_arabic(text: str, strip: frozenset[str]) -> str:
    # compose alif + hamza/madda marks first so they survive diacritic removal
    text = unicodedata.normalize("NFC", text)
    if any(_is_presentation_form(c) for c in text):
        text = "".join(unicodedata.normalize("NFKC", c) if _is_presentation_form(c) else c for c in text)
        text = unicodedata.normalize("NFC", text)
    return "".join(c for c in text if c not in strip)


def _arabic_context(text: str) -> bool:
    has_ar = any(c in ARABIC_CHARS for c in text)
    has_lat = any(c.isascii() and c.isalpha() for c in text)
    return has_ar and not has_lat


def _verbalize_numbers(text: str) -> str:
    def repl(m):
        words = _spell_number(m.group(1), m.group(2))
        return m.group(0) if words is None else " " + " ".join(words) + " "

    text = _NUMBER.sub(repl, text)
    for sym, word in EN_SYMBOLS.items():
        if sym in text:
            text = text.replace(sym, f" {word} ")
    return text


# per-character classes
_AR, _LAT, _DIGIT, _FOREIGN, _SYMBOL, _BOUNDARY = range(6)


def _char_class(c: str, keep_arabic: bool, keep_latin: bool) -> tuple[int, str]:
    if c in ARABIC_CHARS:
        return (_AR, c) if keep_arabic else (_BOUNDARY, "")
    folded = _latin_fold(c)
    if folded is not None:
        return (_LAT, folded) if keep_latin else (_BOUNDARY, "")
    cat = unicodedata.category(c)
    if cat == "Nd":
        return _DIGIT, c
    if cat[0] == "L" and keep_arabic and keep_latin:
        return _FOREIGN, c
    if cat[0] == "S" and c not in _APOSTROPHES:
        return _SYMBOL, c
    return _BOUNDARY, ""


def _tokenize(text: str, keep_arabic: bool, keep_latin: bool, result: NormalizationResult) -> None:
    # words are maximal runs of non-boundary characters
    word: list[tuple[int, str]] = []
    raw: list[str] = []

    def flush():
        if not word:
            return
        classes = {k for k, _ in word}
        source = "".join(raw)
        if _DIGIT in classes:
            result.flags.append(Flag(source, "unverbalized_digits"))
        elif _FOREIGN in classes:
            result.flags.append(Flag(source, "unsupported_characters"))
        else:
            # split script changes inside one word into separate tokens
            run_kind, run = word[0][0], []
            for kind, piece in word:
                if kind != run_kind:
                    _emit(run_kind, "".join(run), result)
                    run_kind, run = kind, []
                run.append(piece)
            _emit(run_kind, "".join(run), result)
        word.clear()
        raw.clear()

    for c in text:
        kind, piece = _char_class(c, keep_arabic, keep_latin)
        if kind == _SYMBOL:
            flush()
            result.flags.append(Flag(c, "unmapped_symbol"))
        elif kind == _BOUNDARY:
            flush()
        else:
            word.append((kind, piece))
            raw.append(c)
    flush()


def _emit(kind: int, text: str, result: NormalizationResult) -> None:
    if kind == _AR:
        result.tokens.append(NormalizedToken(text, Script.ARABIC))
    elif text.strip("'"):
        # 'quoted' words lose the quotes; don't, students' and 'cause keep theirs
        if len(text) > 1 and text[0] == text[-1] == "'":
            text = text.strip("'")
        result.tokens.append(NormalizedToken(text, Script.LATIN))


def _run(
    text: str,
    keep_arabic: bool,
    keep_latin: bool,
    language_hint: str | None,
    acronyms: dict[str, str] | None,
    strip: frozenset[str],
) -> NormalizationResult:
    result = NormalizationResult()
    if acronyms:
        text = _expand_acronyms(text, acronyms)
    text = _canonical_arabic(text, strip)
    if language_hint in ("ar", "arabic"):
        arabic_ctx = True
    elif language_hint in ("en", "english"):
        arabic_ctx = False
    elif language_hint is None:
        arabic_ctx = _arabic_context(text) if keep_latin else True
    else:
        raise ValueError(f"unknown language hint {language_hint!r}")
    if keep_latin and not arabic_ctx:
        text = _verbalize_numbers(text)
    _tokenize(text, keep_arabic, keep_latin, result)
    return result


def normalize(
    text: str,
    language_hint: str | None = None,
    acronyms: dict[str, str] | None = None,
    strip: frozenset[str] = DEFAULT_STRIP,
) -> NormalizationResult:
    """Normalize mixed Arabic/English text, routing each token by script.

    ``language_hint`` ("ar" or "en") decides how bare digits are treated;
    without it, text containing Arabic letters and no Latin letters is
    treated as Arabic, where digits are flagged instead of verbalized.
    """
    return _run(text, True, True, language_hint, acronyms, strip)


def normalize_english(text: str, acronyms: dict[str, str] | None = None) -> list[NormalizedToken]:
    return _run(text, False, True, "en", acronyms, DEFAULT_STRIP).tokens


def normalize_arabic(text: str, strip: frozenset[str] = DEFAULT_STRIP) -> list[NormalizedToken]:
    return _run(text, True, False, "ar", None, strip).tokens


def is_normalized_token(token: str) -> bool:
    return classify_token(token) in (TokenClass.ARABIC, TokenClass.LATIN) if token else False
