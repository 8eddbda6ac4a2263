"""
Normalizing mixed Arabic/English text
=====================================

Transcripts are reduced to lowercase Latin letters plus apostrophe for
English and a fixed 36-letter set for Arabic. Anything that cannot be
mapped safely is flagged rather than guessed.
"""

from sagecs.textnorm import ARABIC_CHARS, LATIN_CHARS, normalize

print(len(LATIN_CHARS), "Latin symbols,", len(ARABIC_CHARS), "Arabic letters")

samples = [
    ("Hello, World! It's 2024.", "en"),
    ("مُحَمَّدٌ ذَهَبَ إِلى المَدْرَسَةِ", "ar"),
    ("I read كِتَاب every day", None),
    ("ﻛﺘﺎﺏ", "ar"),              # presentation forms
    ("كـــتاب", "ar"),           # tatweel stretching
    ("عندي ٣ كتب", "ar"),        # Arabic-context digits are flagged
    ("50% off & more", "en"),
    ("привет world", None),
]

for text, lang in samples:
    r = normalize(text, lang)
    flags = ", ".join(f"{f.token!r} ({f.reason})" for f in r.flags)
    print(f"\n{text!r} [{lang or 'auto'}]")
    print("  ->", " ".join(r.texts) or "(nothing)")
    if flags:
        print("  flagged:", flags)

# %%
# Running the output through again changes nothing.
once = normalize("Don't STOP — مَرْحَباً 12 times").texts
twice = normalize(" ".join(once)).texts
print("\nidempotent:", once == twice, once)
