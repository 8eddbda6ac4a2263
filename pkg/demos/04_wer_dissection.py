"""
Dissecting WER by utterance type
================================

A single WER number hides where a model fails. Split the test set into
Arabic-only, English-only and code-switched utterances and score each.
Here the "model" is simulated: it garbles English words inside Arabic
utterances far more often than elsewhere.
"""

import numpy as np

from sagecs.scoring import UtteranceCategory, align, category_wer, classify_utterance, format_report
from sagecs.synthetic import ARABIC_VOCAB, ENGLISH_VOCAB

rng = np.random.default_rng(3)


def sentence(kind):
    n = int(rng.integers(4, 10))
    if kind == "ar":
        return list(rng.choice(ARABIC_VOCAB, n))
    if kind == "en":
        return list(rng.choice(ENGLISH_VOCAB, n))
    words = list(rng.choice(ARABIC_VOCAB, n))
    k = int(rng.integers(0, n + 1))
    return words[:k] + list(rng.choice(ENGLISH_VOCAB, int(rng.integers(2, 5)))) + words[k:]


def fake_decode(ref):
    cs = classify_utterance(ref) is UtteranceCategory.CS
    hyp = []
    for w in ref:
        p_err = 0.35 if cs and w.isascii() else 0.05
        r = rng.random()
        if r < p_err / 2:
            hyp.append(str(rng.choice(ARABIC_VOCAB)))  # transliterated into the wrong script
        elif r < p_err:
            continue
        else:
            hyp.append(w)
    return hyp


pairs = [(ref, fake_decode(ref)) for ref in (sentence(k) for k in rng.choice(["ar", "en", "cs"], 300))]
report = category_wer(pairs)
print(format_report(report))
print("\nAr / En / CS:", report.short())

# %%
# One alignment, to see the edit operations behind the counts.
ref, hyp = next(p for p in pairs if classify_utterance(p[0]) is UtteranceCategory.CS and p[0] != p[1])
for op, r, h in align(ref, hyp):
    print(f"{op}  {r or '':>12}  {h or ''}")
