"""
Splicing one code-switched utterance
====================================

Cut a two-to-four word English span out of one utterance and drop it into
an Arabic one, then check what happened to the samples.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from sagecs.audio import quantize, speech_rms, write_wav
from sagecs.corpus import LanguageTag
from sagecs.splicer import SpliceConfig, base_speech_range, plan_splice, splice
from sagecs.synthetic import make_utterance

out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="sage-demo-"))
rng = np.random.default_rng(7)

# Two synthetic utterances: tone-burst "words" with exact word alignments.
# The English one is recorded much quieter than the Arabic one.
base, base_audio = make_utterance(rng, "ar-base", LanguageTag.ARABIC, 5, level=0.5)
source, source_audio = make_utterance(rng, "en-source", LanguageTag.ENGLISH, 8, level=0.08)
print("base:  ", " ".join(base.tokens), f"({len(base_audio)} samples)")
print("source:", " ".join(source.tokens), f"({len(source_audio)} samples)")

# %%
# A plan is every random choice for one output: which words, where, how loud.
spec = plan_splice(base, base_audio, source, source_audio, rng, SpliceConfig())
i, j = spec.fragment.word_range
print(f"\nfragment words {i}..{j - 1}: {' '.join(source.tokens[i:j])}")
print(f"insert before base word {spec.insertion.word_index} at sample {spec.insertion.time_sample}")
print(f"gain {spec.gain:.3f}, crossfade {spec.xfade} samples")

result = splice(base, base_audio, source, source_audio, spec)
print("\nspliced:", " ".join(result.transcript))

# %%
# Every junction overlaps ``xfade`` samples, so the length is predictable.
expected = len(base_audio) + spec.fragment.n_samples - result.n_junctions * spec.xfade
print(f"\nlength {len(result.audio)} == {len(base_audio)} + {spec.fragment.n_samples}"
      f" - {result.n_junctions}*{spec.xfade} = {expected}")

# %%
# Base samples away from the junctions pass through untouched.
t, x = spec.insertion.time_sample, spec.xfade
q_out, q_base = quantize(result.audio.samples), quantize(base_audio.samples)
if 0 < t < len(base_audio):
    head_ok = np.array_equal(q_out[:t - x], q_base[:t - x])
    tail_ok = np.array_equal(q_out[t + spec.fragment.n_samples - x:], q_base[t + x:])
    print("base head preserved:", head_ok, " base tail preserved:", tail_ok)
else:
    print("fragment sits at an utterance edge; one junction only")

# %%
# The quiet fragment was brought up to the base's speech level.
lo, hi = base_speech_range(base)
frag_level = speech_rms(source_audio, spec.fragment.start_sample, spec.fragment.end_sample)
print(f"\nbase speech RMS {speech_rms(base_audio, lo, hi):.4f}, fragment before gain {frag_level:.4f},"
      f" after {frag_level * spec.gain:.4f}")

write_wav(result.audio, out_dir / "spliced.wav")
print("wrote", out_dir / "spliced.wav")
