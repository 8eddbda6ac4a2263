"""Spliced-audio generation of Arabic-English code-switched speech corpora.

Modules:

- :mod:`sagecs.corpus`: CTM alignments, audio indexes, JSONL manifests
- :mod:`sagecs.audio`: 16 kHz mono PCM I/O, RMS, gain, crossfades
- :mod:`sagecs.textnorm`: English/Arabic transcript normalization
- :mod:`sagecs.splicer`: fragment insertion and dataset generation
- :mod:`sagecs.sampler`: hour-budgeted training mixtures
- :mod:`sagecs.scoring`: WER with Ar/En/CS dissection and corpus stats
"""

from .audio import AudioBuffer, read_wav, write_wav
from .corpus import AlignedUtterance, LanguageTag, ManifestRecord, WordAlignment, read_manifest, write_manifest
from .sampler import PoolBudget, emit_mixture, plan_mixture
from .scoring import category_wer, classify_utterance, corpus_stats, wer
from .splicer import SpliceConfig, generate_dataset, splice
from .textnorm import normalize

__version__ = "0.1.0"

__all__ = [
    "AlignedUtterance", "AudioBuffer", "LanguageTag", "ManifestRecord", "PoolBudget", "SpliceConfig",
    "WordAlignment", "category_wer", "classify_utterance", "corpus_stats", "emit_mixture",
    "generate_dataset", "normalize", "plan_mixture", "read_manifest", "read_wav", "splice", "wer",
    "write_manifest", "write_wav",
]
