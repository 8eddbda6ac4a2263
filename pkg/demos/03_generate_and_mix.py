"""
Generating spliced data and an experience-replay mixture
========================================================

Build small Arabic and English pools on disk, generate spliced
code-switched audio from them, then mix all three pools under hour budgets
in the same proportions as the 450 h recipe (100 + 100 + 250), scaled down
by 1000x.
"""

import json
import sys
import tempfile
from pathlib import Path

from sagecs.corpus import LanguageTag, ManifestRecord, read_manifest, write_manifest
from sagecs.sampler import PoolBudget, emit_mixture, plan_mixture, write_budgets
from sagecs.scoring import corpus_stats
from sagecs.splicer import SpliceConfig, generate_dataset
from sagecs.synthetic import make_pool, write_corpus

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="sage-mix-"))
AR, EN = LanguageTag.ARABIC, LanguageTag.ENGLISH

# Monolingual pools: roughly 0.12 h each.
utts = write_corpus(root / "mono", make_pool(AR, 200, 1) + make_pool(EN, 200, 1))
ar = [u for u in utts if u.language is AR]
en = [u for u in utts if u.language is EN]


def monolingual_manifest(pool, name):
    recs = [ManifestRecord(u.utterance_id, u.audio_path, u.duration_s, u.tokens, u.language) for u in pool]
    write_manifest(recs, root / f"{name}.jsonl")
    return recs


monolingual_manifest(ar, "Ar")
monolingual_manifest(en, "En")

# %%
# 0.26 h of spliced audio; each output index has its own random stream, so
# ``workers`` only changes the wall-clock time.
sage = generate_dataset(ar, en, 0.26, SpliceConfig(), master_seed=2024, out_dir=root / "sage", workers=2)
print(f"generated {len(sage)} spliced utterances, {sum(r.duration_s for r in sage) / 3600:.3f} h")
for r in sage[:3]:
    p = r.provenance
    print(f"  {r.utterance_id}: {' '.join(r.transcript)}  (base {p.base_id}, gain {p.gain:.2f})")

# %%
# The 450 h recipe, scaled to 0.45 h.
budgets = [PoolBudget("Ar", "Ar.jsonl", 0.1), PoolBudget("En", "En.jsonl", 0.1),
           PoolBudget("SAGE", "sage/manifest.jsonl", 0.25)]
write_budgets(budgets, root / "M_450.jsonl")
plan = plan_mixture(budgets, seed=0, pool_records={
    "Ar": read_manifest(root / "Ar.jsonl"), "En": read_manifest(root / "En.jsonl"),
    "SAGE": read_manifest(root / "sage" / "manifest.jsonl"),
})
for name, sel in plan.pools.items():
    print(f"{name:>5}: {len(sel.utterance_ids):4d} utterances, {sel.achieved_hours:.4f} h"
          f" (budget {sel.budget_hours} h, overshoot < {sel.max_duration_s:.1f} s)")
emit_mixture(plan, root / "train.jsonl")

print(json.dumps(corpus_stats(root / "train.jsonl").to_dict(), indent=2))
