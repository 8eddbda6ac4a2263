"""Hour-budgeted mixing of training pools (experience-replay style).

Each pool contributes utterances drawn uniformly without replacement until
its budget is first reached; the union is then shuffled into one manifest.
For example the 450 h recipe is Arabic 100 h + English 100 h + spliced
250 h, and the 300 h recipe cuts the spliced pool to 100 h.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ManifestRecord, read_manifest, write_manifest


class InfeasibleBudgetError(ValueError):
    def __init__(self, pool_name: str, budget_hours: float, available_hours: float):
        super().__init__(
            f"pool {pool_name!r}: budget {budget_hours:g} h exceeds the {available_hours:g} h available"
        )
        self.pool_name = pool_name
        self.budget_hours = budget_hours
        self.available_hours = available_hours


@dataclass(frozen=True)
class PoolBudget:
    pool_name: str
    manifest_path: str
    budget_hours: float

    def __post_init__(self):
        if not self.pool_name:
            raise ValueError("empty pool_name")
        if not self.budget_hours > 0:
            raise ValueError(f"pool {self.pool_name!r}: budget_hours must be > 0")


@dataclass
class PoolSelection:
    pool_name: str
    budget_hours: float
    utterance_ids: list[str]
    achieved_hours: float
    max_duration_s: float


@dataclass
class MixturePlan:
    seed: int
    pools: dict[str, PoolSelection]
    order: list[tuple[str, str]]  # (pool_name, utterance_id) in output order
    records: dict[tuple[str, str], ManifestRecord] = field(repr=False, default_factory=dict)

    @property
    def total_hours(self) -> float:
        return sum(p.achieved_hours for p in self.pools.values())


def read_budgets(path) -> list[PoolBudget]:
    """JSONL of ``{pool_name, manifest_path, budget_hours}``.

    Relative manifest paths resolve against the budgets file's directory.
    """
    path = Path(path)
    budgets = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                budgets.append(PoolBudget(
                    str(d["pool_name"]), str(path.parent / d["manifest_path"]), float(d["budget_hours"])
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad budget entry: {exc}") from None
    return budgets


def write_budgets(budgets: Sequence[PoolBudget], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for b in budgets:
            f.write(json.dumps({"pool_name": b.pool_name, "manifest_path": b.manifest_path,
                                "budget_hours": b.budget_hours}) + "\n")


def select_pool(records: Sequence[ManifestRecord], budget_s: float, rng: np.random.Generator) -> list[int]:
    """Indices of a random prefix whose total duration first reaches ``budget_s``."""
    chosen, total = [], 0.0
    for i in rng.permutation(len(records)):
        if total >= budget_s:
            break
        chosen.append(int(i))
        total += records[i].duration_s
    return chosen


def plan_mixture(
    budgets: Sequence[PoolBudget],
    seed: int,
    pool_records: dict[str, Sequence[ManifestRecord]] | None = None,
) -> MixturePlan:
    """Select utterances per pool under its hour budget and shuffle the union.

    ``pool_records`` supplies already-loaded manifests by pool name;
    otherwise each budget's ``manifest_path`` is read.
    """
    names = [b.pool_name for b in budgets]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate pool names in budgets: {names}")
    if not budgets:
        raise ValueError("no pool budgets given")
    streams = np.random.SeedSequence(seed).spawn(len(budgets) + 1)

    pools, records, order = {}, {}, []
    for budget, stream in zip(budgets, streams):
        recs = pool_records[budget.pool_name] if pool_records is not None else read_manifest(budget.manifest_path)
        available_s = sum(r.duration_s for r in recs)
        budget_s = budget.budget_hours * 3600
        if budget_s > available_s:
            raise InfeasibleBudgetError(budget.pool_name, budget.budget_hours, available_s / 3600)
        chosen = select_pool(recs, budget_s, np.random.default_rng(stream))
        ids = [recs[i].utterance_id for i in chosen]
        pools[budget.pool_name] = PoolSelection(
            budget.pool_name,
            budget.budget_hours,
            ids,
            sum(recs[i].duration_s for i in chosen) / 3600,
            max(r.duration_s for r in recs),
        )
        for i in chosen:
            key = (budget.pool_name, recs[i].utterance_id)
            records[key] = recs[i]
            order.append(key)

    ids = [uid for _, uid in order]
    if len(set(ids)) != len(ids):
        raise ValueError("the same utterance_id was selected from more than one pool")
    perm = np.random.default_rng(streams[-1]).permutation(len(order))
    return MixturePlan(seed, pools, [order[i] for i in perm], records)


def emit_mixture(plan: MixturePlan, output_path) -> list[ManifestRecord]:
    """Write the plan as one manifest, each record tagged with its pool."""
    out = [replace(plan.records[key], pool=key[0]) for key in plan.order]
    header = {
        "mixture_seed": plan.seed,
        "pools": {n: {"budget_hours": p.budget_hours, "achieved_hours": p.achieved_hours,
                      "utterances": len(p.utterance_ids)} for n, p in plan.pools.items()},
    }
    write_manifest(out, output_path, header=header)
    return out
