"""Exhaustive search for two-way representations S_k^e + S_l^e = S_m^e + S_n^e.

Index pairs are written with the larger index first. Two pairs count as a
collision when their sums agree exactly and their leading indices differ;
the pair with the smaller leading index is ``pair_a`` = (k, l), the other is
``pair_b`` = (m, n), so m > k always holds.
"""
from __future__ import annotations

import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .recurrence_core import SequenceKind, seq_range, seq_value

Pair = tuple[int, int]


@dataclass(frozen=True)
class SearchConfig:
    kind: SequenceKind
    exponent: int = 3
    max_first: int = 162
    max_second: int = 171
    min_index: int = 1

    def __post_init__(self):
        if self.exponent < 2:
            raise ValueError("exponent must be >= 2")
        if self.min_index < 0:
            raise ValueError("min_index must be >= 0")
        if self.min_index > min(self.max_first, self.max_second):
            raise ValueError("min_index exceeds the index bounds")

    @property
    def top(self) -> int:
        return max(self.max_first, self.max_second)


@dataclass(frozen=True, order=True)
class CollisionRecord:
    value: int
    pair_a: Pair
    pair_b: Pair
    trivial: bool

    def to_json(self) -> dict:
        return {
            "value": str(self.value),
            "pair_a": list(self.pair_a),
            "pair_b": list(self.pair_b),
            "trivial": self.trivial,
        }


def _powers(kind: SequenceKind, exponent: int, top: int) -> list[int]:
    return [v**exponent for v in seq_range(kind, top + 1)]


def _shard_sums(args) -> dict[int, list[Pair]]:
    kind, exponent, top, min_index, shard, shards = args
    pw = _powers(kind, exponent, top)
    sums: dict[int, list[Pair]] = defaultdict(list)
    for i in range(min_index + shard, top + 1, shards):
        pi = pw[i]
        for j in range(min_index, i + 1):
            sums[pi + pw[j]].append((i, j))
    return sums


def _term_values(pair: Pair, kind: SequenceKind) -> list[int]:
    return sorted(seq_value(kind, i) for i in pair)


def classify_trivial(rec: CollisionRecord, kind: SequenceKind) -> bool:
    """True iff both sides use the same multiset of term values."""
    return _term_values(rec.pair_a, kind) == _term_values(rec.pair_b, kind)


def search(config: SearchConfig, workers: Optional[int] = 1) -> list[CollisionRecord]:
    """All collisions with k <= max_first, m <= max_second, m > k, in canonical order."""
    top = config.top
    workers = workers or os.cpu_count() or 1
    shard_args = [
        (config.kind, config.exponent, top, config.min_index, s, workers) for s in range(workers)
    ]
    if workers == 1:
        maps = [_shard_sums(shard_args[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            maps = list(pool.map(_shard_sums, shard_args))
    merged: dict[int, list[Pair]] = defaultdict(list)
    for m in maps:
        for key, pairs in m.items():
            merged[key].extend(pairs)

    values = seq_range(config.kind, top + 1)
    records = []
    for total, pairs in merged.items():
        if len(pairs) < 2:
            continue
        pairs.sort()
        for a in pairs:
            if a[0] > config.max_first:
                continue
            for b in pairs:
                if b[0] <= a[0] or b[0] > config.max_second:
                    continue
                trivial = sorted((values[a[0]], values[a[1]])) == sorted((values[b[0]], values[b[1]]))
                records.append(CollisionRecord(total, a, b, trivial))
    records.sort(key=lambda r: (r.value, r.pair_a, r.pair_b))
    return records


def verify_record(rec: CollisionRecord, kind: SequenceKind, exponent: int) -> bool:
    """Recompute both sums from scratch."""
    lhs = sum(seq_value(kind, i) ** exponent for i in rec.pair_a)
    rhs = sum(seq_value(kind, i) ** exponent for i in rec.pair_b)
    return lhs == rhs == rec.value
