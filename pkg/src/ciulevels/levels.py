"""Partitions, levels structures, induced games and quotient structures.

Players may be any hashable, orderable labels: ints for original players,
frozensets of blocks once a structure has been quotiented.  Partitions are
kept in a canonical form (blocks ordered by their smallest underlying
member) so that structural equality is plain tuple equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .coalitions import Game, coalition

Block = frozenset
Partition = tuple  # tuple[frozenset, ...] in canonical order


class LevelsStructureError(ValueError):
    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level


class NotAPartition(LevelsStructureError):
    pass


class NotCoarsening(LevelsStructureError):
    pass


class MissingSingletonLevel(LevelsStructureError):
    pass


class MissingGrandCoalition(LevelsStructureError):
    pass


def _key(x):
    if isinstance(x, (frozenset, set)):
        return min(_key(m) for m in x)
    return x


def canonical_partition(blocks: Iterable[Iterable[Hashable]]) -> Partition:
    return tuple(sorted((frozenset(b) for b in blocks), key=_key))


def is_partition(blocks: Sequence[frozenset], players: frozenset) -> bool:
    seen: set = set()
    for b in blocks:
        if not b or seen & b:
            return False
        seen |= b
    return seen == players


def singletons(players: Iterable[Hashable]) -> Partition:
    return canonical_partition({p} for p in players)


@dataclass(frozen=True)
class LevelsStructure:
    """Validated sequence ``B^0, ..., B^h`` of successively coarser partitions."""

    players: tuple
    levels: tuple

    @property
    def degree(self) -> int:
        return len(self.levels) - 1

    def __getitem__(self, k: int) -> Partition:
        return self.levels[k]

    def union_containing(self, k: int, s: Iterable[Hashable]) -> frozenset:
        """The block of level ``k`` that contains every player of ``s``."""
        s = frozenset(s)
        for block in self.levels[k]:
            if s <= block:
                return block
        raise ValueError(f"{set(s)} is not inside a single block of level {k}")

    def map_players(self, fn: Callable[[Hashable], Hashable]) -> "LevelsStructure":
        levels = [canonical_partition({fn(p) for p in b} for b in level) for level in self.levels]
        return validate_levels_structure(levels)


def validate_levels_structure(partitions: Sequence[Iterable[Iterable[Hashable]]]) -> LevelsStructure:
    """Check the levels-structure conditions, raising on the first violation."""
    levels = [canonical_partition(p) for p in partitions]
    if not levels:
        raise MissingSingletonLevel("a levels structure needs at least the singleton level", 0)
    players = frozenset().union(*levels[0]) if levels[0] else frozenset()
    for k, level in enumerate(levels):
        if not is_partition(level, players):
            raise NotAPartition(f"level {k} is not a partition of the player set", k)
        if k == 0:
            if any(len(b) != 1 for b in level):
                raise MissingSingletonLevel("level 0 must consist of singletons", 0)
            continue
        previous = levels[k - 1]
        for block in level:
            if frozenset().union(*(b for b in previous if b <= block)) != block:
                raise NotCoarsening(
                    f"block {sorted(block, key=_key)} of level {k} is not a union of level {k - 1} blocks",
                    k,
                )
    if levels[-1] != (players,):
        raise MissingGrandCoalition("the last level must be the grand coalition", len(levels) - 1)
    return LevelsStructure(players=tuple(sorted(players, key=_key)), levels=tuple(levels))


def immediate_players(s: Iterable[Hashable], b: Iterable[frozenset]) -> Partition:
    """Blocks of ``b`` contained in ``s``; ``s`` must be a union of such blocks."""
    s = frozenset(s)
    inside = canonical_partition(block for block in b if block <= s)
    if frozenset().union(*inside) != s:
        raise ValueError(f"{sorted(s, key=_key)} is not a union of blocks of the partition")
    return inside


def induced_game(g: Game, level_partition: Iterable[Iterable[int]]) -> Game:
    """Game whose players are the blocks (in canonical order) of a partition."""
    blocks = canonical_partition(level_partition)
    if not is_partition(blocks, frozenset(range(g.n_players))):
        raise ValueError("not a partition of the game's players")
    block_masks = [coalition(b) for b in blocks]
    m = len(blocks)
    unions = np.zeros(1 << m, dtype=np.int64)
    for i, bm in enumerate(block_masks):
        bit = 1 << i
        unions[bit : 2 * bit] = unions[:bit] | bm
    return Game(m, g.worth[unions])


def quotient_levels(ls: LevelsStructure, k: int) -> LevelsStructure:
    """Structure of degree ``h - k`` whose players are the unions of level ``k``."""
    if not 0 <= k <= ls.degree:
        raise IndexError(f"level {k} outside 0..{ls.degree}")
    base = ls.levels[k]
    levels = [
        canonical_partition(frozenset(u for u in base if u <= outer) for outer in ls.levels[k + r])
        for r in range(ls.degree - k + 1)
    ]
    return validate_levels_structure(levels)
