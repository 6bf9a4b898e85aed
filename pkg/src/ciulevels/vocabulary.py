"""Named feature coalitions (intermediate concepts) and their levels structure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .levels import LevelsStructure, canonical_partition, immediate_players, validate_levels_structure


class VocabularyError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}" + (f", column {column}" if column else "") if line else ""
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Vocabulary:
    """Concepts over 0-based feature indices, in definition order.

    ``parts`` keeps each concept's declared constituents (feature indices and
    concept names) so that nested definitions stay visible after expansion.
    """

    feature_names: tuple[str, ...]
    concepts: tuple[tuple[str, frozenset], ...]
    parts: tuple[tuple[str, tuple], ...]

    @classmethod
    def from_definitions(
        cls,
        definitions: Mapping[str, Sequence],
        feature_names: Sequence[str],
        positions: Mapping[str, tuple] | None = None,
    ) -> "Vocabulary":
        """Expand definitions whose ints are 1-based feature indices and whose
        strings name other concepts.  This is the single place where 1-based
        indices become 0-based."""
        n = len(feature_names)
        positions = positions or {}
        if not definitions:
            raise VocabularyError("vocabulary defines no concepts")
        expanded: dict[str, frozenset] = {}
        state: dict[str, str] = {}

        def expand(name: str, chain: list[str]) -> frozenset:
            if state.get(name) == "done":
                return expanded[name]
            if state.get(name) == "active":
                cycle = " -> ".join(chain[chain.index(name):] + [name])
                raise VocabularyError(f"cyclic concept definition {cycle}", *positions.get(name, ()))
            state[name] = "active"
            members: set[int] = set()
            for item in definitions[name]:
                if isinstance(item, bool):
                    raise VocabularyError(f"{name}: invalid item {item!r}", *positions.get(name, ()))
                if isinstance(item, int):
                    if not 1 <= item <= n:
                        raise VocabularyError(
                            f"{name}: feature index {item} outside 1..{n}", *positions.get(name, ())
                        )
                    members.add(item - 1)
                elif isinstance(item, str):
                    if item not in definitions:
                        raise VocabularyError(
                            f"{name}: unknown concept {item!r}", *positions.get(name, ())
                        )
                    members |= expand(item, chain + [name])
                else:
                    raise VocabularyError(f"{name}: invalid item {item!r}", *positions.get(name, ()))
            if not members:
                raise VocabularyError(f"{name}: empty concept", *positions.get(name, ()))
            state[name] = "done"
            expanded[name] = frozenset(members)
            return expanded[name]

        for name in definitions:
            expand(name, [])
        parts = tuple(
            (name, tuple(i - 1 if isinstance(i, int) else i for i in items))
            for name, items in definitions.items()
        )
        return cls(
            feature_names=tuple(feature_names),
            concepts=tuple((name, expanded[name]) for name in definitions),
            parts=parts,
        )

    @classmethod
    def singletons(cls, feature_names: Sequence[str]) -> "Vocabulary":
        return cls.from_definitions({f: [i + 1] for i, f in enumerate(feature_names)}, feature_names)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.concepts)

    def __getitem__(self, name: str) -> frozenset:
        for n, s in self.concepts:
            if n == name:
                return s
        raise KeyError(f"unknown concept {name!r}")

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def block_name(self, block: frozenset) -> str:
        """First concept naming exactly ``block``, else the feature name(s)."""
        for name, s in self.concepts:
            if s == block:
                return name
        if len(block) == 1:
            return self.feature_names[next(iter(block))]
        return "+".join(self.feature_names[i] for i in sorted(block))

    def _nodes(self) -> list[frozenset]:
        nodes = [frozenset({i}) for i in range(self.n_features)]
        for _, s in self.concepts:
            if s not in nodes:
                nodes.append(s)
        return nodes

    def constituents(self, name: str) -> list[tuple[str, frozenset]]:
        """Maximal named concepts or single features strictly inside ``name``."""
        whole = self[name]
        inner = [s for s in self._nodes() if s < whole]
        top = [s for s in inner if not any(s < t for t in inner)]
        if not top:
            return []
        covered = frozenset().union(*top) if top else frozenset()
        if covered != whole or any(a & b for i, a in enumerate(top) for b in top[i + 1 :]):
            raise VocabularyError(f"{name}: sub-concepts overlap or leave features uncovered")
        return [(self.block_name(s), s) for s in canonical_partition(top)]

    def levels_structure(self) -> LevelsStructure:
        """Levels from singletons up to the grand coalition, one per concept height.

        A concept's height is one more than the largest height among the
        nodes strictly inside it (features have height 0).  Level ``k``
        holds the maximal nodes of height at most ``k``.  The concepts must
        form a laminar family (any two are nested or disjoint).
        """
        nodes = self._nodes()
        for i, a in enumerate(nodes):
            for b in nodes[i + 1 :]:
                if a & b and not (a <= b or b <= a):
                    raise VocabularyError(
                        f"concepts {self.block_name(a)!r} and {self.block_name(b)!r} overlap without nesting"
                    )
        height: dict[frozenset, int] = {}
        for s in sorted(nodes, key=len):
            inside = [height[t] for t in height if t < s]
            height[s] = 1 + max(inside) if inside and len(s) > 1 else 0
        grand = frozenset(range(self.n_features))
        levels = []
        for k in range(max(height.values()) + 1):
            eligible = [s for s in nodes if height[s] <= k]
            level = canonical_partition(s for s in eligible if not any(s < t for t in eligible))
            if not levels or level != levels[-1]:
                levels.append(level)
        if levels[-1] != (grand,):
            levels.append((grand,))
        return validate_levels_structure(levels)

    def level(self, k: int | str = "top") -> list[tuple[str, frozenset]]:
        """Named blocks of one level; ``"top"`` is the level just below the grand coalition."""
        ls = self.levels_structure()
        if k == "top":
            k = max(ls.degree - 1, 0)
        elif k == "features":
            k = 0
        k = int(k)
        if not 0 <= k <= ls.degree:
            raise VocabularyError(f"level {k} outside 0..{ls.degree}")
        return [(self.block_name(b), b) for b in ls.levels[k]]

    def check_immediate(self, name: str) -> bool:
        """Constituents agree with the immediate players w.r.t. the level below ``name``."""
        ls = self.levels_structure()
        whole = self[name]
        k = next(k for k, level in enumerate(ls.levels) if whole in level)
        return frozenset(immediate_players(whole, ls.levels[k - 1])) == frozenset(
            s for _, s in self.constituents(name)
        )
