"""Imperfect-recall abstractions that can only be refined.

An :class:`AbstractionMapping` partitions a game's original information
sets into abstract sets.  Members of one abstract set share the owner, the
action count and the length of the owner's action history, and the k-th
action of every member maps to the k-th abstract action.

Abstract set ids are fresh integers that are never reused.  Every abstract
set owns a block of abstract action slots, allocated when the set is
created, so solver tables indexed by abstract slot only ever grow (see
:meth:`AbstractionMapping.grow`).
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from .game import Game, check_perfect_recall


class AbstractionError(ValueError):
    pass


class AbstractionMapping:
    def __init__(self, game: Game, groups: Iterable[Sequence[int]]):
        self.game = game
        self.version = 1
        self.phi = np.full(game.n_infosets, -1, dtype=np.int64)
        self.members: dict[int, np.ndarray] = {}
        self.owner: list[int] = []
        self.n_actions: list[int] = []
        self.seq_len: list[int] = []
        self.offset: list[int] = []
        self.n_slots = 0
        for g in groups:
            self._new_set(np.asarray(sorted(g), dtype=np.int64))
        if np.any(self.phi < 0):
            raise AbstractionError("groups do not cover every information set")
        self._slot_map = None

    # ----------------------------------------------------------- internals
    def _new_set(self, mem: np.ndarray) -> int:
        g = self.game
        if len(mem) == 0:
            raise AbstractionError("empty abstract set")
        first = int(mem[0])
        key = (g.iset_player[first], g.iset_n_actions[first], g.iset_seq_len[first])
        for m in mem:
            if (g.iset_player[m], g.iset_n_actions[m], g.iset_seq_len[m]) != key:
                raise AbstractionError(
                    f"information sets {first} and {int(m)} differ in owner, action count or history length")
        aid = len(self.owner)
        self.owner.append(int(key[0]))
        self.n_actions.append(int(key[1]))
        self.seq_len.append(int(key[2]))
        self.offset.append(self.n_slots)
        self.n_slots += int(key[1])
        self.members[aid] = mem
        self.phi[mem] = aid
        self._slot_map = None
        return aid

    # ------------------------------------------------------------- queries
    @property
    def slot_map(self) -> np.ndarray:
        """Abstract slot of every original action slot (the action map)."""
        if self._slot_map is None:
            g = self.game
            off = np.asarray(self.offset, dtype=np.int64)
            self._slot_map = off[self.phi[g.slot_infoset]] + g.slot_position
        return self._slot_map

    def ids(self) -> list[int]:
        return sorted(self.members)

    def is_abstracted(self, aid: int) -> bool:
        return len(self.members[aid]) > 1

    def abstracted_ids(self, player: int | None = None) -> list[int]:
        return [a for a in self.ids() if len(self.members[a]) > 1
                and (player is None or self.owner[a] == player)]

    def abstracted_originals(self, player: int | None = None) -> np.ndarray:
        ids = self.abstracted_ids(player)
        if not ids:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate([self.members[a] for a in ids]))

    @property
    def n_sets(self) -> int:
        return len(self.members)

    def slots(self, aid: int) -> slice:
        return slice(self.offset[aid], self.offset[aid] + self.n_actions[aid])

    def xi(self, slot: int) -> int:
        return int(self.slot_map[slot])

    def xi_inverse(self, abs_slot: int) -> list[int]:
        return [int(s) for s in np.nonzero(self.slot_map == abs_slot)[0]]

    def live_slots(self) -> np.ndarray:
        return np.concatenate([np.arange(self.offset[a], self.offset[a] + self.n_actions[a])
                               for a in self.ids()]) if self.members else np.zeros(0, np.int64)

    def set_of_slot(self) -> np.ndarray:
        """Abstract id owning each allocated slot (dead sets included)."""
        return np.repeat(np.arange(len(self.owner)), self.n_actions)

    def grow(self, arr: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Extend a per-abstract-slot table to the current allocation."""
        if len(arr) >= self.n_slots:
            return arr
        return np.concatenate([arr, np.full(self.n_slots - len(arr), fill)])

    # ------------------------------------------------------------- splits
    def split(self, aid: int, blocks: Sequence[Sequence[int]]) -> list[int]:
        """Replace abstract set ``aid`` by one new set per block; returns the new ids.

        A single block covering every member is a no-op and returns ``[aid]``.
        """
        if aid not in self.members:
            raise AbstractionError(f"abstract set {aid} does not exist")
        cur = set(int(m) for m in self.members[aid])
        blocks = [sorted(int(m) for m in b) for b in blocks]
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise AbstractionError("empty block in partition")
            if seen.intersection(b):
                raise AbstractionError("blocks overlap")
            seen.update(b)
        if seen != cur:
            raise AbstractionError(f"blocks do not partition the members of abstract set {aid}")
        if len(blocks) == 1:
            return [aid]
        del self.members[aid]
        new = [self._new_set(np.asarray(b, dtype=np.int64)) for b in blocks]
        self.version += 1
        return new

    # --------------------------------------------------------- translation
    def to_original(self, abs_probs: np.ndarray) -> np.ndarray:
        return np.asarray(abs_probs)[self.slot_map]

    def to_abstract(self, orig_probs: np.ndarray, players: Sequence[int] = (0, 1),
                    tol: float = 1e-12) -> np.ndarray:
        """Abstract slot vector from an original one; members of a set must agree."""
        out = np.zeros(self.n_slots)
        conflicts = []
        g = self.game
        for aid in self.ids():
            if self.owner[aid] not in players:
                continue
            mem = self.members[aid]
            rows = np.stack([orig_probs[g.slots(int(m))] for m in mem])
            if np.any(np.abs(rows - rows[0]) > tol):
                conflicts.append(aid)
            out[self.slots(aid)] = rows[0]
        if conflicts:
            raise AbstractionError(f"members disagree in abstract sets {conflicts}")
        return out

    def lowest_action_strategy(self) -> np.ndarray:
        out = np.zeros(self.n_slots)
        out[np.asarray(self.offset)[self.ids()]] = 1.0
        return out

    def uniform_strategy(self) -> np.ndarray:
        n = np.asarray(self.n_actions, dtype=float)
        return 1.0 / n[self.set_of_slot()]

    # ------------------------------------------------------------ storage
    def class_key(self, aid: int) -> tuple[int, int, int]:
        return (self.owner[aid], self.seq_len[aid], self.n_actions[aid])

    def store(self) -> dict:
        """Compact mapping representation.

        Abstracted sets are grouped by (owner, history length, action
        count).  In each group the largest set is addressed by that key
        alone; every member of the other sets carries an explicit integer
        tag.  Unabstracted sets need nothing.
        """
        by_class: dict[tuple, list[int]] = defaultdict(list)
        for aid in self.abstracted_ids():
            by_class[self.class_key(aid)].append(aid)
        out = {}
        for key, aids in sorted(by_class.items()):
            implicit = max(aids, key=lambda a: (len(self.members[a]), -a))
            out[key] = {
                "implicit": implicit,
                "tagged": {a: [int(m) for m in self.members[a]] for a in aids if a != implicit},
            }
        return out

    def word_count(self) -> int:
        return sum(len(m) for c in self.store().values() for m in c["tagged"].values())

    # -------------------------------------------------------------- debug
    def check(self) -> None:
        seen = np.zeros(self.game.n_infosets, dtype=np.int64)
        for aid, mem in self.members.items():
            seen[mem] += 1
            if np.any(self.phi[mem] != aid):
                raise AbstractionError(f"phi disagrees with members of {aid}")
        if np.any(seen != 1):
            raise AbstractionError("members do not partition the original information sets")

    def is_perfect_recall(self) -> tuple[bool, list[int]]:
        return check_perfect_recall(self.game, self.phi)

    def dump(self) -> str:
        g = self.game
        lines = []
        for aid in self.ids():
            mem = " ".join(str(int(m)) for m in self.members[aid])
            lines.append(f"{aid} p{self.owner[aid] + 1} seq={self.seq_len[aid]} "
                         f"actions={self.n_actions[aid]}: {mem}")
        lines.append(f"# {self.n_sets} abstract sets over {g.n_infosets} originals, version {self.version}")
        return "\n".join(lines)


def init_abstraction(game: Game) -> AbstractionMapping:
    """Merge every player's sets that share history length and action count."""
    groups: dict[tuple, list[int]] = {}
    for k in range(game.n_infosets):
        key = (int(game.iset_player[k]), int(game.iset_seq_len[k]), int(game.iset_n_actions[k]))
        groups.setdefault(key, []).append(k)
    return AbstractionMapping(game, groups.values())


def identity_abstraction(game: Game) -> AbstractionMapping:
    return AbstractionMapping(game, ([k] for k in range(game.n_infosets)))


def mapping_word_count(mapping: AbstractionMapping) -> int:
    return mapping.word_count()
