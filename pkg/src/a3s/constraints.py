"""Symmetric ternary constraint state with incremental transitive closure.

Must-link is an equivalence relation over the queried samples; cannot-link
propagates across must-link classes. Every update applies the full closure
delta immediately, so the store always equals its own transitive closure and
lookups never miss a derivable fact.
"""

from __future__ import annotations

from enum import IntEnum


class Relation(IntEnum):
    CANNOT = -1
    UNKNOWN = 0
    MUST = 1


class ContradictionError(ValueError):
    """A new constraint conflicts with the stored (or inferred) state.

    The protocol assumes a consistent oracle, so this signals operator error
    in the interactive setting; the offending update is not applied.
    """

    def __init__(self, s: int, t: int, existing: Relation, attempted: Relation):
        self.pair = (min(s, t), max(s, t))
        self.existing = existing
        self.attempted = attempted
        super().__init__(
            f"pair {self.pair} is already {existing.name}; "
            f"cannot set it to {attempted.name}"
        )


class ConstraintStore:
    """Sparse closed constraint state over sample ids."""

    def __init__(self):
        self.state: dict[tuple[int, int], Relation] = {}
        self.ml: dict[int, set[int]] = {}
        self.cl: dict[int, set[int]] = {}

    @staticmethod
    def _canon(s: int, t: int) -> tuple[int, int]:
        return (s, t) if s < t else (t, s)

    def query_state(self, s: int, t: int) -> Relation:
        if s == t:
            return Relation.MUST
        return self.state.get(self._canon(s, t), Relation.UNKNOWN)

    def _set(self, s: int, t: int, value: Relation,
             changed: list[tuple[int, int, Relation]]) -> None:
        if s == t:
            if value == Relation.CANNOT:
                raise ContradictionError(s, t, Relation.MUST, value)
            return  # self must-links are implicit, never stored
        key = self._canon(s, t)
        existing = self.state.get(key)
        if existing is not None:
            if existing != value:
                raise ContradictionError(s, t, existing, value)
            return
        self.state[key] = value
        adj = self.ml if value == Relation.MUST else self.cl
        adj.setdefault(key[0], set()).add(key[1])
        adj.setdefault(key[1], set()).add(key[0])
        changed.append((key[0], key[1], value))

    def add_constraint(self, s: int, t: int, value: Relation) -> list[tuple[int, int, Relation]]:
        """Store (s, t) and apply the transitive-closure delta.

        Returns the inferred pairs (excluding the explicit one), sorted for
        deterministic logging. Raises ContradictionError without mutating
        anything when the explicit pair conflicts; because the store is always
        closed, a consistent explicit pair can never produce a conflicting
        inference.
        """
        if s == t:
            raise ValueError(f"cannot constrain the self pair ({s}, {t})")
        if value not in (Relation.MUST, Relation.CANNOT):
            raise ValueError("constraint value must be MUST or CANNOT")
        existing = self.query_state(s, t)
        if existing != Relation.UNKNOWN and existing != value:
            raise ContradictionError(s, t, existing, value)
        if existing == value:
            return []  # already closed over this fact

        group_s = self.ml.get(s, set()) | {s}
        group_t = self.ml.get(t, set()) | {t}
        foes_s = self.cl.get(s, set())
        foes_t = self.cl.get(t, set())

        changed: list[tuple[int, int, Relation]] = []
        explicit = self._canon(s, t)
        if value == Relation.MUST:
            for p in group_s:
                for q in group_t:
                    self._set(p, q, Relation.MUST, changed)
            for p in group_s:
                for q in foes_t:
                    self._set(p, q, Relation.CANNOT, changed)
            for p in group_t:
                for q in foes_s:
                    self._set(p, q, Relation.CANNOT, changed)
        else:
            for p in group_s:
                for q in group_t:
                    self._set(p, q, Relation.CANNOT, changed)
        inferred = [(a, b, r) for a, b, r in changed if (a, b) != explicit]
        inferred.sort(key=lambda rec: (rec[0], rec[1]))
        return inferred

    def cluster_relation(self, members_a, members_b) -> Relation:
        """Aggregate relation across two clusters' cross pairs.

        MUST if any cross pair is must-linked, else CANNOT if any cross pair
        is cannot-linked, else UNKNOWN. Closure consistency guarantees MUST
        and CANNOT never co-occur for internally must-linked clusters.
        """
        set_b = set(int(x) for x in members_b)
        found_cannot = False
        for a in members_a:
            a = int(a)
            partners = self.ml.get(a)
            if partners and not partners.isdisjoint(set_b):
                return Relation.MUST
            if not found_cannot:
                foes = self.cl.get(a)
                if foes and not foes.isdisjoint(set_b):
                    found_cannot = True
        return Relation.CANNOT if found_cannot else Relation.UNKNOWN

    def items(self):
        return self.state.items()

    def __len__(self) -> int:
        return len(self.state)

    def copy(self) -> "ConstraintStore":
        dup = ConstraintStore()
        dup.state = dict(self.state)
        dup.ml = {k: set(v) for k, v in self.ml.items()}
        dup.cl = {k: set(v) for k, v in self.cl.items()}
        return dup

    # -- persistence ------------------------------------------------------

    def to_lines(self) -> list[str]:
        """Stable text form: one `s t REL` line per stored pair."""
        return [f"{s} {t} {'ML' if r == Relation.MUST else 'CL'}"
                for (s, t), r in sorted(self.state.items())]

    @classmethod
    def from_lines(cls, lines) -> "ConstraintStore":
        store = cls()
        for line in lines:
            parts = line.split()
            if not parts:
                continue
            s, t, tag = int(parts[0]), int(parts[1]), parts[2]
            rel = Relation.MUST if tag == "ML" else Relation.CANNOT
            if store.query_state(s, t) == Relation.UNKNOWN:
                store.add_constraint(s, t, rel)
        return store
