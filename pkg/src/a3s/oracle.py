"""Oracle interfaces and the budgeted query session.

Every pairwise question funnels through OracleSession.answer, which consults
the constraint closure first (known pairs cost nothing), enforces the query
budget, and feeds each fresh answer back into the closure.
"""

from __future__ import annotations

from typing import Callable, Protocol

import numpy as np

from .constraints import ConstraintStore, Relation


class BudgetExceededError(RuntimeError):
    """Raised when a fresh oracle query would exceed the session budget."""


class Oracle(Protocol):
    def answer(self, s: int, t: int, context: str = "") -> Relation: ...


class SimulatedOracle:
    """Truthful oracle backed by ground-truth labels."""

    def __init__(self, labels: np.ndarray):
        if labels is None:
            raise ValueError("simulated oracle requires ground-truth labels")
        self.labels = np.asarray(labels)

    def answer(self, s: int, t: int, context: str = "") -> Relation:
        return Relation.MUST if self.labels[s] == self.labels[t] else Relation.CANNOT


class ReplayOracle:
    """Feeds recorded answers back in order, then defers to a fallback.

    Used for session resume: the engine re-asks the same pairs in the same
    order (it is deterministic), so any divergence means the log is corrupt.
    """

    def __init__(self, records: list[tuple[int, int, Relation]],
                 fallback: Oracle | None = None):
        self.records = list(records)
        self.pos = 0
        self.fallback = fallback

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.records)

    def answer(self, s: int, t: int, context: str = "") -> Relation:
        if self.pos < len(self.records):
            rs, rt, rel = self.records[self.pos]
            if {rs, rt} != {s, t}:
                raise RuntimeError(
                    f"replay mismatch at record {self.pos}: log has ({rs}, {rt}), "
                    f"engine asked ({s}, {t})")
            self.pos += 1
            return rel
        if self.fallback is None:
            raise RuntimeError("replay log exhausted and no live oracle attached")
        return self.fallback.answer(s, t, context=context)


AnswerListener = Callable[[int, int, Relation, list, str], None]


class OracleSession:
    """Budgeted, closure-aware front end to an oracle.

    A pair whose state is already derivable is answered from the store and
    never billed; a fresh pair costs one unit and its answer (plus all
    inferred pairs) lands in the closure before control returns.
    """

    def __init__(self, oracle: Oracle, constraints: ConstraintStore, budget: int,
                 listener: AnswerListener | None = None):
        if budget < 0:
            raise ValueError("budget must be non-negative")
        self.oracle = oracle
        self.constraints = constraints
        self.budget = budget
        self.used = 0
        self.listener = listener

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def extend(self, extra: int) -> None:
        self.budget += extra

    def answer(self, s: int, t: int, context: str = "") -> Relation:
        known = self.constraints.query_state(s, t)
        if known != Relation.UNKNOWN:
            return known
        if self.used >= self.budget:
            raise BudgetExceededError(f"budget of {self.budget} queries exhausted")
        rel = self.oracle.answer(s, t, context=context)
        self.used += 1
        inferred = self.constraints.add_constraint(s, t, rel)
        if self.listener is not None:
            self.listener(s, t, rel, inferred, context)
        return rel
