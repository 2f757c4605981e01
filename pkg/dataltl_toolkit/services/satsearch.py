"""Bounded satisfiability by exhaustive enumeration.

Words are enumerated by length, then proposition labels, then attribute
presence, then values. Values are drawn as restricted-growth sequences over
the present attribute slots: the first occurrence of a new value always gets
the smallest unused token. Evaluation is invariant under renaming values, so
this covers every word up to value isomorphism.

The work for one length is split by the label of the first position; with
more than one thread the partitions run in worker processes and are merged
back in enumeration order, so the reported model never depends on scheduling.
Each worker starts with the budget left when its length began; the merge
charges every partition only what the partitions before it left over, so both
modes explore the same number of words before giving up.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from dataltl_toolkit.config import DataLTLConfig, get_config
from dataltl_toolkit.services.formula import And, Formula, attributes, propositions
from dataltl_toolkit.services.semantics import Evaluator
from dataltl_toolkit.services.words import AttributedWord, Position
from dataltl_toolkit.utils.errors import SearchBudgetExceeded, WordFormatError


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.satsearch")


LOGGER = _build_logger()


class Outcome(str, Enum):
    SAT = "sat"
    BOUNDED_UNSAT = "bounded-unsat"
    BUDGET_EXCEEDED = "budget-exceeded"


@dataclass(frozen=True, slots=True)
class SearchBounds:
    """``max_values=None`` lets every value slot take a fresh value."""

    max_len: int
    props: tuple[str, ...] = ()
    attrs: tuple[str, ...] = ()
    max_values: int | None = None
    complete_for: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.max_len < 1:
            raise WordFormatError("max_len must be positive", {"max_len": self.max_len})
        if self.max_values is not None and self.max_values < 1:
            raise WordFormatError("max_values must be positive", {"max_values": self.max_values})
        if self.complete_for is not None and not set(self.complete_for) <= set(self.attrs):
            raise WordFormatError("completeness attributes must be declared", {"complete_for": self.complete_for})

    def as_dict(self) -> dict:
        return {
            "max_len": self.max_len,
            "props": list(self.props),
            "attrs": list(self.attrs),
            "max_values": self.max_values,
            "complete_for": None if self.complete_for is None else list(self.complete_for),
        }


@dataclass(slots=True)
class SearchResult:
    outcome: Outcome
    bounds: SearchBounds
    model: AttributedWord | None = None
    explored: int = 0

    @property
    def sat(self) -> bool:
        return self.outcome is Outcome.SAT


# --- Enumeration -----------------------------------------------------------------


def _subsets(items: Sequence[str]) -> list[frozenset[str]]:
    return [
        frozenset(combo) for size in range(len(items) + 1) for combo in itertools.combinations(items, size)
    ]


def restricted_growth(slots: int, cap: int | None = None) -> Iterator[tuple[int, ...]]:
    """All sequences ``s`` of length ``slots`` with ``s[k] <= max(s[:k]) + 1`` and values below ``cap``."""

    limit = slots if cap is None else cap

    def extend(prefix: list[int], used: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == slots:
            yield tuple(prefix)
            return
        for value in range(min(used + 1, limit)):
            prefix.append(value)
            yield from extend(prefix, max(used, value + 1))
            prefix.pop()

    yield from extend([], 0)


def _value_assignments(slots: int, cap: int | None, canonical: bool) -> Iterator[tuple[int, ...]]:
    if canonical:
        return restricted_growth(slots, cap)
    limit = slots if cap is None else cap
    return itertools.product(range(limit), repeat=slots)


def _presence_choices(bounds: SearchBounds) -> list[tuple[str, ...]]:
    if bounds.complete_for is not None:
        return [tuple(a for a in bounds.attrs if a in bounds.complete_for)]
    return [tuple(a for a in bounds.attrs if a in subset) for subset in _subsets(bounds.attrs)]


def _partition_words(
    bounds: SearchBounds, length: int, first_label: frozenset[str], canonical: bool
) -> Iterator[AttributedWord]:
    labels = _subsets(bounds.props)
    presences = _presence_choices(bounds)
    alphabet = frozenset(bounds.props)
    for rest in itertools.product(labels, repeat=length - 1):
        row_labels = (first_label, *rest)
        for present in itertools.product(presences, repeat=length):
            slots = sum(len(p) for p in present)
            for values in _value_assignments(slots, bounds.max_values, canonical):
                feed = iter(values)
                positions = tuple(
                    Position(label, tuple(sorted((name, next(feed)) for name in names)))
                    for label, names in zip(row_labels, present)
                )
                yield AttributedWord(positions, alphabet, bounds.attrs)


def enumerate_words(
    bounds: SearchBounds, length: int | None = None, canonical: bool = True
) -> Iterator[AttributedWord]:
    """Every word within ``bounds`` (of one ``length`` if given), in search order."""

    lengths = [length] if length is not None else range(1, bounds.max_len + 1)
    for size in lengths:
        for first in _subsets(bounds.props):
            yield from _partition_words(bounds, size, first, canonical)


# --- Search ------------------------------------------------------------------------


def _search_partition(
    phi: Formula, bounds: SearchBounds, length: int, first_label: frozenset[str], canonical: bool, budget: int
) -> tuple[AttributedWord | None, int, bool]:
    """``(model, explored, exhausted_budget)`` for one partition."""

    explored = 0
    for word in _partition_words(bounds, length, first_label, canonical):
        if explored >= budget:
            return None, explored, True
        explored += 1
        if Evaluator(word).position(phi)[0]:
            return word, explored, False
    return None, explored, False


def find_model(
    phi: Formula,
    bounds: SearchBounds,
    config: DataLTLConfig | None = None,
    canonical: bool = True,
    threads: int | None = None,
) -> SearchResult:
    """First word (in enumeration order) satisfying ``phi`` at its first position.

    Raises ``SearchBudgetExceeded`` when the configured node budget runs out
    before a verdict.
    """

    config = config or get_config()
    unknown = propositions(phi) - set(bounds.props)
    if unknown:
        bounds = SearchBounds(
            bounds.max_len, (*bounds.props, *sorted(unknown)), bounds.attrs, bounds.max_values, bounds.complete_for
        )
    missing_attrs = attributes(phi) - set(bounds.attrs)
    if missing_attrs:
        LOGGER.debug({"event": "satsearch_attrs_not_enumerated", "attrs": sorted(missing_attrs)})

    workers = threads or config.threads
    budget = config.search_budget
    explored = 0
    firsts = _subsets(bounds.props)

    for length in range(1, bounds.max_len + 1):
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_search_partition, phi, bounds, length, first, canonical, budget - explored)
                    for first in firsts
                ]
                partials = [future.result() for future in futures]
        else:
            partials = []
            for first in firsts:
                partial = _search_partition(phi, bounds, length, first, canonical, budget - explored)
                partials.append(partial)
                if partial[0] is not None or partial[2]:
                    break

        for model, count, exhausted in partials:
            # a partition only gets what the ones before it left over
            remaining = budget - explored
            if count > remaining:
                model, count, exhausted = None, remaining, True
            explored += count
            if exhausted:
                LOGGER.warning({"event": "satsearch_budget_exceeded", "budget": budget, "length": length})
                raise SearchBudgetExceeded(budget, explored)
            if model is not None:
                LOGGER.info({"event": "satsearch_finished", "outcome": "sat", "length": length, "nodes": explored})
                return SearchResult(Outcome.SAT, bounds, model, explored)
        LOGGER.debug({"event": "satsearch_length_done", "length": length, "nodes": explored})

    LOGGER.info({"event": "satsearch_finished", "outcome": "bounded-unsat", "nodes": explored})
    return SearchResult(Outcome.BOUNDED_UNSAT, bounds, None, explored)


def search(phi: Formula, bounds: SearchBounds, config: DataLTLConfig | None = None, **kwargs) -> SearchResult:
    """``find_model`` that reports an exhausted budget as an outcome instead of raising."""

    try:
        return find_model(phi, bounds, config=config, **kwargs)
    except SearchBudgetExceeded as exc:
        return SearchResult(Outcome.BUDGET_EXCEEDED, bounds, None, exc.explored)


# --- Equisatisfiability of the attribute encoding ------------------------------------


@dataclass(slots=True)
class EquisatReport:
    source: SearchResult
    encoded: SearchResult
    encoded_bounds: SearchBounds
    extra: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        if Outcome.BUDGET_EXCEEDED in (self.source.outcome, self.encoded.outcome):
            return False
        return self.source.outcome is self.encoded.outcome

    @property
    def outcome(self) -> str:
        if Outcome.BUDGET_EXCEEDED in (self.source.outcome, self.encoded.outcome):
            return Outcome.BUDGET_EXCEEDED.value
        return "agree" if self.agree else "disagree"


def check_equisat(
    chi: Formula, bounds: SearchBounds, config: DataLTLConfig | None = None, threads: int | None = None
) -> EquisatReport:
    """Search ``chi`` and its one-attribute translation side by side.

    The encoded search runs over words ``m`` times longer, where ``m`` is the
    number of attributes, complete for the single target attribute and with
    free values (padding needs fresh ones).
    """

    from dataltl_toolkit.services.encoder import EncodingScheme, structure_formula, translate

    config = config or get_config()
    scheme = EncodingScheme(tuple(bounds.attrs), tuple(bounds.props))
    encoded_phi = And(structure_formula(scheme), translate(chi, scheme))
    encoded_bounds = SearchBounds(
        max_len=bounds.max_len * scheme.width,
        props=(*bounds.props, *scheme.markers, scheme.present),
        attrs=(scheme.target,),
        max_values=None,
        complete_for=(scheme.target,),
    )
    source = search(chi, bounds, config=config, threads=threads)
    encoded = search(encoded_phi, encoded_bounds, config=config, threads=threads)
    report = EquisatReport(source, encoded, encoded_bounds)
    LOGGER.info({"event": "equisat_checked", "outcome": report.outcome, "source": source.outcome.value})
    return report
