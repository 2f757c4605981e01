"""Decorations of a valid extended word for one extended Until occurrence.

The decoration splits the operator's targets (its ``tau`` positions) into
groups. Targets are taken in the order of their interval end ``e+``, or of
their own position when they have no interval, and numbered round-robin over
``shift + 1`` slots. A target that would overlap an interval already in its
slot, or close a cycle of ``c``-dependencies there, moves on to the next
group; when every group refuses it a new group is opened. A group's herds are
the herds of its targets.

Per group it adds labels (start, middle, end) on the positions of each
interval that carry the interval's value, and two colorings: ``c`` links
targets to their herds, ``a`` pins down interval starts. ``check_conditions``
evaluates the coloring (``Col``), interval (``Spec``) and marking (``Log``)
conditions of one group.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from collections.abc import Collection
from dataclasses import dataclass, field, replace
from enum import Enum

from dataltl_toolkit.services.formula import Path, UneqUntil
from dataltl_toolkit.services.herd_analysis import (
    HerdInputs,
    HerdReport,
    Mode,
    build_report,
    herd_inputs,
    shepherd_of,
)
from dataltl_toolkit.services.validity import ExtendedWord, check_valid_wrt, descendants
from dataltl_toolkit.utils.errors import FragmentError, ValidityError
from dataltl_toolkit.utils.splitmix import SplitMix64


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.decoration")


LOGGER = _build_logger()


class Label(str, Enum):
    START = "start"
    MID = "mid"
    END = "end"
    BOTH = "start-end"

    @property
    def starts(self) -> bool:
        return self in (Label.START, Label.BOTH)

    @property
    def ends(self) -> bool:
        return self in (Label.END, Label.BOTH)


class Color(str, Enum):
    A_RIGHT = "a->"
    A_LEFT = "a<-"
    C_RIGHT = "c->"
    C_LEFT = "c<-"


_GLYPH = {Label.START: "[", Label.MID: ".", Label.END: "]", Label.BOTH: "x"}
_BLOCK_PATTERN = re.compile(r"(?:\[\.*\]|x)+")


def _class_predecessor(inputs: HerdInputs, j: int, distance: int) -> int | None:
    for k in range(j - distance, 0, -1):
        if inputs.val(k) == inputs.val(j):
            return k
    return None


def _dependency(report: HerdReport, j: int, targets: Collection[int]) -> int | None:
    """Target whose ``c<-`` color decides the one of ``j`` inside ``targets``."""

    pred = _class_predecessor(report.inputs, j, report.shift)
    if pred is None:
        return None
    owner = report.shepherds.get(pred)
    return owner if owner in targets else None


@dataclass(slots=True)
class SDecoration:
    report: HerdReport
    group_of: dict[int, int]
    tau: dict[int, frozenset[int]]
    psi: dict[int, frozenset[int]]
    e_minus: dict[int, frozenset[int]]
    e_plus: dict[int, frozenset[int]]
    labels: dict[int, dict[int, Label]] = field(default_factory=dict)
    colors: dict[int, dict[int, frozenset[Color]]] = field(default_factory=dict)
    group_count: int = 0

    @property
    def shift(self) -> int:
        return self.report.shift

    @property
    def length(self) -> int:
        return self.report.inputs.length

    def groups(self) -> range:
        return range(max(self.shift + 1, self.group_count))

    def val(self, i: int):
        return self.report.inputs.val(i)

    def label(self, s: int, i: int) -> Label | None:
        return self.labels.get(s, {}).get(i)

    def has(self, s: int, i: int, color: Color) -> bool:
        return color in self.colors.get(s, {}).get(i, frozenset())

    def class_predecessor(self, j: int, distance: int = 1) -> int | None:
        """Largest ``k <= j - distance`` carrying the value of ``j``."""

        return _class_predecessor(self.report.inputs, j, distance)

    def with_psi_flipped(self, s: int, i: int) -> SDecoration:
        current = self.psi.get(s, frozenset())
        updated = current - {i} if i in current else current | {i}
        return replace(self, psi={**self.psi, s: frozenset(updated)})

    def with_color_flipped(self, s: int, i: int, color: Color) -> SDecoration:
        group = dict(self.colors.get(s, {}))
        current = group.get(i, frozenset())
        group[i] = current - {color} if color in current else current | {color}
        return replace(self, colors={**self.colors, s: group})

    def as_dict(self) -> dict:
        return {
            "shift": self.shift,
            "groups": {
                str(s): {
                    "tau": sorted(self.tau.get(s, ())),
                    "psi": sorted(self.psi.get(s, ())),
                    "e_minus": sorted(self.e_minus.get(s, ())),
                    "e_plus": sorted(self.e_plus.get(s, ())),
                    "labels": {str(i): label.value for i, label in sorted(self.labels.get(s, {}).items())},
                    "colors": {
                        str(i): sorted(color.value for color in found)
                        for i, found in sorted(self.colors.get(s, {}).items())
                        if found
                    },
                }
                for s in self.groups()
            },
        }


# --- Construction -------------------------------------------------------------------


def _overlaps(a: tuple[int, int] | None, b: tuple[int, int] | None) -> bool:
    return a is not None and b is not None and a[0] <= b[1] and b[0] <= a[1]


def _refuses(report: HerdReport, group: set[int], j: int) -> bool:
    bounds = report.interval(j)
    if any(_overlaps(bounds, report.interval(t)) for t in group):
        return True
    members = group | {j}
    seen = {j}
    x = _dependency(report, j, members)
    while x is not None:
        if x in seen:
            return x == j
        seen.add(x)
        x = _dependency(report, x, members)
    return False


def _assign_groups(report: HerdReport) -> tuple[dict[int, int], int]:
    span = report.shift + 1

    def key(j: int) -> tuple[int, int]:
        bounds = report.interval(j)
        return (bounds[1] if bounds else j, j)

    members: list[set[int]] = [set() for _ in range(span)]
    group_of: dict[int, int] = {}
    for index, j in enumerate(sorted(report.herds, key=key)):
        count = len(members)
        order = ((index % span + step) % count for step in range(count))
        slot = next((s for s in order if not _refuses(report, members[s], j)), None)
        if slot is None:
            slot = count
            members.append(set())
        members[slot].add(j)
        group_of[j] = slot
    if len(members) > span:
        LOGGER.debug({"event": "groups_opened", "groups": len(members), "shift": report.shift})
    return group_of, len(members)


def _label_group(report: HerdReport, targets: list[int]) -> dict[int, Label]:
    labels: dict[int, Label] = {}
    for j in targets:
        bounds = report.interval(j)
        if bounds is None:
            continue
        lo, hi = bounds
        value = report.inputs.val(hi)
        for k in range(lo + 1, hi):
            if report.inputs.val(k) == value:
                labels[k] = Label.MID
        labels[lo] = Label.BOTH if lo == hi else Label.START
        if lo != hi:
            labels[hi] = Label.END
    return labels


def _target_colors(report: HerdReport, targets: frozenset[int]) -> dict[int, bool]:
    """Whether each target gets ``c<-``, resolving dependencies before dependents."""

    left: dict[int, bool] = {}
    for j in sorted(targets):
        chain = []
        x = j
        while x is not None and x not in left and x not in chain:
            chain.append(x)
            x = _dependency(report, x, targets)
        for y in reversed(chain):
            owner = _dependency(report, y, targets)
            left[y] = owner is None or not left.get(owner, True)
    return left


def _color_group(dec: SDecoration, s: int) -> dict[int, frozenset[Color]]:
    colors: dict[int, set[Color]] = defaultdict(set)
    report = dec.report
    targets = dec.tau.get(s, frozenset())

    left = _target_colors(report, targets)
    for j, flag in left.items():
        if flag:
            colors[j].add(Color.C_LEFT)
    for i, j in report.shepherds.items():
        if j in targets and left[j]:
            colors[i].add(Color.C_RIGHT)

    previous = 0
    starts = sorted(k for k, label in dec.labels.get(s, {}).items() if label.starts)
    for index, k in enumerate(starts):
        pred = dec.class_predecessor(k)
        if index == 0 or pred is None or Color.A_RIGHT not in colors[pred]:
            colors[k].add(Color.A_LEFT)
            for p in range(max(pred or 0, previous) + 1, k):
                colors[p].add(Color.A_RIGHT)
        previous = k

    return {i: frozenset(found) for i, found in colors.items() if found}


def decorate(report: HerdReport) -> SDecoration:
    """Canonical decoration of a mark-relative herd report."""

    group_of, count = _assign_groups(report)
    tau: dict[int, set[int]] = defaultdict(set)
    psi: dict[int, set[int]] = defaultdict(set)
    e_minus: dict[int, set[int]] = defaultdict(set)
    e_plus: dict[int, set[int]] = defaultdict(set)
    for j, s in group_of.items():
        tau[s].add(j)
        psi[s].update(report.herds.get(j, ()))
        bounds = report.interval(j)
        if bounds is not None:
            e_minus[s].add(bounds[0])
            e_plus[s].add(bounds[1])

    def freeze(table: dict[int, set[int]]) -> dict[int, frozenset[int]]:
        return {s: frozenset(table.get(s, ())) for s in range(count)}

    dec = SDecoration(
        report, group_of, freeze(tau), freeze(psi), freeze(e_minus), freeze(e_plus), group_count=count
    )
    for s in dec.groups():
        dec.labels[s] = _label_group(report, sorted(dec.tau[s]))
    for s in dec.groups():
        dec.colors[s] = _color_group(dec, s)
    return dec


def build_s_decoration(ext: ExtendedWord, path: Path) -> SDecoration:
    """Decorate ``ext`` for the extended Until occurring at ``path``.

    The operator's marks in ``ext`` are taken as given; its subformulas must
    be validly marked.
    """

    psi = ext.node(path)
    if not isinstance(psi, UneqUntil):
        raise FragmentError("decorations exist only for extended Until occurrences", {"path": list(path)})
    broken = [sub for sub in descendants(ext.formula, path) if not check_valid_wrt(ext, sub)]
    if broken:
        raise ValidityError(
            "extended word is not valid for the operator's subformulas", {"paths": [list(p) for p in broken]}
        )
    report = build_report(herd_inputs(ext.base, psi), ext.marked(path), Mode.MARKS)
    dec = decorate(report)
    LOGGER.info({"event": "decoration_built", "groups": len(dec.groups()), "targets": len(dec.group_of)})
    return dec


# --- Conditions ----------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ConditionResult:
    name: str
    passed: bool
    position: int | None = None


@dataclass(slots=True)
class ConditionReport:
    group: int
    results: list[ConditionResult]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    def result(self, name: str) -> ConditionResult:
        return next(result for result in self.results if result.name == name)

    def first_failure(self) -> ConditionResult | None:
        return next((result for result in self.results if not result.passed), None)

    def as_dict(self) -> dict:
        return {
            "group": self.group,
            "passed": self.passed,
            "conditions": {r.name: {"passed": r.passed, "position": r.position} for r in self.results},
        }


class _GroupView:
    """Read access to one group of a decoration, in the vocabulary of the conditions."""

    def __init__(self, dec: SDecoration, s: int):
        self.dec = dec
        self.s = s
        self.n = dec.length
        self.delta = dec.shift
        self.inputs = dec.report.inputs
        self.rho_eq = self.inputs.rho_eq
        self.rho_neq = self.inputs.rho_neq
        self.tau_any = self.inputs.tau
        self.tau = dec.tau.get(s, frozenset())
        self.psi = dec.psi.get(s, frozenset())
        self.labels = dec.labels.get(s, {})

    def labeled(self, i: int) -> bool:
        return i in self.labels

    def color(self, i: int, color: Color) -> bool:
        return self.dec.has(self.s, i, color)

    def a_consistent(self, i: int, k: int) -> bool:
        return self.color(i, Color.A_RIGHT) == self.color(k, Color.A_LEFT)

    def c_consistent(self, i: int, j: int) -> bool:
        return self.color(i, Color.C_RIGHT) == self.color(j, Color.C_LEFT)

    def first_tau(self, start: int) -> int | None:
        """First ``tau`` position of any group at or after ``start``."""

        return next((j for j in range(max(start, 1), self.n + 1) if j in self.tau_any), None)

    def closing_end(self, k: int) -> int | None:
        """The end label closing the labeled block that contains ``k``."""

        return next((m for m in range(k, self.n + 1) if m in self.labels and self.labels[m].ends), None)

    def last_start(self, k: int, strict: bool = False) -> int | None:
        limit = k - 1 if strict else k
        return max((p for p, label in self.labels.items() if p <= limit and label.starts), default=None)


def _first(name: str, failures) -> ConditionResult:
    bad = next(iter(failures), None)
    return ConditionResult(name, bad is None, bad)


def _col1(g: _GroupView) -> ConditionResult:
    def failures():
        for j in sorted(g.tau):
            pred = g.dec.class_predecessor(j, g.delta)
            pred_right = pred is not None and g.color(pred, Color.C_RIGHT)
            if pred_right == g.color(j, Color.C_LEFT):
                yield j

    return _first("Col1", failures())


def _col2(g: _GroupView) -> ConditionResult:
    def failures():
        for j in sorted(g.labels):
            if not g.labels[j].starts:
                continue
            pred = g.dec.class_predecessor(j)
            pred_right = pred is not None and g.color(pred, Color.A_RIGHT)
            if pred_right == g.color(j, Color.A_LEFT):
                yield j

    return _first("Col2", failures())


def _spec1(g: _GroupView) -> ConditionResult:
    open_at = None
    for i in sorted(g.labels):
        label = g.labels[i]
        if open_at is None:
            if label is Label.START:
                open_at = i
            elif label is not Label.BOTH:
                return ConditionResult("Spec1", False, i)
        elif label is Label.END:
            open_at = None
        elif label is not Label.MID:
            return ConditionResult("Spec1", False, i)
    if open_at is not None:
        return ConditionResult("Spec1", False, open_at)
    return ConditionResult("Spec1", True)


def _spec2(g: _GroupView) -> ConditionResult:
    def failures():
        by_value: dict = defaultdict(list)
        for i in range(1, g.n + 1):
            by_value[g.dec.val(i)].append(i)
        bad = []
        for members in by_value.values():
            block: list[int] = []
            for i in [*members, None]:
                if i is not None and g.labeled(i):
                    block.append(i)
                    continue
                if block and not _BLOCK_PATTERN.fullmatch("".join(_GLYPH[g.labels[k]] for k in block)):
                    bad.append(block[0])
                block = []
        yield from sorted(bad)

    return _first("Spec2", failures())


def _closes(g: _GroupView, k: int, t: int) -> bool:
    """Whether ``k`` is where an interval for target ``t`` ends."""

    val = g.dec.val
    if val(k) == val(t):
        return False
    if not (k in g.tau_any or (k in g.rho_eq and k not in g.rho_neq)):
        return False
    if not all(m in g.rho_neq and (m not in g.tau_any or val(m) == val(t)) for m in range(k + 1, t)):
        return False
    herd = [i for i in g.psi if shepherd_of(g.inputs, i) == t]
    if herd:
        return any(i <= k - g.delta for i in herd)
    return k >= t - g.delta


def _closed_target(g: _GroupView, k: int) -> int | None:
    return next((t for t in sorted(g.tau) if t > k and _closes(g, k, t)), None)


def _spec3(g: _GroupView) -> ConditionResult:
    return _first(
        "Spec3",
        (
            k
            for k in range(1, g.n + 1)
            if (g.labeled(k) and g.labels[k].ends) != (_closed_target(g, k) is not None)
        ),
    )


def _spec4_holds(g: _GroupView, k: int) -> bool:
    m = g.closing_end(k)
    block_start = g.last_start(k)
    if m is None or block_start is None:
        return False
    t = _closed_target(g, m)
    if t is None:
        return False

    def in_block(p: int) -> bool:
        return block_start <= p <= m and g.labeled(p)

    def reaches(x: int) -> bool:
        return all(
            p in g.rho_eq and (in_block(p) or (p in g.rho_neq and p not in g.tau_any))
            for p in range(x + g.delta, t)
        )

    if not reaches(k):
        return False
    if any(g.dec.val(x) == g.dec.val(k) and reaches(x) for x in range(1, k)):
        return False
    floor = max(g.dec.class_predecessor(k) or 0, g.last_start(k, strict=True) or 0)
    return all(g.a_consistent(p, k) for p in range(floor + 1, k))


def _spec4(g: _GroupView) -> ConditionResult:
    return _first(
        "Spec4",
        (k for k in sorted(g.labels) if g.labels[k].starts != _spec4_holds(g, k)),
    )


def _log1(g: _GroupView) -> ConditionResult:
    def failures():
        for i in range(1, g.n + 1):
            if g.labeled(i):
                continue
            j = g.first_tau(i + g.delta)
            holds = (
                j is not None
                and j in g.tau
                and all(k in g.rho_neq for k in range(i + g.delta, j))
                and g.c_consistent(i, j)
            )
            if holds != (i in g.psi):
                yield i

    return _first("Log1", failures())


def _log2(g: _GroupView) -> ConditionResult:
    def failures():
        for i in sorted(g.labels):
            l = g.closing_end(i)
            j = None if l is None else g.first_tau(max(i + g.delta, l + 1))
            holds = (
                j is not None
                and j in g.tau
                and all(
                    k in g.rho_neq or (g.labeled(k) and k in g.rho_eq) for k in range(i + g.delta, l + 1)
                )
                and all(k in g.rho_neq for k in range(max(l + 1, i + g.delta), j))
                and g.c_consistent(i, j)
            )
            if holds != (i in g.psi):
                yield i

    return _first("Log2", failures())


_CONDITIONS = (_col1, _col2, _spec1, _spec2, _spec3, _spec4, _log1, _log2)


def check_conditions(dec: SDecoration, s: int) -> ConditionReport:
    if s not in dec.groups():
        raise ValidityError(f"group {s} outside [0, {len(dec.groups()) - 1}]", {"group": s})
    view = _GroupView(dec, s)
    report = ConditionReport(s, [condition(view) for condition in _CONDITIONS])
    if not report.passed:
        failure = report.first_failure()
        LOGGER.debug(
            {"event": "condition_failed", "group": s, "condition": failure.name, "position": failure.position}
        )
    return report


def check_all_groups(dec: SDecoration) -> list[ConditionReport]:
    return [check_conditions(dec, s) for s in dec.groups()]


# --- Completeness ---------------------------------------------------------------------


def marked_by_characterization(dec: SDecoration, s: int) -> frozenset[int]:
    """Positions whose shepherd lies in group ``s`` and whose intermediates make the operator hold."""

    inputs = dec.report.inputs
    tau = dec.tau.get(s, frozenset())
    found = set()
    for i in range(1, dec.length + 1):
        j = shepherd_of(inputs, i)
        if j is None or j not in tau:
            continue
        if all(
            k in inputs.rho_neq or (dec.val(k) == dec.val(i) and k in inputs.rho_eq)
            for k in range(i + dec.shift, j)
        ):
            found.add(i)
    return frozenset(found)


def conditions_imply_truth(dec: SDecoration) -> bool:
    """Whether every group's operator marks coincide with the characterization."""

    return all(dec.psi.get(s, frozenset()) == marked_by_characterization(dec, s) for s in dec.groups())


@dataclass(slots=True)
class FalsificationReport:
    trials: int
    passing_mutations: list[tuple[int, int]]

    @property
    def found(self) -> bool:
        return bool(self.passing_mutations)

    def as_dict(self) -> dict:
        return {"trials": self.trials, "passing_mutations": [list(m) for m in self.passing_mutations]}


def falsification_search(dec: SDecoration, trials: int, seed: int = 0) -> FalsificationReport:
    """Flip single operator marks at random and keep the flips every condition still accepts.

    A kept flip is a decoration whose marks disagree with the characterization
    while passing all conditions of its group.
    """

    if dec.length == 0:
        return FalsificationReport(0, [])
    rng = SplitMix64(seed)
    groups = len(dec.groups())
    kept = []
    for _ in range(trials):
        s = rng.below(groups)
        i = rng.below(dec.length) + 1
        mutated = dec.with_psi_flipped(s, i)
        if check_conditions(mutated, s).passed:
            kept.append((s, i))
    if kept:
        LOGGER.warning({"event": "falsification_found", "count": len(kept), "first": kept[0]})
    return FalsificationReport(trials, kept)
