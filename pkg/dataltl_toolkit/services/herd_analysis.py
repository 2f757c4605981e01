"""Shepherds, herds and special positions of one extended Until on one word.

Only the operator's intermediate and target position formulas are
evaluated; the positions where the operator itself holds come either from the
evaluator (``truth`` mode) or from given marks (``marks`` mode). Words must
carry the frozen attribute at every position.

An intermediate ``rho | (@a & rho_eq) | (!=@a & rho_neq)`` is analysed as
``(@a & rho_eq') | (!=@a & rho_neq')`` with ``rho_neq' = rho | rho_neq`` and
``rho_eq' = rho | rho_eq | rho_neq``, which keeps ``rho_neq'`` inside
``rho_eq'``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

from dataltl_toolkit.services.formula import Formula, UneqUntil
from dataltl_toolkit.services.fragments import extended_shape
from dataltl_toolkit.services.semantics import Evaluator
from dataltl_toolkit.services.words import AttributedWord, DataValue
from dataltl_toolkit.utils.errors import FragmentError, ValidityError, WordFormatError


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.herd_analysis")


LOGGER = _build_logger()


class Mode(str, Enum):
    TRUTH = "truth"
    MARKS = "marks"


class SpecialKind(str, Enum):
    RHO_FAR = "rho-far"
    RHO_STAIR = "rho-stair"
    TAU_FAR = "tau-far"
    TAU_STAIR = "tau-stair"
    EMPTY_HERD = "empty-herd"


@dataclass(frozen=True, slots=True)
class HerdInputs:
    """Everything the analysis looks at, as 1-based position sets."""

    values: tuple[DataValue, ...]
    shift: int
    tau: frozenset[int]
    rho_eq: frozenset[int]
    rho_neq: frozenset[int]

    @property
    def length(self) -> int:
        return len(self.values)

    def val(self, i: int) -> DataValue:
        return self.values[i - 1]


@dataclass(slots=True)
class HerdReport:
    mode: Mode
    inputs: HerdInputs
    psi_positions: frozenset[int]
    shepherds: dict[int, int] = field(default_factory=dict)
    orphans: frozenset[int] = frozenset()
    herds: dict[int, frozenset[int]] = field(default_factory=dict)
    specials: dict[int, dict[int, frozenset[SpecialKind]]] = field(default_factory=dict)

    @property
    def shift(self) -> int:
        return self.inputs.shift

    def special_set(self, j: int) -> frozenset[int]:
        return frozenset(self.specials.get(j, {}))

    def interval(self, j: int) -> tuple[int, int] | None:
        found = self.special_set(j)
        return (min(found), max(found)) if found else None

    def e_minus(self, j: int) -> int | None:
        bounds = self.interval(j)
        return bounds[0] if bounds else None

    def e_plus(self, j: int) -> int | None:
        bounds = self.interval(j)
        return bounds[1] if bounds else None

    def herd_owners(self) -> list[int]:
        """Shepherds proper: ``tau`` positions with a non-empty herd."""

        return sorted(j for j, herd in self.herds.items() if herd)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "shift": self.shift,
            "psi_positions": sorted(self.psi_positions),
            "shepherds": {str(i): j for i, j in sorted(self.shepherds.items())},
            "orphans": sorted(self.orphans),
            "herds": {str(j): sorted(h) for j, h in sorted(self.herds.items())},
            "specials": {
                str(j): {str(k): sorted(kind.value for kind in kinds) for k, kinds in sorted(found.items())}
                for j, found in sorted(self.specials.items())
            },
            "intervals": {str(j): self.interval(j) for j in sorted(self.herds)},
        }


# --- Construction --------------------------------------------------------------------


def shepherd_of(inputs: HerdInputs, i: int) -> int | None:
    """Minimal ``j >= i + shift`` carrying ``tau`` and a value other than ``i``'s."""

    for j in range(max(i + inputs.shift, 1), inputs.length + 1):
        if j in inputs.tau and inputs.val(j) != inputs.val(i):
            return j
    return None


def _empty_herd_specials(inputs: HerdInputs, j: int) -> dict[int, frozenset[SpecialKind]]:
    delta = inputs.shift
    for k in range(j - 1, max(j - delta, 1) - 1, -1):
        if inputs.val(k) == inputs.val(j):
            continue
        if not all(m in inputs.rho_neq for m in range(k + 1, j)):
            continue
        if k in inputs.tau or (k in inputs.rho_eq and k not in inputs.rho_neq):
            kind = frozenset({SpecialKind.EMPTY_HERD})
            found = {k: kind}
            for ell in range(max(j - delta + 1, 1), k):
                if inputs.val(ell) == inputs.val(k):
                    found[ell] = kind
            return found
    return {}


def _herd_specials(inputs: HerdInputs, j: int, herd: Iterable[int]) -> dict[int, frozenset[SpecialKind]]:
    found: dict[int, set[SpecialKind]] = {}
    for i in herd:
        for k in range(i + inputs.shift, j):
            if k not in inputs.rho_neq:
                found.setdefault(i, set()).add(SpecialKind.RHO_FAR)
                found.setdefault(k, set()).add(SpecialKind.RHO_STAIR)
            if k in inputs.tau:
                found.setdefault(i, set()).add(SpecialKind.TAU_FAR)
                found.setdefault(k, set()).add(SpecialKind.TAU_STAIR)
    return {k: frozenset(kinds) for k, kinds in found.items()}


def build_report(inputs: HerdInputs, psi_positions: Iterable[int], mode: Mode) -> HerdReport:
    psi = frozenset(psi_positions)
    report = HerdReport(mode, inputs, psi)
    orphans = set()
    herds: dict[int, set[int]] = {j: set() for j in sorted(inputs.tau)}
    for i in sorted(psi):
        j = shepherd_of(inputs, i)
        if j is None:
            orphans.add(i)
            continue
        report.shepherds[i] = j
        herds[j].add(i)
    report.orphans = frozenset(orphans)
    report.herds = {j: frozenset(h) for j, h in herds.items()}
    for j, herd in report.herds.items():
        found = _herd_specials(inputs, j, herd) if herd else _empty_herd_specials(inputs, j)
        if found:
            report.specials[j] = found
    if orphans:
        LOGGER.warning({"event": "herd_orphans", "positions": sorted(orphans)})
    return report


def herd_inputs(w: AttributedWord, psi: Formula, ev: Evaluator | None = None) -> HerdInputs:
    if not isinstance(psi, UneqUntil):
        raise FragmentError(f"herd analysis needs an extended Until, got {type(psi).__name__}")
    shape = extended_shape(psi)
    if shape.test_attr != shape.attr:
        raise FragmentError("herd analysis needs the attribute tests to use the frozen attribute")
    values = tuple(pos.value(shape.attr) for pos in w.positions)
    if any(value is None for value in values):
        raise WordFormatError(f"herd analysis needs a value of {shape.attr} at every position")

    ev = ev or Evaluator(w)

    def truth(phi: Formula) -> set[int]:
        return {k + 1 for k, holds in enumerate(ev.position(phi)) if holds}

    rho = truth(shape.rho)
    rho_neq = rho | truth(shape.rho_neq)
    return HerdInputs(
        values=values,
        shift=shape.shift,
        tau=frozenset(truth(shape.tau)),
        rho_eq=frozenset(rho_neq | truth(shape.rho_eq)),
        rho_neq=frozenset(rho_neq),
    )


def analyze(
    w: AttributedWord, psi: Formula, mode: Mode | str = Mode.TRUTH, marks: Iterable[int] | None = None
) -> HerdReport:
    mode = Mode(mode)
    ev = Evaluator(w)
    inputs = herd_inputs(w, psi, ev)
    if mode is Mode.MARKS:
        if marks is None:
            raise ValidityError("marks mode needs the positions marked with the operator")
        psi_positions = frozenset(marks)
        stray = [i for i in psi_positions if not 1 <= i <= len(w)]
        if stray:
            raise ValidityError("marks outside the word", {"positions": sorted(stray)})
    else:
        psi_positions = frozenset(k + 1 for k, holds in enumerate(ev.position(psi)) if holds)
    report = build_report(inputs, psi_positions, mode)
    LOGGER.info(
        {
            "event": "herd_analyzed",
            "mode": mode.value,
            "psi": len(psi_positions),
            "shepherds": len(report.herd_owners()),
        }
    )
    return report


# --- Claims ------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ClaimCheck:
    name: str
    passed: bool
    counterexample: dict | None = None

    def as_dict(self) -> dict:
        return {"claim": self.name, "passed": self.passed, "counterexample": self.counterexample}


def _largest_stair_end(inputs: HerdInputs, j: int) -> int | None:
    for k in range(j - 1, 0, -1):
        if inputs.val(k) == inputs.val(j):
            continue
        if not all(m in inputs.rho_neq for m in range(k + 1, j)):
            return None
        if k in inputs.tau or (k in inputs.rho_eq and k not in inputs.rho_neq):
            return k
    return None


def _smallest_start(inputs: HerdInputs, j: int, e_plus: int, special: frozenset[int]) -> int | None:
    for m in range(1, e_plus + 1):
        if inputs.val(m) != inputs.val(e_plus):
            continue
        window = range(m + inputs.shift, j)
        if all(
            (l in special or l in inputs.rho_neq) and l in inputs.rho_eq and (l in special or l not in inputs.tau)
            for l in window
        ):
            return m
    return None


def verify_claims(report: HerdReport) -> list[ClaimCheck]:
    """Check the four structural claims about special sets on ``report``."""

    inputs = report.inputs
    checks = []

    def first(name: str, failures: Iterable[dict]) -> ClaimCheck:
        bad = next(iter(failures), None)
        return ClaimCheck(name, bad is None, bad)

    owners = sorted(report.specials)
    checks.append(
        first(
            "1a",
            (
                {"shepherd": j, "values": sorted({inputs.val(k) for k in report.special_set(j)})}
                for j in owners
                if len({inputs.val(k) for k in report.special_set(j)}) > 1
            ),
        )
    )
    checks.append(
        first(
            "1b",
            (
                {"shepherd": j, "e_plus": report.e_plus(j), "expected": _largest_stair_end(inputs, j)}
                for j in owners
                if _largest_stair_end(inputs, j) != report.e_plus(j)
            ),
        )
    )
    checks.append(
        first(
            "1c",
            (
                {"shepherd": j, "e_minus": report.e_minus(j), "expected": expected}
                for j in owners
                for expected in [_smallest_start(inputs, j, report.e_plus(j), report.special_set(j))]
                if expected != report.e_minus(j)
            ),
        )
    )

    def overlaps():
        for index, j in enumerate(owners):
            lo, hi = report.interval(j)
            for other in owners[index + 1 :]:
                olo, ohi = report.interval(other)
                shared = min(hi, ohi) - max(lo, olo) + 1
                if shared > inputs.shift:
                    yield {"shepherds": [j, other], "shared": shared}

    checks.append(first("1d", overlaps()))
    return checks


def render_table(report: HerdReport) -> str:
    """Position-by-position text table of a report."""

    inputs = report.inputs
    rows = ["pos  val  psi  tau  rho=  rho!=  shepherd  special"]
    special_of: dict[int, list[str]] = {}
    for j, found in report.specials.items():
        for k, kinds in found.items():
            special_of.setdefault(k, []).append(f"{j}:{'/'.join(sorted(kind.value for kind in kinds))}")
    for i in range(1, inputs.length + 1):
        rows.append(
            f"{i:>3}  {inputs.val(i):>3}  {'x' if i in report.psi_positions else '.':>3}"
            f"  {'x' if i in inputs.tau else '.':>3}  {'x' if i in inputs.rho_eq else '.':>4}"
            f"  {'x' if i in inputs.rho_neq else '.':>5}  {report.shepherds.get(i, '-')!s:>8}"
            f"  {','.join(special_of.get(i, [])) or '-'}"
        )
    for j in report.herd_owners():
        rows.append(f"H({j}) = {sorted(report.herds[j])}  I({j}) = {report.interval(j)}")
    return "\n".join(rows)
