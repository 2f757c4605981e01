from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import Any

from dataltl_toolkit.services.formula import size, to_text
from dataltl_toolkit.services.gadgets import (
    GadgetFormula,
    MinskyMachine,
    PCPInstance,
    minsky_conditions,
    minsky_run_word,
    pcp_conditions,
    pcp_witness,
    run_minsky,
    undU_conditions,
)
from dataltl_toolkit.services.semantics import satisfies
from dataltl_toolkit.services.words import AttributedWord
from dataltl_toolkit.utils.errors import GadgetError
from dataltl_toolkit.utils.word_io import word_to_dict


def load_machine(payload: Mapping[str, Any]) -> MinskyMachine:
    """``{"states": [...], "initial": s, "accepting": [...], "transitions": [[s, action, t], ...]}``"""

    try:
        return MinskyMachine(
            states=tuple(payload["states"]),
            initial=payload["initial"],
            accepting=frozenset(payload["accepting"]),
            transitions=tuple((s, a, t) for s, a, t in payload["transitions"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GadgetError(f"malformed machine definition: {exc}") from exc


def _report(gadget: GadgetFormula, w: AttributedWord, show_formula: bool) -> dict:
    conditions = {name: satisfies(w, part) for name, part in gadget.conditions.items()}
    out = {
        "word": word_to_dict(w),
        "conditions": conditions,
        "satisfied": all(conditions.values()),
        "size": size(gadget.formula),
    }
    if show_formula:
        out["formula"] = to_text(gadget.formula)
    return out


def pcp(pairs: Sequence[tuple[str, str]], solution: Sequence[int], show_formula: bool = False) -> dict:
    instance = PCPInstance.of(pairs)
    w = pcp_witness(instance, solution)
    return {"gadget": "pcp", "solution": list(solution), **_report(pcp_conditions(instance), w, show_formula)}


def minsky(
    machine: MinskyMachine, steps: Sequence[str], variant: str = "minsky", simulate: bool = True, show_formula: bool = False
) -> dict:
    """Run word of ``steps`` checked against the minsky or undU conditions.

    With ``simulate`` the counters are tracked and a blocked run is an error;
    without it the word is built from the transitions alone.
    """

    if variant not in ("minsky", "undu"):
        raise GadgetError(f"unknown gadget variant {variant!r}", {"variant": variant})
    out: dict[str, Any] = {"gadget": variant, "steps": list(steps)}
    if simulate:
        run = run_minsky(machine, steps)
        w = run.word
        out["counters"] = [list(pair) for pair in run.counters]
    else:
        w = minsky_run_word(machine, steps)
    gadget = minsky_conditions(machine) if variant == "minsky" else undU_conditions(machine)
    return {**out, **_report(gadget, w, show_formula)}
