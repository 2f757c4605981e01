from __future__ import annotations

from collections.abc import Mapping
from typing import Any

from dataltl_toolkit.services.automata import (
    DataAutomaton,
    da_accepts,
    da_product,
    da_search,
    dump_automaton,
    load_automaton,
    ra_accepts,
)
from dataltl_toolkit.services.words import AttributedWord
from dataltl_toolkit.utils.errors import AutomatonError


def automaton_run(
    definition: Mapping[str, Any], w: AttributedWord, product_with: Mapping[str, Any] | None = None
) -> dict:
    """Membership of ``w``; with ``product_with`` the product of two data automata is run too."""

    automaton = load_automaton(definition)
    if product_with is None:
        if isinstance(automaton, DataAutomaton):
            accepted, explored = da_search(automaton, w)
            return {"kind": "data", "accepted": accepted, "explored": explored}
        return {"kind": "register", "accepted": ra_accepts(automaton, w)}

    other = load_automaton(product_with)
    if not isinstance(automaton, DataAutomaton) or not isinstance(other, DataAutomaton):
        raise AutomatonError("products are defined for data automata only")
    product = da_product(automaton, other)
    accepted = da_accepts(product, w)
    left, right = da_accepts(automaton, w), da_accepts(other, w)
    return {
        "kind": "product",
        "accepted": accepted,
        "left": left,
        "right": right,
        "consistent": accepted == (left and right),
        "automaton": dump_automaton(product),
    }
