from __future__ import annotations

from dataltl_toolkit.config import DataLTLConfig, get_config
from dataltl_toolkit.services.formula import has_extended, max_shift, size, to_text
from dataltl_toolkit.services.fragments import classify
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.semantics import eval_position, truth_vector
from dataltl_toolkit.services.words import AttributedWord


def parse_formula(text: str, config: DataLTLConfig | None = None) -> dict:
    """Parse ``text`` and return its canonical printing with a few size facts."""

    phi = parse(text, config=config or get_config())
    return {
        "formula": to_text(phi),
        "size": size(phi),
        "max_shift": max_shift(phi),
        "extended": has_extended(phi),
    }


def evaluate(w: AttributedWord, text: str, pos: int = 1, config: DataLTLConfig | None = None) -> dict:
    phi = parse(text, w.props_alphabet, w.attrs_alphabet, config=config)
    return {
        "formula": to_text(phi),
        "position": pos,
        "value": eval_position(w, pos, phi),
        "holds_at": sorted(truth_vector(w, phi)),
    }


def classify_formula(text: str, config: DataLTLConfig | None = None, check_implication: bool = True) -> dict:
    config = config or get_config()
    phi = parse(text, config=config)
    return {"formula": to_text(phi), **classify(phi, config=config, check_implication=check_implication).as_dict()}
