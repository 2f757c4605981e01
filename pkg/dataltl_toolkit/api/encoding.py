from __future__ import annotations

from collections.abc import Sequence

from dataltl_toolkit.config import DataLTLConfig, get_config
from dataltl_toolkit.services.encoder import EncodingScheme, decode_word, encode_word, structure_formula, translate
from dataltl_toolkit.services.formula import And, size, to_text
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.semantics import satisfies
from dataltl_toolkit.services.words import AttributedWord
from dataltl_toolkit.utils.word_io import word_to_dict


def encode(w: AttributedWord, padding: str | None = None, config: DataLTLConfig | None = None) -> dict:
    """Block-encode ``w`` and confirm the structure formula accepts the result."""

    config = config or get_config()
    scheme = EncodingScheme.for_word(w)
    encoded = encode_word(w, scheme, padding or config.padding_mode)
    return {
        "scheme": {"attributes": list(scheme.attributes), "target": scheme.target, "present": scheme.present},
        "padding": padding or config.padding_mode,
        "word": word_to_dict(encoded),
        "structured": bool(len(encoded)) and satisfies(encoded, structure_formula(scheme)),
        "round_trip": decode_word(encoded, scheme) == w,
    }


def translate_formula(
    text: str,
    attrs: Sequence[str],
    props: Sequence[str] = (),
    w: AttributedWord | None = None,
    config: DataLTLConfig | None = None,
) -> dict:
    """Translate ``text`` for a scheme over ``attrs``; with a word, compare both sides on it."""

    config = config or get_config()
    if w is not None:
        attrs = attrs or w.attrs_alphabet
        props = props or sorted(w.props_alphabet)
    scheme = EncodingScheme(tuple(attrs), tuple(props))
    chi = parse(text, config=config)
    phi = translate(chi, scheme, config=config)
    out = {
        "formula": to_text(chi),
        "translation": to_text(phi),
        "structure": to_text(structure_formula(scheme)),
        "size": size(phi),
    }
    if w is not None and len(w):
        encoded = encode_word(w, scheme, config.padding_mode)
        out["source_holds"] = satisfies(w, chi)
        out["encoded_holds"] = satisfies(encoded, And(structure_formula(scheme), phi))
    return out
