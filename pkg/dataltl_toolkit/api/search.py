from __future__ import annotations

from collections.abc import Sequence

from dataltl_toolkit.config import DataLTLConfig, get_config
from dataltl_toolkit.services.formula import attributes, propositions, to_text
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.satsearch import SearchBounds, check_equisat, search
from dataltl_toolkit.services.words import random_word
from dataltl_toolkit.utils.splitmix import SplitMix64
from dataltl_toolkit.utils.word_io import word_to_dict


def satcheck(
    text: str,
    max_len: int,
    max_values: int | None = None,
    props: Sequence[str] = (),
    attrs: Sequence[str] = (),
    equisat: bool = False,
    threads: int | None = None,
    config: DataLTLConfig | None = None,
) -> dict:
    """Bounded satisfiability of ``text``; alphabets default to the symbols it mentions."""

    config = config or get_config()
    phi = parse(text, config=config)
    bounds = SearchBounds(
        max_len=max_len,
        props=tuple(props) or tuple(sorted(propositions(phi))),
        attrs=tuple(attrs) or tuple(sorted(attributes(phi))),
        max_values=max_values,
    )
    if equisat:
        report = check_equisat(phi, bounds, config=config, threads=threads)
        return {
            "formula": to_text(phi),
            "bounds": bounds.as_dict(),
            "outcome": report.outcome,
            "source": report.source.outcome.value,
            "encoded": report.encoded.outcome.value,
            "encoded_bounds": report.encoded_bounds.as_dict(),
        }
    result = search(phi, bounds, config=config, threads=threads)
    return {
        "formula": to_text(phi),
        "bounds": bounds.as_dict(),
        "outcome": result.outcome.value,
        "explored": result.explored,
        "model": None if result.model is None else word_to_dict(result.model),
    }


def random_words(
    seed: int,
    count: int = 1,
    length: int = 5,
    props: Sequence[str] = ("p", "q"),
    attrs: Sequence[str] = ("a",),
    max_values: int = 3,
    presence: tuple[int, int] = (1, 1),
) -> dict:
    """``count`` words drawn one after another from one stream seeded with ``seed``."""

    rng = SplitMix64(seed)
    words = [random_word(rng, length, props, attrs, max_values, presence) for _ in range(count)]
    return {"seed": seed, "words": [word_to_dict(w) for w in words]}
