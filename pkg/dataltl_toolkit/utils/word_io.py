"""JSON form of attributed words.

    {"props_alphabet": [...], "attrs_alphabet": [...],
     "positions": [{"props": ["p"], "attrs": {"a": 1}}, ...]}

A missing attribute key means the attribute is absent. String values are
interned to integer tokens above the largest integer value in the document, in
order of first occurrence.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from dataltl_toolkit.services.words import AttributedWord, Position
from dataltl_toolkit.utils.errors import WordFormatError


def word_from_dict(payload: Any) -> AttributedWord:
    if not isinstance(payload, dict):
        raise WordFormatError("word document must be a JSON object")
    rows = payload.get("positions")
    if not isinstance(rows, list):
        raise WordFormatError("word document needs a 'positions' list")

    int_values = [
        value
        for row in rows
        if isinstance(row, dict) and isinstance(row.get("attrs"), dict)
        for value in row["attrs"].values()
        if isinstance(value, int) and not isinstance(value, bool)
    ]
    next_token = max(int_values, default=-1) + 1
    interned: dict[str, int] = {}

    positions = []
    for index, row in enumerate(rows, start=1):
        if not isinstance(row, dict):
            raise WordFormatError(f"position {index} is not an object", {"position": index})
        props = row.get("props", [])
        attrs = row.get("attrs", {})
        if not isinstance(props, list) or not all(isinstance(p, str) for p in props):
            raise WordFormatError(f"position {index}: 'props' must be a list of names", {"position": index})
        if not isinstance(attrs, dict):
            raise WordFormatError(f"position {index}: 'attrs' must be an object", {"position": index})
        values = {}
        for name, value in attrs.items():
            if isinstance(value, str):
                if value not in interned:
                    interned[value] = next_token
                    next_token += 1
                value = interned[value]
            elif isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise WordFormatError(
                    f"position {index}: value of {name!r} must be a non-negative integer or a string",
                    {"position": index, "attr": name},
                )
            values[name] = value
        positions.append(Position.of(props, values))

    props_alphabet = payload.get("props_alphabet")
    attrs_alphabet = payload.get("attrs_alphabet")
    if props_alphabet is None:
        props_alphabet = sorted({p for pos in positions for p in pos.props})
    if attrs_alphabet is None:
        attrs_alphabet = sorted({name for pos in positions for name, _ in pos.attrs})
    return AttributedWord(tuple(positions), frozenset(props_alphabet), tuple(attrs_alphabet))


def word_to_dict(w: AttributedWord) -> dict[str, Any]:
    return {
        "props_alphabet": sorted(w.props_alphabet),
        "attrs_alphabet": list(w.attrs_alphabet),
        "positions": [{"props": sorted(pos.props), "attrs": pos.attr_map()} for pos in w.positions],
    }


def load_word(source: str | Path) -> AttributedWord:
    try:
        payload = json.loads(Path(source).read_text(encoding="utf-8"))
    except OSError as exc:
        raise WordFormatError(f"cannot read word file: {exc}", {"path": str(source)})
    except json.JSONDecodeError as exc:
        raise WordFormatError(f"word file is not valid JSON: {exc.msg}", {"line": exc.lineno, "column": exc.colno})
    return word_from_dict(payload)


def loads_word(text: str) -> AttributedWord:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WordFormatError(f"word is not valid JSON: {exc.msg}", {"line": exc.lineno, "column": exc.colno})
    return word_from_dict(payload)


def dumps_word(w: AttributedWord) -> str:
    return json.dumps(word_to_dict(w), sort_keys=True)
