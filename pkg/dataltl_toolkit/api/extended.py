"""Reports for valid extensions, herd analysis and decorations."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import replace

from dataltl_toolkit.config import DataLTLConfig
from dataltl_toolkit.services.decoration import (
    build_s_decoration,
    check_all_groups,
    conditions_imply_truth,
    falsification_search,
)
from dataltl_toolkit.services.formula import Layer, Path, max_shift, to_text, walk
from dataltl_toolkit.services.herd_analysis import Mode, analyze, render_table, verify_claims
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.validity import build_valid_extension, check_all
from dataltl_toolkit.services.words import AttributedWord
from dataltl_toolkit.utils.errors import ValidityError


def parse_path(text: str) -> Path:
    """``root`` or dotted child indices such as ``0.1``."""

    text = text.strip()
    if text in ("", "root"):
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise ValidityError(f"bad occurrence path {text!r}", {"path": text}) from None


def _items(layer: Layer, raw: Iterable) -> frozenset:
    if layer is Layer.POSITION:
        return frozenset(int(item) for item in raw)
    return frozenset((int(i), int(d)) for i, d in raw)


def validity(
    w: AttributedWord,
    text: str,
    bound: int | None = None,
    marks: Mapping[str, Iterable] | None = None,
    config: DataLTLConfig | None = None,
) -> dict:
    """Build the valid extension of ``w`` and check every occurrence.

    ``marks`` replaces the marks of chosen occurrences (keyed by path) before
    checking, which is how hand-made extensions are tested.
    """

    phi = parse(text, w.props_alphabet, w.attrs_alphabet, config=config)
    ext = build_valid_extension(w, phi, max_shift(phi) if bound is None else bound)
    if marks:
        updated = dict(ext.marks)
        for key, raw in marks.items():
            path = parse_path(key)
            if path not in ext.layers:
                raise ValidityError(f"no occurrence at path {key!r}", {"path": key})
            updated[path] = _items(ext.layers[path], raw)
        ext = replace(ext, marks=updated)
    report = check_all(ext)
    failing = set(report.failing())
    return {
        "formula": to_text(phi),
        **report.as_dict(),
        "occurrences": [
            {
                "path": ".".join(map(str, path)) or "root",
                "layer": layer.value,
                "formula": to_text(node),
                "valid": path not in failing,
            }
            for path, node, layer in walk(phi)
        ],
        "extension": ext.as_dict(),
    }


def herd(
    w: AttributedWord,
    text: str,
    marks: Iterable[int] | None = None,
    decorate: bool = False,
    trials: int = 0,
    seed: int = 0,
    config: DataLTLConfig | None = None,
) -> dict:
    """Shepherds, herds and specials of an extended Until, optionally with its decoration.

    Without ``marks`` the operator's own truth set is analysed.
    """

    psi = parse(text, w.props_alphabet, w.attrs_alphabet, config=config)
    mode = Mode.TRUTH if marks is None else Mode.MARKS
    report = analyze(w, psi, mode, None if marks is None else list(marks))
    out = {
        "formula": to_text(psi),
        **report.as_dict(),
        "claims": [check.as_dict() for check in verify_claims(report)],
        "table": render_table(report),
    }
    if decorate:
        ext = build_valid_extension(w, psi, max_shift(psi))
        ext = replace(ext, marks={**ext.marks, (): report.psi_positions})
        dec = build_s_decoration(ext, ())
        out["decoration"] = dec.as_dict()
        out["conditions"] = [group.as_dict() for group in check_all_groups(dec)]
        out["conditions_imply_truth"] = conditions_imply_truth(dec)
        if trials:
            out["falsification"] = falsification_search(dec, trials, seed).as_dict()
    return out
