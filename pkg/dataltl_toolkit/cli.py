"""``dataltl`` command line.

Exit codes: 0 success, true, sat or accepted; 1 false, bounded-unsat,
rejected or a failed check; 2 usage error; 3 input error (any
``DataLTLError``, including an exhausted search budget).
"""

from __future__ import annotations

import json
import logging
from typing import Any

import click

from dataltl_toolkit import __version__
from dataltl_toolkit.config import LOG_LEVELS, PADDING_MODES, get_config
from dataltl_toolkit.utils.errors import DataLTLError
from dataltl_toolkit.utils.word_io import loads_word


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.cli")


LOGGER = _build_logger()

_JSON = "dataltl.json"


class _DataLTLGroup(click.Group):
    """Maps toolkit errors to exit code 3."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except DataLTLError as exc:
            LOGGER.error({"event": "input_error", **exc.as_dict()})
            if ctx.meta.get(_JSON):
                click.echo(json.dumps(exc.as_dict(), sort_keys=True, default=str))
            else:
                click.echo(f"error: {exc.message}", err=True)
            ctx.exit(3)


# --- Shared options ---------------------------------------------------------------------


def _remember_json(ctx: click.Context, _param: click.Parameter, value: bool) -> bool:
    if value:
        ctx.meta[_JSON] = True
    return value


def json_option(func):
    return click.option(
        "--json", "as_json", is_flag=True, callback=_remember_json, is_eager=True, help="Emit a JSON document."
    )(func)


def formula_options(func):
    func = click.option("--formula-file", type=click.File("r"), help="Read the formula from a file.")(func)
    return click.option("--formula", "-f", "formula", help="Formula text.")(func)


def word_option(func):
    return click.option(
        "--word", "-w", "word_file", type=click.File("r"), default="-", show_default=True, help="Word JSON (- for stdin)."
    )(func)


def _formula_text(formula: str | None, formula_file) -> str:
    if (formula is None) == (formula_file is None):
        raise click.UsageError("give exactly one of --formula and --formula-file")
    return formula if formula is not None else formula_file.read().strip()


def _int_list(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str | None) -> tuple[str, ...]:
    return tuple(part.strip() for part in (text or "").split(",") if part.strip())


def _emit(payload: dict, as_json: bool, text: str) -> None:
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True, default=str))
    else:
        click.echo(text)


# --- Commands ---------------------------------------------------------------------------


@click.group(cls=_DataLTLGroup)
@click.version_option(__version__, prog_name="dataltl")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), help="Overrides DATALTL_LOG_LEVEL.")
@click.pass_context
def cli(ctx: click.Context, log_level: str | None) -> None:
    """Basic Data LTL on attributed data words."""

    config = get_config({"log_level": log_level.upper() if log_level else None})
    logging.basicConfig(level=config.log_level)
    ctx.obj = config


@cli.command("parse")
@formula_options
@json_option
@click.pass_obj
def parse_cmd(config, formula, formula_file, as_json):
    """Parse a formula and print it back in canonical form."""

    from dataltl_toolkit.api.formulas import parse_formula

    payload = parse_formula(_formula_text(formula, formula_file), config)
    _emit(payload, as_json, payload["formula"])


@cli.command("eval")
@word_option
@formula_options
@click.option("--pos", default=1, show_default=True, type=int, help="1-based position.")
@json_option
@click.pass_context
def eval_cmd(ctx, word_file, formula, formula_file, pos, as_json):
    """Evaluate a formula at one position of a word."""

    from dataltl_toolkit.api.formulas import evaluate

    payload = evaluate(loads_word(word_file.read()), _formula_text(formula, formula_file), pos, ctx.obj)
    _emit(payload, as_json, "true" if payload["value"] else "false")
    ctx.exit(0 if payload["value"] else 1)


@cli.command("classify")
@formula_options
@click.option("--no-implication", is_flag=True, help="Skip the rho_neq -> rho_eq check.")
@json_option
@click.pass_obj
def classify_cmd(config, formula, formula_file, no_implication, as_json):
    """Report the fragment a formula belongs to."""

    from dataltl_toolkit.api.formulas import classify_formula

    payload = classify_formula(_formula_text(formula, formula_file), config, not no_implication)
    lines = [payload["fragment"]]
    if payload["reason"]:
        lines.append(f"reason: {payload['reason']}")
    if payload["implications"]:
        lines.append(f"implications: {', '.join(payload['implications'])}")
    _emit(payload, as_json, "\n".join(lines))


@cli.command("encode")
@word_option
@click.option("--padding", type=click.Choice(PADDING_MODES), help="Overrides DATALTL_PADDING_MODE.")
@json_option
@click.pass_obj
def encode_cmd(config, word_file, padding, as_json):
    """Encode a multi-attribute word as a 1-attributed block word."""

    from dataltl_toolkit.api.encoding import encode

    payload = encode(loads_word(word_file.read()), padding, config)
    _emit(payload, as_json, json.dumps(payload["word"], sort_keys=True))


@cli.command("translate")
@formula_options
@click.option("--attrs", help="Comma-separated attributes of the scheme.")
@click.option("--props", help="Comma-separated propositions of the scheme.")
@click.option("--word", "-w", "word_file", type=click.File("r"), help="Also compare both sides on this word.")
@json_option
@click.pass_obj
def translate_cmd(config, formula, formula_file, attrs, props, word_file, as_json):
    """Translate a formula to the 1-attributed encoding."""

    from dataltl_toolkit.api.encoding import translate_formula

    if not attrs and word_file is None:
        raise click.UsageError("give --attrs or --word")
    w = loads_word(word_file.read()) if word_file is not None else None
    payload = translate_formula(_formula_text(formula, formula_file), _names(attrs), _names(props), w, config)
    text = payload["translation"]
    if "source_holds" in payload:
        text += f"\nsource: {payload['source_holds']}  encoded: {payload['encoded_holds']}"
    _emit(payload, as_json, text)


@cli.command("satcheck")
@formula_options
@click.option("--max-len", required=True, type=click.IntRange(min=1))
@click.option("--max-values", type=click.IntRange(min=1), help="Distinct values per word (default: unbounded).")
@click.option("--props", help="Comma-separated propositions to enumerate.")
@click.option("--attrs", help="Comma-separated attributes to enumerate.")
@click.option("--equisat", is_flag=True, help="Also search the translated formula on encoded words.")
@click.option("--threads", type=click.IntRange(min=1), help="Worker processes (overrides DATALTL_THREADS).")
@json_option
@click.pass_context
def satcheck_cmd(ctx, formula, formula_file, max_len, max_values, props, attrs, equisat, threads, as_json):
    """Bounded satisfiability search."""

    from dataltl_toolkit.api.search import satcheck

    payload = satcheck(
        _formula_text(formula, formula_file),
        max_len,
        max_values,
        _names(props),
        _names(attrs),
        equisat,
        threads,
        ctx.obj,
    )
    outcome = payload["outcome"]
    text = outcome
    if payload.get("model"):
        text += "\n" + json.dumps(payload["model"], sort_keys=True)
    _emit(payload, as_json, text)
    ctx.exit({"sat": 0, "agree": 0, "bounded-unsat": 1, "disagree": 1}.get(outcome, 3))


@cli.command("validity")
@word_option
@formula_options
@click.option("--bound", type=click.IntRange(min=0), help="Shift bound N (default: the formula's largest shift).")
@click.option("--marks", "marks_file", type=click.File("r"), help="JSON object of replacement marks keyed by path.")
@json_option
@click.pass_context
def validity_cmd(ctx, word_file, formula, formula_file, bound, marks_file, as_json):
    """Build the valid extension of a 1-attributed word and check every occurrence."""

    from dataltl_toolkit.api.extended import validity

    marks = json.load(marks_file) if marks_file is not None else None
    payload = validity(loads_word(word_file.read()), _formula_text(formula, formula_file), bound, marks, ctx.obj)
    lines = [f"{o['path']:<10} {'ok' if o['valid'] else 'INVALID':<8} {o['formula']}" for o in payload["occurrences"]]
    lines.append("valid" if payload["valid"] else "invalid")
    _emit(payload, as_json, "\n".join(lines))
    ctx.exit(0 if payload["valid"] else 1)


@cli.command("herd")
@word_option
@formula_options
@click.option("--marks", help="Comma-separated positions marked with the operator (default: its truth set).")
@click.option("--decorate", is_flag=True, help="Also build the decoration and check its conditions.")
@click.option("--trials", default=0, type=click.IntRange(min=0), help="Falsification trials on the decoration.")
@click.option("--seed", default=0, type=int)
@click.option("--check", is_flag=True, help="Exit 1 when a claim or a decoration condition fails.")
@json_option
@click.pass_context
def herd_cmd(ctx, word_file, formula, formula_file, marks, decorate, trials, seed, check, as_json):
    """Shepherds, herds and special positions of an extended Until."""

    from dataltl_toolkit.api.extended import herd

    payload = herd(
        loads_word(word_file.read()),
        _formula_text(formula, formula_file),
        _int_list(marks),
        decorate,
        trials,
        seed,
        ctx.obj,
    )
    lines = [payload["table"], *(f"claim {c['claim']}: {'ok' if c['passed'] else 'FAILED'}" for c in payload["claims"])]
    passed = all(c["passed"] for c in payload["claims"])
    if decorate:
        for group in payload["conditions"]:
            failed = [name for name, result in group["conditions"].items() if not result["passed"]]
            lines.append(f"group {group['group']}: {'ok' if not failed else 'failed ' + ', '.join(failed)}")
            passed = passed and not failed
        lines.append(f"conditions imply truth: {payload['conditions_imply_truth']}")
    _emit(payload, as_json, "\n".join(lines))
    ctx.exit(1 if check and not passed else 0)


@cli.command("automaton-run")
@click.option("--automaton", "-a", "automaton_file", required=True, type=click.File("r"))
@word_option
@click.option("--product", "product_file", type=click.File("r"), help="Second data automaton to intersect with.")
@json_option
@click.pass_context
def automaton_run_cmd(ctx, automaton_file, word_file, product_file, as_json):
    """Membership of a word in a register or data automaton."""

    from dataltl_toolkit.api.automata import automaton_run

    product = json.load(product_file) if product_file is not None else None
    payload = automaton_run(json.load(automaton_file), loads_word(word_file.read()), product)
    _emit(payload, as_json, "accepted" if payload["accepted"] else "rejected")
    ctx.exit(0 if payload["accepted"] else 1)


@cli.group("gadget", cls=_DataLTLGroup)
def gadget() -> None:
    """Reduction formulas and their witness words."""


def _gadget_text(payload: dict) -> str:
    lines = [f"{name:<14} {'ok' if holds else 'FAILED'}" for name, holds in payload["conditions"].items()]
    lines.append("satisfied" if payload["satisfied"] else "not satisfied")
    return "\n".join(lines)


def _pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for chunk in _names(text):
        u, sep, v = chunk.partition(":")
        if not sep:
            raise click.BadParameter(f"pair {chunk!r} is not of the form u:v")
        pairs.append((u, v))
    return pairs


@gadget.command("pcp")
@click.option("--pairs", required=True, help="Comma-separated u:v pairs, e.g. ab:a,b:bb.")
@click.option("--solution", required=True, help="Comma-separated 1-based pair indices.")
@click.option("--show-formula", is_flag=True)
@json_option
@click.pass_context
def pcp_cmd(ctx, pairs, solution, show_formula, as_json):
    """Witness word of a PCP solution checked against the PCP formula."""

    from dataltl_toolkit.api.gadgets import pcp

    payload = pcp(_pairs(pairs), _int_list(solution), show_formula)
    _emit(payload, as_json, _gadget_text(payload))
    ctx.exit(0 if payload["satisfied"] else 1)


def _machine_command(variant: str):
    @click.option("--machine", "machine_file", required=True, type=click.File("r"), help="Machine JSON.")
    @click.option("--steps", required=True, help="Comma-separated actions of the run.")
    @click.option("--no-simulate", is_flag=True, help="Build the word without tracking the counters.")
    @click.option("--show-formula", is_flag=True)
    @json_option
    @click.pass_context
    def command(ctx, machine_file, steps, no_simulate, show_formula, as_json):
        from dataltl_toolkit.api.gadgets import load_machine, minsky

        payload = minsky(load_machine(json.load(machine_file)), _names(steps), variant, not no_simulate, show_formula)
        _emit(payload, as_json, _gadget_text(payload))
        ctx.exit(0 if payload["satisfied"] else 1)

    return command


gadget.command("minsky", help="Run word of a counter machine checked against the from-now-on encoding.")(
    _machine_command("minsky")
)
gadget.command("undu", help="Run word of a counter machine checked against the extended Until encoding.")(
    _machine_command("undu")
)


@cli.command("random-word")
@click.option("--seed", required=True, type=int)
@click.option("--count", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--length", default=5, show_default=True, type=click.IntRange(min=0))
@click.option("--props", default="p,q", show_default=True)
@click.option("--attrs", default="a", show_default=True)
@click.option("--max-values", default=3, show_default=True, type=click.IntRange(min=1))
@json_option
def random_word_cmd(seed, count, length, props, attrs, max_values, as_json):
    """Reproducible random words from the SplitMix64 stream."""

    from dataltl_toolkit.api.search import random_words

    payload = random_words(seed, count, length, _names(props), _names(attrs), max_values)
    _emit(payload, as_json, "\n".join(json.dumps(w, sort_keys=True) for w in payload["words"]))


def main() -> None:
    cli(prog_name="dataltl")


if __name__ == "__main__":
    main()
