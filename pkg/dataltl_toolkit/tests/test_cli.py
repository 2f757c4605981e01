"""End-to-end checks of the ``dataltl`` command line."""

import json
import unittest

from click.testing import CliRunner

from dataltl_toolkit import __version__
from dataltl_toolkit.cli import cli
from dataltl_toolkit.services.formula import to_text
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.words import HERD_EXAMPLE_PSI, herd_example_word
from dataltl_toolkit.utils.word_io import dumps_word

ENV_VARS = ("DATALTL_LOG_LEVEL", "DATALTL_THREADS", "DATALTL_SEARCH_BUDGET", "DATALTL_PADDING_MODE")


class CliTestCase(unittest.TestCase):
    def setUp(self):
        # None unsets the variable for the invocation
        self.runner = CliRunner(env={name: None for name in ENV_VARS})
        self.example_word = dumps_word(herd_example_word())

    def invoke(self, args, input=None):
        return self.runner.invoke(cli, args, input=input)


class TestCommands(CliTestCase):
    def test_version(self):
        result = self.invoke(["--version"])

        self.assertEqual(result.exit_code, 0)
        self.assertIn(__version__, result.output)

    def test_parse_prints_the_canonical_form(self):
        result = self.invoke(["parse", "-f", HERD_EXAMPLE_PSI])

        self.assertEqual(result.exit_code, 0)
        self.assertEqual(result.output.strip(), to_text(parse(HERD_EXAMPLE_PSI)))

    def test_eval_exit_code_follows_the_truth_value(self):
        for pos, code, text in [(1, 0, "true"), (5, 1, "false")]:
            with self.subTest(pos=pos):
                result = self.invoke(["eval", "-f", HERD_EXAMPLE_PSI, "--pos", str(pos)], input=self.example_word)

                self.assertEqual(result.exit_code, code)
                self.assertEqual(result.output.strip(), text)

    def test_eval_json(self):
        result = self.invoke(["eval", "-f", HERD_EXAMPLE_PSI, "--json"], input=self.example_word)

        self.assertEqual(result.exit_code, 0)
        self.assertIs(json.loads(result.output)["value"], True)

    def test_satcheck_reports_bounded_unsat(self):
        result = self.invoke(["satcheck", "-f", "p & !p", "--max-len", "4", "--props", "p"])

        self.assertEqual(result.exit_code, 1)
        self.assertEqual(result.output.splitlines()[0], "bounded-unsat")

    def test_satcheck_prints_a_model(self):
        result = self.invoke(["satcheck", "-f", "p U q", "--max-len", "3", "--json"])

        self.assertEqual(result.exit_code, 0)
        payload = json.loads(result.output)
        self.assertEqual(payload["outcome"], "sat")
        self.assertEqual(len(payload["model"]["positions"]), 1)

    def test_herd_table_and_claims(self):
        args = ["herd", "-f", HERD_EXAMPLE_PSI, "--marks", "3,4,6,7"]
        result = self.invoke(args, input=self.example_word)

        self.assertEqual(result.exit_code, 0)
        self.assertIn("H(10) = [3, 4, 6, 7]  I(10) = (3, 6)", result.output)
        self.assertIn("claim 1a: ok", result.output)
        self.assertIn("claim 1c: FAILED", result.output)

        checked = self.invoke([*args, "--check"], input=self.example_word)
        self.assertEqual(checked.exit_code, 1)

    def test_herd_truth_mode_passes_the_check(self):
        result = self.invoke(["herd", "-f", HERD_EXAMPLE_PSI, "--check"], input=self.example_word)

        self.assertEqual(result.exit_code, 0)
        self.assertNotIn("FAILED", result.output)

    def test_random_word_is_reproducible(self):
        args = ["random-word", "--seed", "7", "--count", "2", "--length", "4"]
        first = self.invoke(args)
        second = self.invoke(args)

        self.assertEqual(first.exit_code, 0)
        self.assertEqual(first.output, second.output)
        lines = first.output.splitlines()
        self.assertEqual(len(lines), 2)
        self.assertTrue(all(len(json.loads(line)["positions"]) == 4 for line in lines))

    def test_pcp_gadget(self):
        result = self.invoke(["gadget", "pcp", "--pairs", "ab:a,b:bb", "--solution", "1,2"])

        self.assertEqual(result.exit_code, 0)
        self.assertEqual(result.output.splitlines()[-1], "satisfied")

    def test_pcp_gadget_rejects_a_non_solution(self):
        result = self.invoke(["gadget", "pcp", "--pairs", "ab:a,b:bb", "--solution", "1"])

        self.assertEqual(result.exit_code, 3)
        self.assertIn("error:", result.output)


class TestErrors(CliTestCase):
    def test_malformed_word_exits_3(self):
        result = self.invoke(["eval", "-f", "p"], input="[]")

        self.assertEqual(result.exit_code, 3)
        self.assertIn("error:", result.output)

    def test_malformed_word_as_json(self):
        result = self.invoke(["eval", "-f", "p", "--json"], input="[]")

        self.assertEqual(result.exit_code, 3)
        payload = json.loads(result.output.strip().splitlines()[-1])
        self.assertEqual(payload["error"], "WordFormatError")

    def test_formula_syntax_error_exits_3(self):
        self.assertEqual(self.invoke(["parse", "-f", "p U"]).exit_code, 3)

    def test_formula_needs_exactly_one_source(self):
        for extra in ([], ["-f", "p", "--formula-file", "-"]):
            with self.subTest(extra=extra):
                self.assertEqual(self.invoke(["parse", *extra]).exit_code, 2)
