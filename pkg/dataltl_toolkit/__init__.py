"""DataLTL toolkit.

Basic Data LTL on attributed data words: a formula parser and printer, a
reference evaluator, the multi-attribute to single-attribute encoding, register
and data automata, the shepherd/herd machinery for the extended Until operator,
bounded satisfiability search and generators for the undecidability gadgets.

Keep this file free of import-time side effects; the CLI and the services
import what they need lazily.
"""

from __future__ import annotations

__version__ = "0.1.0"
__all__ = ["__version__"]
